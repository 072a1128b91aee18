#pragma once

#include "chemo/radial_calculus.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace chemo {

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 500;
    double damping = 0.5;
    int continuation_steps = 1;
    double min_damping = 1.0 / 64.0;
    int max_continuation_steps = 64;
};

inline void validate_options(const SolveOptions& o)
{
    if (!(o.tol > 0.0) || !(o.damping > 0.0) || o.damping > 1.0 || o.continuation_steps < 1 ||
        o.max_iter < 1 || !(o.min_damping > 0.0) || o.min_damping > o.damping)
        throw Error(ErrorCode::InvalidArgument, "bad solver options");
}

/// A solution (u1, u2) of the two-species Liouville system, with
/// rho_k = lambda_k e^{phi_k} the densities behind it.
template <typename Scalar>
struct Solution {
    RadialField<Scalar> u1;
    RadialField<Scalar> u2;
    double residual = 0.0;
    int iterations = 0;
    std::array<Scalar, 2> multipliers{};
};

/// Exponent coefficients: phi_k = c[k][0] u1 + c[k][1] u2 + fixed_k.
template <typename Scalar>
struct Coupling {
    std::array<std::array<Scalar, 2>, 2> c{};
    std::array<Scalar, 2> mass{};
    std::array<Vec<Scalar>, 2> fixed;
};

template <typename Scalar>
Coupling<Scalar> pair_coupling(const Params& p, Scalar m1, Scalar m2)
{
    Coupling<Scalar> k;
    k.c = {{{Scalar(p.alpha), Scalar(-p.beta)}, {Scalar(-p.theta * p.beta), Scalar(-p.gamma)}}};
    k.mass = {m1, m2};
    return k;
}

namespace detail {

template <typename Scalar>
struct Densities {
    std::array<Vec<Scalar>, 2> rho;
    std::array<Scalar, 2> log_z{};
};

template <typename Scalar>
Densities<Scalar> densities(const RadialGrid<Scalar>& grid, const Coupling<Scalar>& k,
                            const std::array<Vec<Scalar>, 2>& u)
{
    Densities<Scalar> d;
    for (int s = 0; s < 2; ++s) {
        if (k.mass[s] == Scalar(0)) {
            d.rho[s] = Vec<Scalar>::Zero(grid.size());
            continue;
        }
        Vec<Scalar> phi = k.c[s][0] * u[0] + k.c[s][1] * u[1];
        if (k.fixed[s].size() != 0)
            phi += k.fixed[s];
        auto [rho, lz] = gibbs(grid, phi, k.mass[s]);
        d.rho[s] = std::move(rho);
        d.log_z[s] = lz;
    }
    return d;
}

template <typename Scalar>
Scalar sup_residual(const RadialGrid<Scalar>& grid, const Vec<Scalar>& u, const Vec<Scalar>& rho)
{
    const Vec<Scalar> lap = laplacian(grid, u);
    Scalar r = Scalar(0);
    for (Eigen::Index i = 0; i < grid.cells(); ++i) {
        using std::abs;
        r = std::max(r, abs(lap[i] + rho[i]));
    }
    return r;
}

/// Round-off level of the discrete residual for potentials of size `scale`.
template <typename Scalar>
Scalar residual_floor(const RadialGrid<Scalar>& grid, Scalar scale)
{
    const auto& a = grid.conductance();
    const auto& V = grid.volumes();
    Scalar stiff = a[0] / V[0];
    for (Eigen::Index i = 1; i < grid.cells(); ++i)
        stiff = std::max(stiff, (a[i - 1] + a[i]) / V[i]);
    return Scalar(8) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + scale) * stiff;
}

struct PicardResult {
    double residual;
    int iterations;
};

/// Damped fixed-point iteration u <- u + d (G rho(u) - u) until the sup residual of
/// L u + rho(u) drops below tol. Damping halves whenever the residual grows.
template <typename Scalar>
PicardResult picard(const RadialGrid<Scalar>& grid, const Coupling<Scalar>& k,
                    std::array<Vec<Scalar>, 2>& u, const SolveOptions& opt)
{
    const Scalar tol = Scalar(opt.tol);
    const Scalar min_d = Scalar(opt.min_damping);
    Scalar damping = Scalar(opt.damping);
    Scalar prev = std::numeric_limits<Scalar>::infinity();
    Scalar best = prev;
    int since_best = 0;
    int decreases = 0;
    Scalar window_start = prev;
    int window_count = 0;

    for (int it = 0; it <= opt.max_iter; ++it) {
        const auto d = densities(grid, k, u);
        std::array<Vec<Scalar>, 2> target;
        Scalar res = Scalar(0);
        Scalar incr = Scalar(0);
        for (int s = 0; s < 2; ++s) {
            target[s] = inv_laplacian(grid, d.rho[s]);
            res = std::max(res, sup_residual(grid, u[s], d.rho[s]));
            incr = std::max(incr, (target[s] - u[s]).cwiseAbs().maxCoeff());
        }
        if (!std::isfinite(static_cast<double>(res)))
            throw Error(ErrorCode::SolverDiverged, "non-finite residual in fixed-point iteration");
        if (res <= tol)
            return {static_cast<double>(res), it};

        if (res < best * Scalar(0.999)) {
            best = res;
            since_best = 0;
        }
        else if (++since_best > 30) {
            const Scalar scale = std::max(u[0].cwiseAbs().maxCoeff(), u[1].cwiseAbs().maxCoeff());
            if (res <= residual_floor(grid, scale))
                return {static_cast<double>(res), it};
        }

        // The sup residual can grow while mass concentrates, so damping follows the increment.
        if (incr > prev) {
            damping = std::max(damping / Scalar(2), min_d);
            decreases = 0;
        }
        else if (++decreases >= 20 && damping < Scalar(opt.damping)) {
            damping = std::min(damping * Scalar(1.25), Scalar(opt.damping));
            decreases = 0;
        }
        prev = incr;

        if (damping == min_d) {
            if (window_count == 0)
                window_start = incr;
            if (++window_count == 50) {
                if (incr >= window_start)
                    throw Error(ErrorCode::Oscillation, "increment not decreasing at minimum damping");
                window_count = 0;
            }
        }
        else {
            window_count = 0;
        }

        for (int s = 0; s < 2; ++s)
            u[s] += damping * (target[s] - u[s]);
        u[0][grid.cells()] = Scalar(0);
        u[1][grid.cells()] = Scalar(0);
    }
    throw Error(ErrorCode::SolverDiverged,
                "no convergence in " + std::to_string(opt.max_iter) + " iterations");
}

template <typename Scalar>
Solution<Scalar> package(const RadialGrid<Scalar>& grid, const Coupling<Scalar>& k,
                         std::array<Vec<Scalar>, 2> u, PicardResult r)
{
    const auto d = densities(grid, k, u);
    std::array<Scalar, 2> lambda{};
    for (int s = 0; s < 2; ++s) {
        using std::exp;
        using std::log;
        lambda[s] = k.mass[s] > Scalar(0) ? exp(log(k.mass[s]) - d.log_z[s]) : Scalar(0);
    }
    return Solution<Scalar>{RadialField<Scalar>(grid, std::move(u[0]), FieldKind::Potential),
                            RadialField<Scalar>(grid, std::move(u[1]), FieldKind::Potential),
                            r.residual, r.iterations, lambda};
}

} // namespace detail

/// u = (2/alpha) ln((1 + delta) / (1 + delta r^2)); solves the single-species equation
/// with mass 8 pi delta / (alpha (1 + delta)).
template <typename Scalar>
RadialField<Scalar> bubble(Scalar alpha, Scalar delta, const RadialGrid<Scalar>& grid)
{
    using std::log;
    return RadialField<Scalar>::from_function(
        grid, [&](Scalar r) { return Scalar(2) / alpha * log((Scalar(1) + delta) / (Scalar(1) + delta * r * r)); },
        FieldKind::Potential);
}

inline double bubble_mass(double alpha, double delta)
{
    return 8.0 * kPi<double> * delta / (alpha * (1.0 + delta));
}

inline double bubble_delta(double alpha, double m)
{
    const double mc = 8.0 * kPi<double> / alpha;
    return m / (mc - m);
}

/// Sup-norm residuals of both equations over the nodes r < 1.
template <typename Scalar>
std::pair<double, double> residual(const Solution<Scalar>& sol, const Params& p)
{
    const auto& grid = sol.u1.grid();
    const auto k = pair_coupling<Scalar>(p, Scalar(p.m1), Scalar(p.m2));
    const auto d = detail::densities(grid, k, {sol.u1.values(), sol.u2.values()});
    return {static_cast<double>(detail::sup_residual(grid, sol.u1.values(), d.rho[0])),
            static_cast<double>(detail::sup_residual(grid, sol.u2.values(), d.rho[1]))};
}

/// Solves Delta u1 + M1 e^{alpha u1 - beta u2}/Z1 = 0, Delta u2 + M2 e^{-gamma u2 - theta beta u1}/Z2 = 0,
/// u1 = u2 = 0 at r = 1.
///
/// Tries a mass ladder (j/k) M, j = 1..k, starting with k = continuation_steps and doubling k
/// whenever a rung fails, up to max_continuation_steps.
template <typename Scalar>
Solution<Scalar> solve_pair(const Params& params, const RadialGrid<Scalar>& grid,
                            const SolveOptions& opt = {})
{
    const Params p = validate_params(params);
    validate_options(opt);
    int total = 0;
    Error last(ErrorCode::SolverDiverged, "no attempt");
    for (int steps = opt.continuation_steps; steps <= std::max(opt.continuation_steps, opt.max_continuation_steps);
         steps *= 2) {
        std::array<Vec<Scalar>, 2> u{Vec<Scalar>::Zero(grid.size()), Vec<Scalar>::Zero(grid.size())};
        try {
            detail::PicardResult r{};
            for (int j = 1; j <= steps; ++j) {
                const Scalar f = Scalar(j) / Scalar(steps);
                const auto k = pair_coupling<Scalar>(p, f * Scalar(p.m1), f * Scalar(p.m2));
                r = detail::picard(grid, k, u, opt);
                total += r.iterations;
            }
            r.iterations = total;
            return detail::package(grid, pair_coupling<Scalar>(p, Scalar(p.m1), Scalar(p.m2)), std::move(u), r);
        }
        catch (const Error& e) {
            if (e.code() != ErrorCode::SolverDiverged && e.code() != ErrorCode::Oscillation)
                throw;
            last = e;
        }
    }
    throw last;
}

/// Solves Delta u + m e^{alpha u} / int e^{alpha u} = 0 for 0 < m < 8 pi / alpha.
template <typename Scalar>
Solution<Scalar> solve_single(double m, double alpha, const RadialGrid<Scalar>& grid,
                              const SolveOptions& opt = {})
{
    if (alpha > 0.0 && m >= 8.0 * kPi<double> / alpha)
        throw Error(ErrorCode::Supercritical, "mass at or above the critical mass 8 pi / alpha");
    Params p;
    p.alpha = alpha;
    p.m1 = m;
    return solve_pair(p, grid, opt);
}

/// Minimizer over w of (gamma/2) int |grad w|^2 + m2 ln int e^{-gamma w - theta beta u}, u = inv_laplacian(rho):
/// the solution of Delta w + m2 e^{-gamma w - theta beta u} / Z = 0, w(1) = 0.
template <typename Scalar>
RadialField<Scalar> minimize_w(const RadialField<Scalar>& rho, const Params& params, const SolveOptions& opt = {},
                               const RadialField<Scalar>* warm = nullptr)
{
    const Params p = validate_params(params);
    validate_options(opt);
    const auto& grid = rho.grid();
    if (p.gamma == 0.0)
        throw Error(ErrorCode::GammaZero, "minimize_w needs gamma > 0");
    if (p.m2 == 0.0)
        return RadialField<Scalar>::zero(grid, FieldKind::Potential);

    Coupling<Scalar> k;
    k.c = {{{Scalar(0), Scalar(0)}, {Scalar(0), Scalar(-p.gamma)}}};
    k.mass = {Scalar(0), Scalar(p.m2)};
    k.fixed[1] = Scalar(-p.theta * p.beta) * inv_laplacian(grid, rho.values());

    std::array<Vec<Scalar>, 2> u{Vec<Scalar>::Zero(grid.size()),
                                 warm ? warm->values() : Vec<Scalar>::Zero(grid.size())};
    if (warm)
        require_same_grid(grid, warm->grid());
    detail::picard(grid, k, u, opt);
    return RadialField<Scalar>(grid, std::move(u[1]), FieldKind::Potential);
}

} // namespace chemo
