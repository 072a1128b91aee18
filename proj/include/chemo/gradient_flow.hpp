#pragma once

#include "chemo/functionals.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace chemo {

struct EnergySample {
    double t;
    double value;
};

struct MassSample {
    double t;
    double m1;
    double m2;
};

/// Snapshot of a flow. Parabolic-elliptic states carry densities with u_k = inv_laplacian(rho_k)
/// (u2 is the slaved potential in the two-density-one-slaved case); exponential-flow states carry
/// the potentials, with rho1, rho2 their Gibbs densities.
template <typename Scalar>
struct FlowState {
    double t = 0.0;
    RadialField<Scalar> rho1;
    std::optional<RadialField<Scalar>> rho2{};
    RadialField<Scalar> u1;
    RadialField<Scalar> u2;
    double energy = 0.0;
    bool monitored = false;  ///< energy is a Lyapunov functional and increases are rejected
    std::vector<EnergySample> energy_trace{};
    std::vector<MassSample> mass_trace{};
    std::vector<EnergySample> peak_trace{};  ///< (t, sup rho1)
    std::vector<ErrorCode> warnings{};
    long accepted = 0;
    long rejected = 0;
    bool steady = false;
};

/// Per-step options shared by the steppers.
struct StepOptions {
    double energy_tol = 1e-10;
    SolveOptions w_solve{1e-10, 5000, 1.0};
};

namespace detail {

/// Bernoulli function x / (e^x - 1).
template <typename Scalar>
Scalar bernoulli(Scalar x)
{
    using std::abs;
    using std::expm1;
    if (abs(x) < Scalar(1e-3)) {
        const Scalar x2 = x * x;
        return Scalar(1) - x / Scalar(2) + x2 / Scalar(12) - x2 * x2 / Scalar(720);
    }
    return x / expm1(x);
}

/// Thomas algorithm; lower[i] couples row i to i-1, upper[i] couples row i to i+1.
template <typename Scalar>
Vec<Scalar> solve_tridiagonal(const Vec<Scalar>& lower, Vec<Scalar> diag, const Vec<Scalar>& upper,
                              Vec<Scalar> rhs)
{
    const Eigen::Index n = diag.size();
    for (Eigen::Index i = 1; i < n; ++i) {
        const Scalar f = lower[i] / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    return rhs;
}

/// Implicit drift-diffusion step V (rho' - rho)/dt = flux divergence with Scharfetter-Gummel
/// face fluxes a_i [B(-x) rho'_{i+1} - B(x) rho'_i], x = phi_{i+1} - phi_i, and phi frozen.
/// Zero flux at r = 0 and r = 1. The matrix is an M-matrix whose columns sum to V/dt, so
/// positivity and the discrete mass are both kept.
template <typename Scalar>
Vec<Scalar> drift_diffusion(const RadialGrid<Scalar>& grid, const Vec<Scalar>& rho, const Vec<Scalar>& phi,
                            Scalar dt)
{
    const Eigen::Index size = grid.size();
    const auto& a = grid.conductance();
    const auto& V = grid.volumes();
    Vec<Scalar> lower = Vec<Scalar>::Zero(size), upper = Vec<Scalar>::Zero(size);
    Vec<Scalar> diag = V / dt;
    for (Eigen::Index i = 0; i + 1 < size; ++i) {
        const Scalar x = phi[i + 1] - phi[i];
        const Scalar bp = a[i] * bernoulli(x);
        const Scalar bm = a[i] * bernoulli(-x);
        diag[i] += bp;
        upper[i] = -bm;
        diag[i + 1] += bm;
        lower[i + 1] = -bp;
    }
    Vec<Scalar> out = solve_tridiagonal(lower, std::move(diag), upper, Vec<Scalar>(V.cwiseProduct(rho) / dt));
    // The elimination loses mass at round-off level when dt V^{-1} a is large; put it back.
    const Scalar before = V.dot(rho);
    const Scalar after = V.dot(out);
    if (after > Scalar(0))
        out *= before / after;
    return out;
}

/// (V/dt - L) u' = V u / dt + V src with u'_n = 0.
template <typename Scalar>
Vec<Scalar> implicit_heat(const RadialGrid<Scalar>& grid, const Vec<Scalar>& u, const Vec<Scalar>& src, Scalar dt)
{
    const Eigen::Index size = grid.size();
    const Eigen::Index n = grid.cells();
    const auto& a = grid.conductance();
    const auto& V = grid.volumes();
    Vec<Scalar> lower = Vec<Scalar>::Zero(size), upper = Vec<Scalar>::Zero(size);
    Vec<Scalar> diag = V / dt;
    Vec<Scalar> rhs = V.cwiseProduct(u / dt + src);
    for (Eigen::Index i = 0; i < n; ++i) {
        diag[i] += a[i];
        upper[i] = -a[i];
        if (i > 0) {
            diag[i] += a[i - 1];
            lower[i] = -a[i - 1];
        }
    }
    diag[n] = Scalar(1);
    lower[n] = Scalar(0);
    rhs[n] = Scalar(0);
    return solve_tridiagonal(lower, std::move(diag), upper, std::move(rhs));
}

/// Potential of species 2 slaved to rho1: the minimizer of f_m over w when gamma > 0, otherwise
/// inv_laplacian of its Gibbs density e^{-theta beta u1} (no fixed point needed).
template <typename Scalar>
RadialField<Scalar> slaved_u2(const RadialField<Scalar>& rho1, const RadialField<Scalar>& u1, const Params& p,
                              const StepOptions& opt, const RadialField<Scalar>* warm)
{
    const auto& grid = rho1.grid();
    if (p.m2 == 0.0)
        return RadialField<Scalar>::zero(grid, FieldKind::Potential);
    if (p.gamma > 0.0)
        return minimize_w(rho1, p, opt.w_solve, warm);
    auto [rho2, lz] = gibbs(grid, Vec<Scalar>(Scalar(-p.theta * p.beta) * u1.values()), Scalar(p.m2));
    return RadialField<Scalar>(grid, inv_laplacian(grid, rho2), FieldKind::Potential);
}

template <typename Scalar>
void check_density(const Vec<Scalar>& rho)
{
    for (Eigen::Index i = 0; i < rho.size(); ++i)
        if (!(rho[i] >= Scalar(0)) || !std::isfinite(static_cast<double>(rho[i])))
            throw Error(ErrorCode::StepRejected, "step produced a negative or non-finite density");
}

template <typename Scalar>
void check_energy(const FlowState<Scalar>& before, double after, const StepOptions& opt)
{
    if (!std::isfinite(after))
        throw Error(ErrorCode::StepRejected, "energy is not finite");
    if (before.monitored && after > before.energy + opt.energy_tol * std::abs(before.energy))
        throw Error(ErrorCode::StepRejected, "energy increased beyond tolerance");
}

template <typename Scalar>
double sup_change(const Vec<Scalar>& a, const Vec<Scalar>& b)
{
    const double diff = static_cast<double>((a - b).cwiseAbs().maxCoeff());
    const double scale = static_cast<double>(a.cwiseAbs().maxCoeff());
    return diff / std::max(scale, 1e-300);
}

template <typename Scalar>
void record(FlowState<Scalar>& s)
{
    s.energy_trace.push_back({s.t, s.energy});
    const double m2 = s.rho2 ? static_cast<double>(integrate_disk(*s.rho2)) : 0.0;
    s.mass_trace.push_back({s.t, static_cast<double>(integrate_disk(s.rho1)), m2});
    s.peak_trace.push_back({s.t, static_cast<double>(s.rho1.values().maxCoeff())});
}

template <typename Scalar>
double full_energy(const RadialField<Scalar>& rho1, const RadialField<Scalar>& rho2, const Params& p)
{
    return static_cast<double>(h_theta_under(rho1, rho2, p).total);
}

} // namespace detail

/// Starting state for the flow with species 2 slaved (cfg (1,0,0)). Energy is f_m(rho, w*(rho)).
template <typename Scalar>
FlowState<Scalar> pe2_state(const RadialField<Scalar>& rho1, const Params& params, const StepOptions& opt = {})
{
    const Params p = validate_params(params);
    const auto& grid = rho1.grid();
    FlowState<Scalar> s{.rho1 = rho1.as(FieldKind::Density),
                        .u1 = inv_laplacian(rho1),
                        .u2 = RadialField<Scalar>::zero(grid, FieldKind::Potential)};
    s.u2 = detail::slaved_u2<Scalar>(s.rho1, s.u1, p, opt, nullptr);
    s.energy = static_cast<double>(f_m(s.rho1, s.u2, p).total);
    s.monitored = true;
    detail::record(s);
    return s;
}

/// Starting state for the flow with both densities evolving (cfg (1,1,0)). The energy recorded is
/// h_theta_under; it is only monitored for theta = +1.
template <typename Scalar>
FlowState<Scalar> full_state(const RadialField<Scalar>& rho1, const RadialField<Scalar>& rho2, const Params& params)
{
    const Params p = validate_params(params);
    require_same_grid(rho1.grid(), rho2.grid());
    FlowState<Scalar> s{.rho1 = rho1.as(FieldKind::Density),
                        .rho2 = rho2.as(FieldKind::Density),
                        .u1 = inv_laplacian(rho1),
                        .u2 = inv_laplacian(rho2)};
    s.energy = detail::full_energy(s.rho1, *s.rho2, p);
    s.monitored = p.theta == 1;
    detail::record(s);
    return s;
}

/// Starting state for the exponential flow (cfg (0,0,1)). h_theta_bar is monitored only for
/// theta = -1 and alpha gamma > beta^2; a degenerate quadratic form adds a warning.
template <typename Scalar>
FlowState<Scalar> exp_state(const RadialField<Scalar>& u1, const RadialField<Scalar>& u2, const Params& params)
{
    const Params p = validate_params(params);
    const auto& grid = u1.grid();
    require_same_grid(grid, u2.grid());
    const auto k = pair_coupling<Scalar>(p, Scalar(p.m1), Scalar(p.m2));
    const auto d = detail::densities(grid, k, {u1.values(), u2.values()});
    FlowState<Scalar> s{.rho1 = RadialField<Scalar>(grid, d.rho[0], FieldKind::Density),
                        .rho2 = RadialField<Scalar>(grid, d.rho[1], FieldKind::Density),
                        .u1 = u1.as(FieldKind::Potential),
                        .u2 = u2.as(FieldKind::Potential)};
    s.energy = static_cast<double>(h_theta_bar(s.u1, s.u2, p).total);
    if (std::abs(p.beta * p.beta + p.alpha * p.gamma * p.theta) <= 1e-12)
        s.warnings.push_back(ErrorCode::DegenerateQuadraticForm);
    else
        s.monitored = p.theta == -1 && p.alpha * p.gamma > p.beta * p.beta;
    detail::record(s);
    return s;
}

/// One step of d rho/dt = Delta rho + div[rho (beta grad u2 - alpha grad u1)] with u1 = inv_laplacian(rho)
/// and u2 slaved to rho. The slaved potential is re-solved from the previous one after the step.
template <typename Scalar>
FlowState<Scalar> step_pe2(const FlowState<Scalar>& s, const Params& params, double dt, const StepOptions& opt = {})
{
    const Params p = validate_params(params);
    const auto& grid = s.rho1.grid();
    const Vec<Scalar> phi = Scalar(-p.alpha) * s.u1.values() + Scalar(p.beta) * s.u2.values();
    Vec<Scalar> rho = detail::drift_diffusion(grid, s.rho1.values(), phi, Scalar(dt));
    detail::check_density(rho);

    FlowState<Scalar> out = s;
    out.t = s.t + dt;
    out.rho1 = RadialField<Scalar>(grid, std::move(rho), FieldKind::Density);
    out.u1 = inv_laplacian(out.rho1);
    out.u2 = detail::slaved_u2(out.rho1, out.u1, p, opt, &s.u2);
    out.energy = static_cast<double>(f_m(out.rho1, out.u2, p).total);
    detail::check_energy(s, out.energy, opt);
    ++out.accepted;
    detail::record(out);
    return out;
}

/// One step of both densities: species 1 drifts down phi1 = -alpha u1 + beta u2, species 2 down
/// phi2 = theta beta u1 + gamma u2, with u_k = inv_laplacian(rho_k).
template <typename Scalar>
FlowState<Scalar> step_pe_full(const FlowState<Scalar>& s, const Params& params, double dt,
                               const StepOptions& opt = {})
{
    const Params p = validate_params(params);
    if (!s.rho2)
        throw Error(ErrorCode::InvalidArgument, "step_pe_full needs both densities");
    const auto& grid = s.rho1.grid();
    const Vec<Scalar>& u1 = s.u1.values();
    const Vec<Scalar>& u2 = s.u2.values();
    const Vec<Scalar> phi1 = Scalar(-p.alpha) * u1 + Scalar(p.beta) * u2;
    const Vec<Scalar> phi2 = Scalar(p.theta * p.beta) * u1 + Scalar(p.gamma) * u2;
    Vec<Scalar> r1 = detail::drift_diffusion(grid, s.rho1.values(), phi1, Scalar(dt));
    Vec<Scalar> r2 = detail::drift_diffusion(grid, s.rho2->values(), phi2, Scalar(dt));
    detail::check_density(r1);
    detail::check_density(r2);

    FlowState<Scalar> out = s;
    out.t = s.t + dt;
    out.rho1 = RadialField<Scalar>(grid, std::move(r1), FieldKind::Density);
    out.rho2 = RadialField<Scalar>(grid, std::move(r2), FieldKind::Density);
    out.u1 = inv_laplacian(out.rho1);
    out.u2 = inv_laplacian(*out.rho2);
    out.energy = detail::full_energy(out.rho1, *out.rho2, p);
    detail::check_energy(s, out.energy, opt);
    ++out.accepted;
    detail::record(out);
    return out;
}

/// One step of d u_k/dt = Delta u_k + rho_k(u): diffusion implicit, Gibbs sources explicit,
/// u_k(1) = 0 held exactly.
template <typename Scalar>
FlowState<Scalar> step_exp(const FlowState<Scalar>& s, const Params& params, double dt, const StepOptions& opt = {})
{
    const Params p = validate_params(params);
    const auto& grid = s.u1.grid();
    const auto k = pair_coupling<Scalar>(p, Scalar(p.m1), Scalar(p.m2));
    const auto src = detail::densities(grid, k, {s.u1.values(), s.u2.values()});
    Vec<Scalar> u1 = detail::implicit_heat(grid, s.u1.values(), src.rho[0], Scalar(dt));
    Vec<Scalar> u2 = detail::implicit_heat(grid, s.u2.values(), src.rho[1], Scalar(dt));
    if (!u1.allFinite() || !u2.allFinite())
        throw Error(ErrorCode::StepRejected, "potential is not finite");

    FlowState<Scalar> out = s;
    out.t = s.t + dt;
    out.u1 = RadialField<Scalar>(grid, std::move(u1), FieldKind::Potential);
    out.u2 = RadialField<Scalar>(grid, std::move(u2), FieldKind::Potential);
    const auto d = detail::densities(grid, k, {out.u1.values(), out.u2.values()});
    out.rho1 = RadialField<Scalar>(grid, d.rho[0], FieldKind::Density);
    out.rho2 = RadialField<Scalar>(grid, d.rho[1], FieldKind::Density);
    out.energy = static_cast<double>(h_theta_bar(out.u1, out.u2, p).total);
    detail::check_energy(s, out.energy, opt);
    ++out.accepted;
    detail::record(out);
    return out;
}

/// Integrates to cfg.t_end, until the relative state change per unit time falls below
/// cfg.steady_tol, or until cfg.max_steps accepted steps. Rejected steps are retried with dt/2;
/// accepted steps grow dt by 1.2 up to dt_max when cfg.adapt is set.
template <typename Scalar>
FlowState<Scalar> run_flow(const FlowState<Scalar>& initial, const Params& params, const FlowConfig& cfg,
                           const StepOptions& opt = {})
{
    const Params p = validate_params(params);
    const FlowCase which = flow_case(cfg);
    auto step = [&](const FlowState<Scalar>& s, double dt) {
        switch (which) {
        case FlowCase::ParabolicEllipticTwo: return step_pe2(s, p, dt, opt);
        case FlowCase::ParabolicEllipticFull: return step_pe_full(s, p, dt, opt);
        case FlowCase::Exponential: break;
        }
        return step_exp(s, p, dt, opt);
    };
    auto state_of = [&](const FlowState<Scalar>& s) -> const Vec<Scalar>& {
        return which == FlowCase::Exponential ? s.u1.values() : s.rho1.values();
    };
    auto second_of = [&](const FlowState<Scalar>& s) -> std::optional<Vec<Scalar>> {
        if (which == FlowCase::Exponential)
            return s.u2.values();
        if (which == FlowCase::ParabolicEllipticFull)
            return s.rho2->values();
        return std::nullopt;
    };

    FlowState<Scalar> s = initial;
    s.steady = false;
    double dt = std::min(cfg.dt, cfg.dt_max);
    const double t_stop = initial.t + cfg.t_end;
    long steps = 0;
    while (s.t < t_stop * (1.0 - 1e-15) && steps < cfg.max_steps) {
        const double h = std::min(dt, t_stop - s.t);
        std::optional<FlowState<Scalar>> next;
        try {
            next.emplace(step(s, h));
        }
        catch (const Error& e) {
            if (e.code() != ErrorCode::StepRejected && e.code() != ErrorCode::SolverDiverged &&
                e.code() != ErrorCode::Oscillation)
                throw;
            ++s.rejected;
            dt = h / 2.0;
            if (dt < 1e-14)
                throw Error(ErrorCode::Stalled, "time step fell below 1e-14 at t = " + std::to_string(s.t));
            continue;
        }
        ++steps;
        double change = detail::sup_change(state_of(*next), state_of(s));
        const auto a2 = second_of(*next), b2 = second_of(s);
        if (a2 && a2->cwiseAbs().maxCoeff() > Scalar(0))
            change = std::max(change, detail::sup_change(*a2, *b2));
        s = std::move(*next);
        if (change / h < cfg.steady_tol) {
            s.steady = true;
            break;
        }
        if (cfg.adapt)
            dt = std::min(h * 1.2, cfg.dt_max);
    }
    return s;
}

} // namespace chemo
