#pragma once

#include "chemo/functionals.hpp"
#include "chemo/parallel.hpp"
#include "chemo/phase_diagram.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace chemo {

/// Full mode concentrates by psi (rho -> psi^2 rho(psi r)); half mode by sqrt(psi).
enum class BlowdownMode { Full, Half };

inline double effective_scale(double psi, BlowdownMode mode)
{
    if (!(psi >= 1.0) || !std::isfinite(psi))
        throw Error(ErrorCode::InvalidArgument, "blow-down factor must be >= 1");
    return mode == BlowdownMode::Full ? psi : std::sqrt(psi);
}

/// Grid carrying a blown-down field: the base nodes shrunk by 1/s, one extra node just past
/// r = 1/s, then a geometric tail of `cells` nodes up to r = 1. The shrunk part keeps every
/// conductance and (up to the factor s^2) every volume of the base grid, so the scaling
/// identities hold node by node; the tail integrates the logarithmic exterior field.
template <typename Scalar>
RadialGrid<Scalar> blowdown_grid(const RadialGrid<Scalar>& base, Scalar s)
{
    using std::log;
    using std::pow;
    const Eigen::Index n = base.cells();
    const Eigen::Index tail = n;
    const Scalar inner_edge = Scalar(1) / s;
    const Scalar ratio = pow(s, Scalar(1) / Scalar(tail));
    const Scalar gap = std::min(Scalar(1e-10), (ratio - Scalar(1)) / Scalar(100));

    Vec<Scalar> r(n + 2 + tail);
    for (Eigen::Index i = 0; i <= n; ++i)
        r[i] = base[i] / s;
    r[n] = inner_edge;
    r[n + 1] = inner_edge * (Scalar(1) + gap);
    for (Eigen::Index k = 1; k <= tail; ++k)
        r[n + 1 + k] = pow(s, Scalar(k) / Scalar(tail) - Scalar(1));
    r[n + 1 + tail] = Scalar(1);
    return RadialGrid<Scalar>::from_nodes(std::move(r));
}

/// rho^psi(r) = s^2 rho(s r) on r <= 1/s and 0 outside, s = psi or sqrt(psi). Mass is kept
/// exactly by adjusting the single node at r = 1/s.
template <typename Scalar>
RadialField<Scalar> blowdown_density(const RadialField<Scalar>& rho, double psi, BlowdownMode mode)
{
    const double s = effective_scale(psi, mode);
    if (s == 1.0)
        return rho;
    const auto& base = rho.grid();
    const Eigen::Index n = base.cells();
    const auto grid = blowdown_grid(base, Scalar(s));
    const Scalar s2 = Scalar(s) * Scalar(s);
    Vec<Scalar> v = Vec<Scalar>::Zero(grid.size());
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = s2 * rho[i];
    v[n] = rho[n] * base.volumes()[n] / grid.volumes()[n];
    return RadialField<Scalar>(grid, std::move(v), FieldKind::Density);
}

/// w^psi(r) = w(s r) + (m/2pi) ln s on r <= 1/s, (m/2pi) ln(1/r) outside.
template <typename Scalar>
RadialField<Scalar> blowdown_potential(const RadialField<Scalar>& w, double m, double psi,
                                       BlowdownMode mode = BlowdownMode::Full)
{
    using std::log;
    const double s = effective_scale(psi, mode);
    if (s == 1.0)
        return w;
    const auto& base = w.grid();
    const Eigen::Index n = base.cells();
    const auto grid = blowdown_grid(base, Scalar(s));
    const Scalar c = Scalar(m) / (Scalar(2) * kPi<Scalar>);
    const Scalar lift = c * log(Scalar(s));
    Vec<Scalar> v(grid.size());
    for (Eigen::Index i = 0; i <= n; ++i)
        v[i] = w[i] + lift;
    for (Eigen::Index i = n + 1; i < grid.size(); ++i)
        v[i] = -c * log(grid[i]);
    v[grid.size() - 1] = Scalar(0);
    return RadialField<Scalar>(grid, std::move(v), FieldKind::Potential);
}

template <typename Scalar>
struct BlowdownFamily {
    RadialField<Scalar> base_rho;
    RadialField<Scalar> base_w;
    std::vector<double> psis;
    BlowdownMode mode = BlowdownMode::Full;

    void validate() const
    {
        if (psis.empty())
            throw Error(ErrorCode::InvalidArgument, "blow-down family needs at least one psi");
        for (std::size_t k = 0; k < psis.size(); ++k) {
            if (!(psis[k] > 1.0))
                throw Error(ErrorCode::InvalidArgument, "blow-down factors must exceed 1");
            if (k > 0 && !(psis[k] > psis[k - 1]))
                throw Error(ErrorCode::InvalidArgument, "blow-down factors must be strictly increasing");
        }
        require_same_grid(base_rho.grid(), base_w.grid());
    }
};

/// psi = 2^lo, ..., 2^hi.
inline std::vector<double> psi_ladder(int lo = 1, int hi = 10)
{
    std::vector<double> out;
    for (int k = lo; k <= hi; ++k)
        out.push_back(std::ldexp(1.0, k));
    return out;
}

struct IdentityRow {
    double psi = 0.0;
    std::string term;
    double predicted = 0.0;
    double measured = 0.0;
    bool applicable = true;
    bool asymptotic = false;  ///< prediction is the ln psi coefficient only; an O(1) offset remains
};

/// Shift coefficient of the whole functional f_m along a conflict blow-down:
/// Lambda when Lambda1 > 0, otherwise Lambda2.
inline double blowdown_coefficient(double m1, double m2, const Params& p)
{
    const auto l = lambda_val(m1, m2, p);
    return l.lambda1 > 0.0 ? l.lambda : l.lambda2;
}

/// Measured versus predicted shifts of entropy, interaction, Dirichlet energy, the M2 log term,
/// and the total f_m, for every psi in the family. Predictions are multiples of ln s.
template <typename Scalar>
std::vector<IdentityRow> verify_identities(const BlowdownFamily<Scalar>& fam, const Params& params)
{
    fam.validate();
    const Params p = validate_params(params);
    const double m1 = static_cast<double>(integrate_disk(fam.base_rho));
    const double m2 = p.m2;
    const double pi = kPi<double>;
    const auto lam = lambda_val(m1, m2, p);
    const bool conflict = p.theta == -1;

    const double s0 = static_cast<double>(entropy(fam.base_rho));
    const double i0 = static_cast<double>(interaction_energy(fam.base_rho));
    const double d0 = static_cast<double>(dirichlet_energy(fam.base_w));
    auto log_term = [&](const RadialField<Scalar>& rho, const RadialField<Scalar>& w) {
        const Vec<Scalar> u = inv_laplacian(rho.grid(), rho.values());
        const Vec<Scalar> phi = Scalar(-p.gamma) * w.values() + Scalar(-p.theta * p.beta) * u;
        return static_cast<double>(Scalar(m2) * log_partition(rho.grid(), phi));
    };
    const double l0 = m2 > 0.0 ? log_term(fam.base_rho, fam.base_w) : 0.0;
    const double f0 = static_cast<double>(f_m(fam.base_rho, fam.base_w, p).total);

    std::vector<std::vector<IdentityRow>> per(fam.psis.size());
    parallel_for(fam.psis.size(), [&](std::size_t k) {
        const double psi = fam.psis[k];
        const double ls = std::log(effective_scale(psi, fam.mode));
        const auto rho = blowdown_density(fam.base_rho, psi, fam.mode);
        const auto w = blowdown_potential(fam.base_w, m2, psi, fam.mode);
        auto& rows = per[k];
        rows.push_back({psi, "entropy", 2.0 * m1 * ls, static_cast<double>(entropy(rho)) - s0, true, false});
        rows.push_back({psi, "interaction", -m1 * m1 / (2.0 * pi) * ls,
                        static_cast<double>(interaction_energy(rho)) - i0, true, false});
        rows.push_back({psi, "dirichlet", m2 * m2 / (2.0 * pi) * ls,
                        static_cast<double>(dirichlet_energy(w)) - d0, true, false});
        rows.push_back({psi, "log_partition", lam.lambda1 * ls, (m2 > 0.0 ? log_term(rho, w) : 0.0) - l0,
                        conflict && lam.lambda1 > 0.0, true});
        rows.push_back({psi, "total", blowdown_coefficient(m1, m2, p) * ls,
                        static_cast<double>(f_m(rho, w, p).total) - f0, conflict, true});
    });
    std::vector<IdentityRow> out;
    for (auto& rows : per)
        out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

/// mt_functional(u^psi, m, alpha) for the full blow-down u^psi of a potential u with flux mass m,
/// from the ln psi shift formulas instead of a grid: the Dirichlet part gains (m^2/2pi) ln psi and
/// int e^{alpha u^psi} = psi^{a-2} int e^{alpha u} + 2pi int_{1/psi}^1 r^{1-a} dr, a = alpha m/2pi.
/// Everything stays in log form, so psi up to 1e300 is fine.
template <typename Scalar>
double mt_blowdown(const RadialField<Scalar>& u, double m, double alpha, double psi)
{
    if (!(psi >= 1.0) || !std::isfinite(psi))
        throw Error(ErrorCode::InvalidArgument, "blow-down factor must be >= 1");
    const double pi = kPi<double>;
    const double lp = std::log(psi);
    const double a = alpha * m / (2.0 * pi);
    const double dirichlet = static_cast<double>(dirichlet_energy(u)) + m * m / (2.0 * pi) * lp;
    const double log_in = (a - 2.0) * lp +
                          static_cast<double>(log_partition(u.grid(), Vec<Scalar>(Scalar(alpha) * u.values())));
    double log_out = -std::numeric_limits<double>::infinity();
    if (psi > 1.0) {
        const double e = (a - 2.0) * lp;  // ln psi^{a-2}
        if (std::abs(a - 2.0) < 1e-12)
            log_out = std::log(2.0 * pi * lp);
        else if (a > 2.0)
            log_out = std::log(2.0 * pi / (a - 2.0)) + e + std::log(-std::expm1(-e));
        else
            log_out = std::log(2.0 * pi / (2.0 - a)) + std::log(-std::expm1(e));
    }
    const double hi = std::max(log_in, log_out);
    const double log_total = hi + std::log(std::exp(log_in - hi) + std::exp(log_out - hi));
    return alpha / 2.0 * dirichlet - m * log_total;
}

enum class SlopeRegime { LambdaOnePositive, LambdaTwo };

struct SlopeEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    double predicted = 0.0;  ///< coefficient of ln psi expected for this regime and mode
    SlopeRegime regime = SlopeRegime::LambdaTwo;
    std::vector<std::pair<double, double>> samples;  ///< (ln psi, f_m) for every psi, fitted or not
};

/// Least-squares slope of f_m(rho^psi, w^psi) against ln psi, skipping the two smallest psi.
template <typename Scalar>
SlopeEstimate slope_estimate(const BlowdownFamily<Scalar>& fam, const Params& params)
{
    fam.validate();
    const Params p = validate_params(params);
    if (fam.psis.size() < 4)
        throw Error(ErrorCode::TooFewPoints, "slope fit needs at least four psi values");
    const double m1 = static_cast<double>(integrate_disk(fam.base_rho));
    const auto lam = lambda_val(m1, p.m2, p);

    SlopeEstimate est;
    est.regime = lam.lambda1 > 0.0 ? SlopeRegime::LambdaOnePositive : SlopeRegime::LambdaTwo;
    est.predicted = blowdown_coefficient(m1, p.m2, p) * (fam.mode == BlowdownMode::Half ? 0.5 : 1.0);
    est.samples.resize(fam.psis.size());
    parallel_for(fam.psis.size(), [&](std::size_t k) {
        const double psi = fam.psis[k];
        const auto rho = blowdown_density(fam.base_rho, psi, fam.mode);
        const auto w = blowdown_potential(fam.base_w, p.m2, psi, fam.mode);
        est.samples[k] = {std::log(psi), static_cast<double>(f_m(rho, w, p).total)};
    });

    const std::size_t first = 2;
    const double count = static_cast<double>(est.samples.size() - first);
    double sx = 0.0, sy = 0.0;
    for (std::size_t k = first; k < est.samples.size(); ++k) {
        sx += est.samples[k].first;
        sy += est.samples[k].second;
    }
    const double mx = sx / count, my = sy / count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = first; k < est.samples.size(); ++k) {
        const double dx = est.samples[k].first - mx;
        sxx += dx * dx;
        sxy += dx * (est.samples[k].second - my);
    }
    est.slope = sxy / sxx;
    est.intercept = my - est.slope * mx;
    return est;
}

} // namespace chemo
