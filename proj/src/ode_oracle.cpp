#include "chemo/ode_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace chemo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxStep = 2e-3;

double blowdown_time(double psi) { return -std::log(psi); }

double match_lhs(double e, double gamma, double big_l)
{
    const double k = std::sqrt(2.0 * e);
    return k / std::tanh(k * gamma * big_l / 2.0);
}

} // namespace

void validate_lemw(const LemwParams& lp)
{
    if (!(lp.gamma > 0.0))
        throw Error(ErrorCode::HypothesisViolated, "gamma must be positive");
    if (!(lp.m2 > 0.0))
        throw Error(ErrorCode::HypothesisViolated, "m2 must be positive");
    if (!(lp.psi >= 1e-12) || !(lp.psi < 1.0))
        throw Error(ErrorCode::InvalidArgument, "psi must lie in [1e-12, 1)");
    if (!((lp.beta_m - lp.gamma * lp.m2) / kTwoPi - 2.0 > 0.0))
        throw Error(ErrorCode::HypothesisViolated, "need (beta M - gamma M2)/2pi - 2 > 0");
}

double vbar_shift(const LemwParams& lp) { return (lp.beta_m / kTwoPi - 2.0) / lp.gamma; }

double matching_target(const LemwParams& lp)
{
    return ((lp.beta_m - lp.gamma * lp.m2) / kTwoPi - 2.0) / lp.gamma;
}

double exact_vbar(double e, double gamma, double psi, double t)
{
    if (!(t < blowdown_time(psi)))
        throw Error(ErrorCode::AtBlowdown, "t must be below ln(1/psi)");
    const double k = std::sqrt(2.0 * e);
    const double s = t + std::log(psi);
    return -std::log(4.0 * e * gamma) / gamma - k * s + 2.0 / gamma * std::log(-std::expm1(k * gamma * s));
}

double exact_vbar_t(double e, double gamma, double psi, double t)
{
    if (!(t < blowdown_time(psi)))
        throw Error(ErrorCode::AtBlowdown, "t must be below ln(1/psi)");
    const double k = std::sqrt(2.0 * e);
    const double x = k * gamma * (t + std::log(psi));
    // -k (1 + e^x) / (1 - e^x)
    return -k * (1.0 + std::exp(x)) / -std::expm1(x);
}

double vbar_energy(double vbar, double vbar_t, double gamma)
{
    return 0.5 * vbar_t * vbar_t - std::exp(-gamma * vbar) / gamma;
}

double match_energy(const LemwParams& lp)
{
    validate_lemw(lp);
    const double c = matching_target(lp);
    const double big_l = blowdown_time(lp.psi);
    double lo = 0.0;
    double hi = 2.0 * c * c;
    // lhs decreases to 2/(gamma L) as E -> 0, and exceeds c at E = 2c^2
    if (!(2.0 / (lp.gamma * big_l) < c) || !(match_lhs(hi, lp.gamma, big_l) > c))
        throw Error(ErrorCode::NoRoot, "matching relation has no root in (0, 2c^2]");
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double f = match_lhs(mid, lp.gamma, big_l) - c;
        if (std::abs(f) <= 1e-12 * c)
            return mid;
        (f > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

VeqTrajectory integrate_veq_from(const LemwParams& lp, double v1, int n)
{
    if (!(lp.gamma >= 0.0) || !(lp.psi > 0.0) || !(lp.psi < 1.0))
        throw Error(ErrorCode::InvalidArgument, "need gamma >= 0 and psi in (0, 1)");
    if (n < 1000)
        throw Error(ErrorCode::InvalidArgument, "integrate_veq needs n >= 1000");
    const double big_l = blowdown_time(lp.psi);
    const double half = big_l / 2.0;
    const double end = big_l - 1.0;
    if (!(end > half))
        throw Error(ErrorCode::InvalidArgument, "psi too close to 1 (need ln(1/psi) > 2)");

    const double drift = lp.beta_m / kTwoPi - 2.0;
    const double g = lp.gamma;
    using State = std::array<double, 3>;  // v, v_t, int v_t^2
    auto rhs = [&](double t, const State& y) {
        return State{y[1], -std::exp(drift * t - g * y[0]), y[1] * y[1]};
    };

    const long want = std::max<long>(n, static_cast<long>(std::ceil(end / kMaxStep)));
    const long n1 = std::max<long>(1, static_cast<long>(std::ceil(want * half / end)));
    const long n2 = std::max<long>(1, want - n1);

    VeqTrajectory tr;
    tr.t.reserve(n1 + n2 + 1);
    State y{v1, lp.m2 / kTwoPi, 0.0};
    double t = 0.0;
    auto record = [&] {
        tr.t.push_back(t);
        tr.r.push_back(std::exp(-t));
        tr.v.push_back(y[0]);
        tr.vt.push_back(y[1]);
    };
    const double shift = g > 0.0 ? drift / g : 0.0;
    const double e0 = g > 0.0 ? vbar_energy(y[0], y[1] - shift, g) : 0.0;
    record();

    auto segment = [&](double t0, double t1, long steps) {
        const double h = (t1 - t0) / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) {
            const double tk = t0 + h * static_cast<double>(k);
            const State k1 = rhs(tk, y);
            State tmp;
            for (int j = 0; j < 3; ++j)
                tmp[j] = y[j] + 0.5 * h * k1[j];
            const State k2 = rhs(tk + 0.5 * h, tmp);
            for (int j = 0; j < 3; ++j)
                tmp[j] = y[j] + 0.5 * h * k2[j];
            const State k3 = rhs(tk + 0.5 * h, tmp);
            for (int j = 0; j < 3; ++j)
                tmp[j] = y[j] + h * k3[j];
            const State k4 = rhs(tk + h, tmp);
            for (int j = 0; j < 3; ++j)
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            t = k + 1 == steps ? t1 : tk + h;
            if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
                throw Error(ErrorCode::SolverDiverged, "trajectory left the finite range");
            if (y[1] < 0.0)
                throw Error(ErrorCode::MonotonicityLost,
                            "v_r > 0 at r = " + std::to_string(std::exp(-t)));
            if (g > 0.0)
                tr.energy_drift = std::max(tr.energy_drift, std::abs(vbar_energy(y[0] - shift * t, y[1] - shift, g) - e0));
            record();
        }
    };
    segment(0.0, half, n1);
    tr.half_integral = y[2];
    segment(half, end, n2);
    return tr;
}

VeqTrajectory integrate_veq(const LemwParams& lp, int n)
{
    const double e = match_energy(lp);
    return integrate_veq_from(lp, exact_vbar(e, lp.gamma, lp.psi, 0.0), n);
}

double asymptotic_ratio(const LemwParams& lp, int n)
{
    const auto tr = integrate_veq(lp, n);
    return tr.half_integral / (blowdown_time(lp.psi) / 2.0);
}

} // namespace chemo
