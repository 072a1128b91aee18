#include "chemo/functionals.hpp"
#include "chemo/ode_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace chemo;

namespace {

const double pi = kPi<double>;

ErrorCode code_of(auto&& f)
{
    try {
        f();
    }
    catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

LemwParams standard(double psi) { return LemwParams{1.0, 10 * pi, 2 * pi, psi}; }

} // namespace

TEST_CASE("exact_vbar solves the autonomous equation")
{
    const double e = 0.5, gamma = 1.0, psi = std::exp(-10.0);
    const double h = 1e-3;
    for (int k = 0; k <= 9; ++k) {
        const double t = k;
        auto v = [&](double s) { return exact_vbar(e, gamma, psi, s); };
        // fourth-order central second difference
        const double vtt = (-v(t + 2 * h) + 16 * v(t + h) - 30 * v(t) + 16 * v(t - h) - v(t - 2 * h)) / (12 * h * h);
        CHECK(std::abs(vtt + std::exp(-gamma * v(t))) < 1e-7);
        CHECK(vbar_energy(v(t), exact_vbar_t(e, gamma, psi, t), gamma) == doctest::Approx(e).epsilon(1e-12));
        const double vt = (-v(t + 2 * h) + 8 * v(t + h) - 8 * v(t - h) + v(t - 2 * h)) / (12 * h);
        CHECK(exact_vbar_t(e, gamma, psi, t) == doctest::Approx(vt).epsilon(1e-9));
    }
    CHECK(exact_vbar(e, gamma, psi, 10.0 - 1e-6) < exact_vbar(e, gamma, psi, 9.9));
    CHECK(exact_vbar(e, gamma, psi, 10.0 - 1e-12) < -40.0);
    CHECK(code_of([&] { exact_vbar(e, gamma, psi, 10.0); }) == ErrorCode::AtBlowdown);
    CHECK(code_of([&] { exact_vbar(e, gamma, psi, 11.0); }) == ErrorCode::AtBlowdown);
}

TEST_CASE("match_energy")
{
    const double target = matching_target(standard(1e-8));
    CHECK(target == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::sqrt(2 * match_energy(standard(1e-8))) == doctest::Approx(2.0).epsilon(1e-3));
    double prev = 0.0;
    for (double psi : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double k = std::sqrt(2 * match_energy(standard(psi)));
        CHECK(k <= target);
        CHECK(k > prev);
        prev = k;
    }
    CHECK(code_of([] { match_energy(LemwParams{1.0, 4 * pi, 2 * pi, 1e-6}); }) == ErrorCode::HypothesisViolated);
    CHECK(code_of([] { match_energy(LemwParams{0.0, 10 * pi, 2 * pi, 1e-6}); }) == ErrorCode::HypothesisViolated);
    CHECK(code_of([] { match_energy(LemwParams{1.0, 10 * pi, 2 * pi, 1e-13}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("direct integration agrees with the exact route")
{
    for (double psi : {1e-4, 1e-6, 1e-8}) {
        const auto lp = standard(psi);
        const double e = match_energy(lp);
        const double c0 = vbar_shift(lp);
        const auto tr = integrate_veq(lp);
        double worst = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            worst = std::max(worst, std::abs(tr.v[i] - (exact_vbar(e, lp.gamma, psi, tr.t[i]) + c0 * tr.t[i])));
        CHECK(worst < 1e-8);
        CHECK(tr.energy_drift < 1e-10);
        CHECK(tr.t.back() == doctest::Approx(std::log(1 / psi) - 1).epsilon(1e-12));
        for (std::size_t i = 1; i < tr.t.size(); ++i)
            CHECK(tr.vt[i] >= 0.0);
    }
}

TEST_CASE("r v_r approaches the boundary flux on the outer half")
{
    const auto lp = standard(1e-6);
    const auto tr = integrate_veq(lp);
    const double half = std::log(1 / std::sqrt(lp.psi));
    for (std::size_t i = 0; i < tr.t.size() && tr.t[i] <= half + 1e-12; i += 50)
        CHECK(tr.vt[i] == doctest::Approx(lp.m2 / (2 * pi)).epsilon(0.02));
}

TEST_CASE("asymptotic_ratio converges monotonically to (M2/2pi)^2")
{
    double prev_err = INFINITY;
    for (double psi : {1e-4, 1e-6, 1e-8}) {
        const double err = std::abs(asymptotic_ratio(standard(psi)) - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(asymptotic_ratio(standard(1e-6)) == doctest::Approx(1.0).epsilon(0.02));

    // doubled m2 quadruples the limit; beta M raised so the hypothesis still holds
    const LemwParams doubled{1.0, 14 * pi, 4 * pi, 1e-8};
    CHECK(asymptotic_ratio(doubled) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("gamma = 0 loses monotonicity")
{
    CHECK(code_of([] { integrate_veq_from(LemwParams{0.0, 10 * pi, 2 * pi, 1e-6}, 0.0, 4000); }) ==
          ErrorCode::MonotonicityLost);
    CHECK(code_of([] { integrate_veq(LemwParams{0.0, 10 * pi, 2 * pi, 1e-6}); }) == ErrorCode::HypothesisViolated);
    CHECK(code_of([] { integrate_veq(standard(1e-6), 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("minimize_w on the exterior annulus is a solution of the radial equation")
{
    // density supported in r < R, so u = (M/2pi) ln(1/r) on [R, 1]
    const double R = 0.2, m1 = 10 * pi, m2 = 2 * pi;
    const Params p{1, 1, 1, -1, m1, m2};
    const auto g = make_grid(8192);
    const auto rho = project_density(
        RadialField<double>::from_function(g, [&](double r) { return r < R ? std::pow(1 - r * r / (R * R), 2) : 0.0; }),
        m1);
    const auto w = minimize_w(rho, p, SolveOptions{1e-12, 20000, 1.0});

    // w = v + ln(lambda)/gamma with lambda = M2 / int e^{-gamma w + beta u}
    const Vec<double> u = inv_laplacian(rho).values();
    const double log_lambda = std::log(m2) - log_partition(g, Vec<double>(-p.gamma * w.values() + p.beta * u));
    const LemwParams lp{p.gamma, p.beta * m1, m2, R / std::exp(1.0)};
    const auto tr = integrate_veq_from(lp, -log_lambda / p.gamma, 20000);
    double worst = 0.0;
    for (Eigen::Index i = g.cells(); g[i] >= R; --i) {
        const double t = -std::log(g[i]);
        const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), t);
        if (it == tr.t.end())
            break;
        const std::size_t j = std::max<std::size_t>(1, it - tr.t.begin());
        const double f = (t - tr.t[j - 1]) / (tr.t[j] - tr.t[j - 1]);
        const double v = tr.v[j - 1] + f * (tr.v[j] - tr.v[j - 1]);
        worst = std::max(worst, std::abs(w[i] - log_lambda / p.gamma - v));
    }
    CHECK(worst < 1e-4);
}
