#include "chemo/radial_calculus.hpp"

#include <doctest.h>

#include <random>

using namespace chemo;

namespace {

// Composite Simpson on [0, 1] for 2 pi int f(r) r dr, independent of the grid weights.
template <typename F>
double disk_simpson(F f, int n = 20000)
{
    const double h = 1.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f(r) * r;
    }
    return 2.0 * kPi<double> * s * h / 3.0;
}

} // namespace

TEST_CASE("make_grid rejects coarse grids and builds uniform and graded nodes")
{
    CHECK_THROWS_AS(make_grid(4), Error);
    try {
        make_grid(4);
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooCoarse);
    }
    const auto u = make_grid(8);
    REQUIRE(u.size() == 9);
    for (int i = 0; i <= 8; ++i)
        CHECK(u[i] == i / 8.0);
    const auto g = make_grid(8, GridKind::Graded);
    CHECK(g[4] == 0.25);
}

TEST_CASE("grid invariants hold for both kinds")
{
    for (int n : {8, 9, 33, 100, 4096}) {
        for (auto kind : {GridKind::Uniform, GridKind::Graded}) {
            const auto g = make_grid(n, kind);
            CHECK(g[0] == 0.0);
            CHECK(g[n] == 1.0);
            for (int i = 1; i <= n; ++i)
                CHECK(g[i] > g[i - 1]);
            CHECK((g.weights().array() >= 0.0).all());
            CHECK(g.weights().sum() == doctest::Approx(kPi<double>).epsilon(1e-12));
        }
    }
}

TEST_CASE("from_nodes rejects bad node sets")
{
    Vec<double> bad(3);
    bad << 0.0, 0.5, 0.9;
    CHECK_THROWS_AS(RadialGrid<double>::from_nodes(bad), Error);
    bad << 0.0, 0.6, 0.5;
    CHECK_THROWS_AS(RadialGrid<double>::from_nodes(bad), Error);
}

TEST_CASE("validate_params")
{
    CHECK_NOTHROW(validate_params({1, 1, 1, -1, 1, 0}));
    CHECK_NOTHROW(validate_params({0, 0, 0, 1, 1, 2}));
    auto code_of = [](Params p) {
        try {
            validate_params(p);
        }
        catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of({-1, 1, 1, -1, 1, 0}) == ErrorCode::NegativeConstant);
    CHECK(code_of({1, -0.1, 1, -1, 1, 0}) == ErrorCode::NegativeConstant);
    CHECK(code_of({1, 1, 1, -1, 0, 0}) == ErrorCode::NonpositiveMass);
    CHECK(code_of({1, 1, 1, -1, 1, -1}) == ErrorCode::NonpositiveMass);
    CHECK(code_of({1, 1, 1, 0, 1, 0}) == ErrorCode::BadTheta);
    CHECK(code_of({1, 1, 1, 2, 1, 0}) == ErrorCode::BadTheta);
}

TEST_CASE("field kinds are checked")
{
    const auto g = make_grid(16);
    Vec<double> v = Vec<double>::Ones(g.size());
    v[3] = -1e-3;
    CHECK_THROWS_AS(RadialField<double>(g, v, FieldKind::Density), Error);
    CHECK_THROWS_AS(RadialField<double>(g, Vec<double>::Ones(g.size()), FieldKind::Potential), Error);
    Vec<double> p = Vec<double>::Ones(g.size());
    p[16] = 1e-15;
    const RadialField<double> pot(g, p, FieldKind::Potential);
    CHECK(pot[16] == 0.0);
    CHECK_THROWS_AS(RadialField<double>(g, Vec<double>::Ones(5)), Error);
}

TEST_CASE("project_density examples")
{
    const double pi = kPi<double>;
    const auto g = make_grid(4096);
    const auto one = RadialField<double>::from_function(g, [](double) { return 1.0; });
    const auto p1 = project_density(one, 1.0);
    CHECK(p1[0] == doctest::Approx(1.0 / pi).epsilon(1e-14));
    CHECK(p1[4096] == doctest::Approx(1.0 / pi).epsilon(1e-14));

    const auto again = project_density(p1, 1.0);
    CHECK((again.values() - p1.values()).cwiseAbs().maxCoeff() < 1e-15);

    // 1 - r^2 has disk integral pi/2, so mass 2 needs c = 4/pi.
    const auto f = RadialField<double>::from_function(g, [](double r) { return 1.0 - r * r; });
    const auto pf = project_density(f, 2.0);
    const double c = pf[0] / f[0];
    const double oracle = 2.0 / disk_simpson([](double r) { return 1.0 - r * r; });
    CHECK(oracle == doctest::Approx(4.0 / pi).epsilon(1e-12));
    CHECK(c == doctest::Approx(oracle).epsilon(1e-7));

    CHECK_THROWS_AS(project_density(RadialField<double>::zero(g), 1.0), Error);
    try {
        project_density(RadialField<double>::zero(g), 1.0);
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDensity);
    }
}

TEST_CASE("project_density is idempotent on random fields")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const auto g = make_grid(257, GridKind::Graded);
    for (int trial = 0; trial < 20; ++trial) {
        Vec<double> v(g.size());
        for (auto& x : v)
            x = u(rng);
        const RadialField<double> f(g, v);
        const double m = 0.1 + u(rng) * 10.0;
        const auto once = project_density(f, m);
        const auto twice = project_density(once, m);
        CHECK((once.values() - twice.values()).cwiseAbs().maxCoeff() <= 1e-14 * once.values().cwiseAbs().maxCoeff());
        CHECK(integrate_disk(once) == doctest::Approx(m).epsilon(1e-13));
    }
}

TEST_CASE("flow_case picks the limit system")
{
    FlowConfig c;
    CHECK(flow_case(c) == FlowCase::ParabolicEllipticTwo);
    c.delta2 = 1;
    CHECK(flow_case(c) == FlowCase::ParabolicEllipticFull);
    c = {};
    c.delta1 = 0;
    c.epsilon = 1;
    CHECK(flow_case(c) == FlowCase::Exponential);
    c.epsilon = 0.5;
    CHECK_THROWS_AS(flow_case(c), Error);
    c = {};
    c.dt = 0;
    CHECK_THROWS_AS(flow_case(c), Error);
}
