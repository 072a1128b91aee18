#include "chemo/scaling.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chemo;

namespace {

const double pi = kPi<double>;

template <typename F>
double disk_simpson(F f, double lo = 0.0, double hi = 1.0, int n = 20000)
{
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f(r) * r;
    }
    return 2.0 * pi * s * h / 3.0;
}

RadialField<double> smooth_density(const RadialGrid<double>& g, double m, double shift = 0.0)
{
    return project_density(RadialField<double>::from_function(
                               g, [&](double r) { return std::exp(-3.0 * r * r) * (1.2 + std::cos(2.0 * r + shift)); }),
                           m);
}

} // namespace

TEST_CASE("integrate_disk examples")
{
    const auto g = make_grid(4096);
    CHECK(integrate_disk(RadialField<double>::from_function(g, [](double) { return 1.0; })) ==
          doctest::Approx(pi).epsilon(1e-14));
    CHECK(integrate_disk(RadialField<double>::from_function(g, [](double) { return 1.0 / pi; })) ==
          doctest::Approx(1.0).epsilon(1e-14));
    const double q = integrate_disk(RadialField<double>::from_function(g, [](double r) { return 1 - r * r; }));
    CHECK(q == doctest::Approx(disk_simpson([](double r) { return 1 - r * r; })).epsilon(1e-7));
    CHECK(q == doctest::Approx(pi / 2).epsilon(1e-7));
}

TEST_CASE("quadrature converges at second order")
{
    auto f = [](double r) { return std::exp(r * r) * std::cos(3.0 * r); };
    const double exact = disk_simpson(f, 0.0, 1.0, 200000);
    double err[3];
    int k = 0;
    for (int n : {256, 512, 1024})
        err[k++] = std::abs(integrate_disk(RadialField<double>::from_function(make_grid(n), f)) - exact);
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("laplacian is exact on quadratics")
{
    for (auto kind : {GridKind::Uniform, GridKind::Graded}) {
        const auto g = make_grid(64, kind);
        const auto u = RadialField<double>::from_function(g, [](double r) { return r * r; });
        const Vec<double> lap = laplacian(u);
        for (Eigen::Index i = 0; i < g.cells(); ++i)
            CHECK(lap[i] == doctest::Approx(4.0).epsilon(1e-11));
    }
}

TEST_CASE("inv_laplacian examples")
{
    const double m = 3.0;
    for (auto kind : {GridKind::Uniform, GridKind::Graded}) {
        const auto g = make_grid(1000, kind);
        const auto rho = RadialField<double>::from_function(g, [&](double) { return m / pi; }, FieldKind::Density);
        const auto u = inv_laplacian(rho);
        CHECK(u.kind() == FieldKind::Potential);
        CHECK(u[g.cells()] == 0.0);
        CHECK(u[0] == doctest::Approx(m / (4 * pi)).epsilon(1e-13));
        for (Eigen::Index i = 0; i < g.size(); i += 37)
            CHECK(u[i] == doctest::Approx(m * (1 - g[i] * g[i]) / (4 * pi)).epsilon(1e-12));
    }
    const auto g = make_grid(64);
    CHECK(inv_laplacian(RadialField<double>::zero(g, FieldKind::Density)).values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inv_laplacian is the inverse of laplacian and keeps the flux")
{
    const auto g = make_grid(4096);
    const auto rho = smooth_density(g, 5.0);
    const auto u = inv_laplacian(rho);
    const Vec<double> lap = laplacian(u);
    for (Eigen::Index i = 0; i < g.cells(); ++i)
        CHECK(std::abs(lap[i] + rho[i]) < 1e-8);
    CHECK(boundary_slope(u, rho[g.cells()]) == doctest::Approx(-5.0 / (2 * pi)).epsilon(1e-13));
    // one-sided difference oracle, first order
    const double h = 1.0 / 4096;
    const double fd = (u[4096] - u[4095]) / h;
    CHECK(std::abs(fd + 5.0 / (2 * pi)) < 1e-3);
    CHECK(std::abs(boundary_slope(u) + 5.0 / (2 * pi)) < 1e-6);
    CHECK((u.values().array() >= 0.0).all());
}

TEST_CASE("inv_laplacian is self-adjoint and matches the Dirichlet energy")
{
    const auto g = make_grid(4096);
    const auto f = smooth_density(g, 2.0, 0.0);
    const auto h = smooth_density(g, 7.0, 1.3);
    CHECK(pairing(f, h) == doctest::Approx(pairing(h, f)).epsilon(1e-8));
    CHECK(-interaction_energy(f) == doctest::Approx(dirichlet_energy(inv_laplacian(f))).epsilon(1e-6));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Vec<double> a(g.size()), b(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        a[i] = U(rng);
        b[i] = U(rng);
    }
    const RadialField<double> fa(g, a), fb(g, b);
    CHECK(pairing(fa, fb) == doctest::Approx(pairing(fb, fa)).epsilon(1e-10));
}

TEST_CASE("exterior_potential")
{
    CHECK(exterior_potential(2 * pi, 1.0) == 0.0);
    CHECK(exterior_potential(2 * pi, std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(exterior_potential(1.0, 0.5) == doctest::Approx(0.110318).epsilon(1e-6));
    CHECK_THROWS_AS(exterior_potential(1.0, 0.0), Error);
    CHECK_THROWS_AS(exterior_potential(1.0, 1.5), Error);

    const auto g = make_grid(4096);
    const auto rho = RadialField<double>::from_function(
        g, [](double r) { return r < 0.4 ? std::pow(1 - r * r / 0.16, 2) : 0.0; }, FieldKind::Density);
    const double m = integrate_disk(rho);
    const auto u = inv_laplacian(rho);
    for (Eigen::Index i = 1700; i <= 4096; i += 99)
        CHECK(u[i] == doctest::Approx(exterior_potential(m, g[i])).epsilon(1e-6));
}

TEST_CASE("entropy")
{
    const auto g = make_grid(512);
    const auto c = RadialField<double>::from_function(g, [](double) { return 1.0 / pi; }, FieldKind::Density);
    CHECK(entropy(c) == doctest::Approx(-std::log(pi)).epsilon(1e-13));
    const auto c3 = RadialField<double>::from_function(g, [](double) { return 3.0 / pi; }, FieldKind::Density);
    CHECK(entropy(c3) == doctest::Approx(3.0 * std::log(3.0 / pi)).epsilon(1e-13));
    CHECK(entropy(RadialField<double>::zero(g, FieldKind::Density)) == 0.0);
    Vec<double> s = Vec<double>::Ones(g.size());
    s[5] = -1.0;
    CHECK_THROWS_AS(entropy(RadialField<double>(g, s)), Error);

    const auto bd = blowdown_density(c, 2.0, BlowdownMode::Full);
    CHECK(integrate_disk(bd) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(entropy(bd) == doctest::Approx(2 * std::log(2.0) - std::log(pi)).epsilon(1e-9));
}

TEST_CASE("dirichlet_energy examples")
{
    const double m = 2.5;
    const auto g = make_grid(4096);
    CHECK(dirichlet_energy(RadialField<double>::zero(g, FieldKind::Potential)) == 0.0);
    const auto w = RadialField<double>::from_function(g, [&](double r) { return m * (1 - r * r) / (4 * pi); },
                                                      FieldKind::Potential);
    const double oracle = disk_simpson([&](double r) { return std::pow(m * r / (2 * pi), 2); });
    CHECK(oracle == doctest::Approx(m * m / (8 * pi)).epsilon(1e-12));
    CHECK(dirichlet_energy(w) == doctest::Approx(oracle).epsilon(1e-6));

    // (m/2pi) ln(1/r) on [1/psi, 1], constant inside
    const double psi = 1000.0;
    const auto ext = blowdown_potential(RadialField<double>::zero(g, FieldKind::Potential), m, psi);
    CHECK(dirichlet_energy(ext) == doctest::Approx(m * m / (2 * pi) * std::log(psi)).epsilon(1e-6));
}

TEST_CASE("interaction_energy examples")
{
    const auto g = make_grid(4096);
    const auto c = RadialField<double>::from_function(g, [](double) { return 1.0 / pi; }, FieldKind::Density);
    CHECK(interaction_energy(c) == doctest::Approx(-1.0 / (8 * pi)).epsilon(1e-7));
    CHECK(interaction_energy(RadialField<double>::zero(g, FieldKind::Density)) == 0.0);
    const auto rho = smooth_density(g, 4.0);
    const auto bd = blowdown_density(rho, 64.0, BlowdownMode::Full);
    CHECK(interaction_energy(bd) - interaction_energy(rho) ==
          doctest::Approx(-16.0 / (2 * pi) * std::log(64.0)).epsilon(1e-6));
}

TEST_CASE("log_partition examples")
{
    const auto g = make_grid(256);
    CHECK(log_partition<double>({}) == doctest::Approx(std::log(pi)).epsilon(1e-15));
    const auto w = RadialField<double>::from_function(g, [](double) { return 2.5; });
    CHECK(log_partition<double>({{1.0, &w}}) == doctest::Approx(2.5 + std::log(pi)).epsilon(1e-14));

    // shift invariance
    const auto f = RadialField<double>::from_function(g, [](double r) { return std::sin(4 * r); });
    const auto f7 = f.with_values(f.values().array() + 7.0);
    CHECK(log_partition<double>({{1.0, &f7}}) == doctest::Approx(log_partition<double>({{1.0, &f}}) + 7.0).epsilon(1e-14));

    // no overflow for huge exponents
    const auto big = f.with_values(f.values() * 1e4);
    CHECK(std::isfinite(log_partition<double>({{1.0, &big}})));

    const auto h = RadialField<double>::from_function(g, [](double) { return 3.0; }, FieldKind::Density);
    const auto other = RadialField<double>::zero(make_grid(128));
    CHECK_THROWS_AS((log_partition<double>({{1.0, &h}, {1.0, &other}})), Error);
}

TEST_CASE("log_partition of an exterior potential scales like psi^{beta M/2pi - 2}")
{
    const double m = 30.0, beta = 1.0;
    const double b = beta * m / (2 * pi);
    const auto g = make_grid(4096);
    for (double psi : {16.0, 256.0, 4096.0}) {
        const auto u = blowdown_potential(RadialField<double>::zero(g, FieldKind::Potential), m, psi);
        const double measured = log_partition<double>({{beta, &u}});
        const double exact = std::log(pi * std::pow(psi, b - 2) + 2 * pi * (std::pow(psi, b - 2) - 1) / (b - 2));
        CHECK(measured == doctest::Approx(exact).epsilon(1e-6));
    }
}
