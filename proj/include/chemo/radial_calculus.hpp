#pragma once

#include "chemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>

namespace chemo {

/// Disk quadrature weights: sum_i w_i f(r_i) ~ 2 pi int_0^1 f(r) r dr. They sum to pi.
template <typename Scalar>
const Vec<Scalar>& weights(const RadialGrid<Scalar>& grid)
{
    return grid.weights();
}

template <typename Scalar>
Scalar integrate_disk(const RadialField<Scalar>& f)
{
    return f.grid().weights().dot(f.values());
}

template <typename Scalar>
Scalar integrate_disk(const RadialGrid<Scalar>& grid, const Vec<Scalar>& f)
{
    return grid.weights().dot(f);
}

/// Finite-volume radial Laplacian (1/r)(r u_r)_r at every node but the last.
///
/// At r = 0 it reduces to 4 (u_1 - u_0) / r_1^2, the 2 u_rr regularity limit. It is exact
/// for quadratics on any grid. The entry at r = 1 is left at zero (boundary node).
template <typename Scalar>
Vec<Scalar> laplacian(const RadialGrid<Scalar>& grid, const Vec<Scalar>& u)
{
    const Eigen::Index n = grid.cells();
    const auto& a = grid.conductance();
    const auto& V = grid.volumes();
    Vec<Scalar> out = Vec<Scalar>::Zero(n + 1);
    Scalar left = Scalar(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar right = a[i] * (u[i + 1] - u[i]);
        out[i] = (right - left) / V[i];
        left = right;
    }
    return out;
}

template <typename Scalar>
Vec<Scalar> laplacian(const RadialField<Scalar>& u)
{
    return laplacian(u.grid(), u.values());
}

/// Solves -Lu = rho, u(1) = 0 for the discrete Laplacian above, exactly.
///
/// First the dual-cell mass inside each face, then the outer sum of face fluxes.
/// Works for signed rho; for rho >= 0 the result is nonnegative and nonincreasing.
template <typename Scalar>
Vec<Scalar> inv_laplacian(const RadialGrid<Scalar>& grid, const Vec<Scalar>& rho)
{
    const Eigen::Index n = grid.cells();
    const auto& a = grid.conductance();
    const auto& V = grid.volumes();
    Vec<Scalar> inner(n);
    Scalar m = Scalar(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        m += V[i] * rho[i];
        inner[i] = m;
    }
    Vec<Scalar> u(n + 1);
    u[n] = Scalar(0);
    for (Eigen::Index i = n - 1; i >= 0; --i)
        u[i] = u[i + 1] + inner[i] / a[i];
    return u;
}

template <typename Scalar>
RadialField<Scalar> inv_laplacian(const RadialField<Scalar>& rho)
{
    return RadialField<Scalar>(rho.grid(), inv_laplacian(rho.grid(), rho.values()), FieldKind::Potential);
}

/// u_r(1) of a potential whose source at r = 1 is `edge_source` (the value of -Lu there).
///
/// Flux balance over the last half cell. For u = inv_laplacian(rho) with edge_source = rho(1)
/// this is -M / 2 pi to round-off.
template <typename Scalar>
Scalar boundary_slope(const RadialField<Scalar>& u, Scalar edge_source)
{
    const auto& g = u.grid();
    const Eigen::Index n = g.cells();
    return g.conductance()[n - 1] * (u[n] - u[n - 1]) - g.volumes()[n] * edge_source;
}

/// u_r(1) with the edge source extrapolated from the last interior node.
template <typename Scalar>
Scalar boundary_slope(const RadialField<Scalar>& u)
{
    const auto lap = laplacian(u);
    return boundary_slope(u, -lap[u.grid().cells() - 1]);
}

/// Potential (m / 2 pi) ln(1/r) generated at radius r by a radial mass m supported inside r.
template <typename Scalar>
Scalar exterior_potential(Scalar m_inner, Scalar r)
{
    if (!(r > Scalar(0)) || r > Scalar(1))
        throw Error(ErrorCode::BadRadius, "exterior potential needs 0 < r <= 1");
    using std::log;
    return -m_inner / (Scalar(2) * kPi<Scalar>) * log(r);
}

/// int rho ln rho over the disk, with 0 ln 0 = 0.
template <typename Scalar>
Scalar entropy(const RadialField<Scalar>& rho)
{
    using std::log;
    const auto& w = rho.grid().weights();
    Scalar s = Scalar(0);
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
        const Scalar v = rho[i];
        if (v < Scalar(0))
            throw Error(ErrorCode::NegativeDensity, "entropy of a signed field");
        if (v > Scalar(0))
            s += w[i] * v * log(v);
    }
    return s;
}

/// int grad u . grad v over the disk, from face differences.
template <typename Scalar>
Scalar dirichlet_cross(const RadialField<Scalar>& u, const RadialField<Scalar>& v)
{
    require_same_grid(u.grid(), v.grid());
    const auto& a = u.grid().conductance();
    const Eigen::Index n = u.grid().cells();
    Scalar s = Scalar(0);
    for (Eigen::Index i = 0; i < n; ++i)
        s += a[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    return Scalar(2) * kPi<Scalar> * s;
}

template <typename Scalar>
Scalar dirichlet_energy(const RadialField<Scalar>& w)
{
    return dirichlet_cross(w, w);
}

/// The pairing (rho, Delta^{-1} rho) = -int rho u with u = inv_laplacian(rho); it is <= 0.
template <typename Scalar>
Scalar interaction_energy(const RadialField<Scalar>& rho)
{
    const Vec<Scalar> u = inv_laplacian(rho.grid(), rho.values());
    return -rho.grid().weights().dot(rho.values().cwiseProduct(u));
}

/// (f, Delta^{-1} g) = -int f inv_laplacian(g).
template <typename Scalar>
Scalar pairing(const RadialField<Scalar>& f, const RadialField<Scalar>& g)
{
    require_same_grid(f.grid(), g.grid());
    const Vec<Scalar> u = inv_laplacian(g.grid(), g.values());
    return -f.grid().weights().dot(f.values().cwiseProduct(u));
}

/// ln int e^{phi} over the disk, factoring out max(phi) first.
template <typename Scalar>
Scalar log_partition(const RadialGrid<Scalar>& grid, const Vec<Scalar>& exponent)
{
    using std::exp;
    using std::log;
    const Scalar top = exponent.maxCoeff();
    Scalar s = Scalar(0);
    const auto& w = grid.weights();
    for (Eigen::Index i = 0; i < exponent.size(); ++i)
        s += w[i] * exp(exponent[i] - top);
    return top + log(s);
}

/// Normalized Gibbs density m e^{phi} / int e^{phi}, together with ln int e^{phi}.
template <typename Scalar>
std::pair<Vec<Scalar>, Scalar> gibbs(const RadialGrid<Scalar>& grid, const Vec<Scalar>& exponent, Scalar m)
{
    const Scalar lp = log_partition(grid, exponent);
    Vec<Scalar> rho = (exponent.array() - lp).exp().matrix() * m;
    return {std::move(rho), lp};
}

template <typename Scalar>
struct Term {
    Scalar coef;
    const RadialField<Scalar>* field;
};

/// ln int exp(sum_k coef_k f_k) over the disk. The empty sum gives ln pi.
template <typename Scalar>
Scalar log_partition(const RadialGrid<Scalar>& grid, std::span<const Term<Scalar>> terms)
{
    Vec<Scalar> phi = Vec<Scalar>::Zero(grid.size());
    for (const auto& t : terms) {
        require_same_grid(grid, t.field->grid());
        phi += t.coef * t.field->values();
    }
    return log_partition(grid, phi);
}

template <typename Scalar>
Scalar log_partition(std::initializer_list<Term<Scalar>> terms)
{
    if (terms.size() == 0)
        return std::log(kPi<Scalar>);
    const auto& grid = terms.begin()->field->grid();
    return log_partition(grid, std::span<const Term<Scalar>>(terms.begin(), terms.size()));
}

} // namespace chemo
