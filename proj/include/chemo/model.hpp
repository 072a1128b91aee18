#pragma once

#include "chemo/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

namespace chemo {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

inline constexpr int kDefaultGridCells = 4096;

/// Physical constants and masses of one model instance.
///
/// theta = -1 is the conflict case (species 1 attracted to species 2, species 2
/// repelled by species 1); theta = +1 is the conflict-free case.
struct Params {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    int theta = -1;
    double m1 = 1.0;
    double m2 = 0.0;
};

inline Params validate_params(Params p)
{
    if (!(p.alpha >= 0.0) || !(p.beta >= 0.0) || !(p.gamma >= 0.0))
        throw Error(ErrorCode::NegativeConstant, "alpha, beta, gamma must be >= 0");
    if (!(p.m1 > 0.0) || !(p.m2 >= 0.0) || !std::isfinite(p.m1) || !std::isfinite(p.m2))
        throw Error(ErrorCode::NonpositiveMass, "need m1 > 0 and m2 >= 0");
    if (p.theta != -1 && p.theta != 1)
        throw Error(ErrorCode::BadTheta, "theta must be -1 or +1, got " + std::to_string(p.theta));
    return p;
}

enum class GridKind { Uniform, Graded };

/// Node radii on [0, 1] plus the finite-volume geometry derived from them.
///
/// Face i sits at the midpoint r_{i+1/2} between nodes i and i+1. Node i owns the
/// dual cell [r_{i-1/2}, r_{i+1/2}] (clipped to [0, 1]); volumes() holds
/// (r_{i+1/2}^2 - r_{i-1/2}^2) / 2 = int r dr over that cell and weights() is
/// 2 pi times it, so that sum_i weights_i f_i approximates the disk integral.
/// conductance_i = r_{i+1/2} / (r_{i+1} - r_i) couples nodes i and i+1.
template <typename Scalar>
class RadialGrid {
public:
    using Vector = Vec<Scalar>;

    static RadialGrid from_nodes(Vector nodes)
    {
        const Eigen::Index size = nodes.size();
        if (size < 2)
            throw Error(ErrorCode::BadGrid, "grid needs at least two nodes");
        if (nodes[0] != Scalar(0) || nodes[size - 1] != Scalar(1))
            throw Error(ErrorCode::BadGrid, "grid endpoints must be exactly 0 and 1");
        for (Eigen::Index i = 1; i < size; ++i)
            if (!(nodes[i] > nodes[i - 1]))
                throw Error(ErrorCode::BadGrid, "grid nodes must be strictly increasing");

        auto d = std::make_shared<Data>();
        const Eigen::Index n = size - 1;
        d->nodes = std::move(nodes);
        d->faces.resize(n);
        d->conductance.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            d->faces[i] = (d->nodes[i] + d->nodes[i + 1]) / Scalar(2);
            d->conductance[i] = d->faces[i] / (d->nodes[i + 1] - d->nodes[i]);
        }
        d->volumes.resize(size);
        d->volumes[0] = d->faces[0] * d->faces[0] / Scalar(2);
        for (Eigen::Index i = 1; i < n; ++i)
            d->volumes[i] = (d->faces[i] - d->faces[i - 1]) * (d->faces[i] + d->faces[i - 1]) / Scalar(2);
        d->volumes[n] = (Scalar(1) - d->faces[n - 1]) * (Scalar(1) + d->faces[n - 1]) / Scalar(2);
        d->weights = Scalar(2) * kPi<Scalar> * d->volumes;
        return RadialGrid(std::move(d));
    }

    Eigen::Index cells() const noexcept { return d_->nodes.size() - 1; }
    Eigen::Index size() const noexcept { return d_->nodes.size(); }

    const Vector& nodes() const noexcept { return d_->nodes; }
    const Vector& faces() const noexcept { return d_->faces; }
    const Vector& conductance() const noexcept { return d_->conductance; }
    const Vector& volumes() const noexcept { return d_->volumes; }
    const Vector& weights() const noexcept { return d_->weights; }

    Scalar operator[](Eigen::Index i) const { return d_->nodes[i]; }

    bool same_as(const RadialGrid& other) const
    {
        return d_ == other.d_ || d_->nodes == other.d_->nodes;
    }

    template <typename Other>
    RadialGrid<Other> cast() const
    {
        return RadialGrid<Other>::from_nodes(d_->nodes.template cast<Other>());
    }

private:
    struct Data {
        Vector nodes;
        Vector faces;
        Vector conductance;
        Vector volumes;
        Vector weights;
    };

    explicit RadialGrid(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

    std::shared_ptr<const Data> d_;
};

/// Uniform grid r_i = i/n, or graded grid r_i = (i/n)^2 clustering nodes near r = 0.
template <typename Scalar = double>
RadialGrid<Scalar> make_grid(int n, GridKind kind = GridKind::Uniform)
{
    if (n < 8)
        throw Error(ErrorCode::TooCoarse, "grid needs n >= 8 cells, got " + std::to_string(n));
    Vec<Scalar> r(n + 1);
    for (int i = 0; i <= n; ++i) {
        const Scalar s = Scalar(i) / Scalar(n);
        r[i] = kind == GridKind::Uniform ? s : s * s;
    }
    r[0] = Scalar(0);
    r[n] = Scalar(1);
    return RadialGrid<Scalar>::from_nodes(std::move(r));
}

enum class FieldKind { Generic, Density, Potential };

/// Nodal samples of a radial function on a RadialGrid.
///
/// Density fields are checked for nonnegativity. Potential fields must vanish at
/// r = 1; a boundary value within round-off of zero is snapped to exactly zero.
template <typename Scalar>
class RadialField {
public:
    using Vector = Vec<Scalar>;

    RadialField(RadialGrid<Scalar> grid, Vector values, FieldKind kind = FieldKind::Generic)
        : grid_(std::move(grid)), values_(std::move(values)), kind_(kind)
    {
        if (values_.size() != grid_.size())
            throw Error(ErrorCode::GridMismatch, "field length differs from grid size");
        check_kind();
    }

    static RadialField zero(const RadialGrid<Scalar>& grid, FieldKind kind = FieldKind::Generic)
    {
        return RadialField(grid, Vector::Zero(grid.size()), kind);
    }

    template <typename F>
    static RadialField from_function(const RadialGrid<Scalar>& grid, F&& f,
                                     FieldKind kind = FieldKind::Generic)
    {
        Vector v(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            v[i] = f(grid[i]);
        return RadialField(grid, std::move(v), kind);
    }

    const RadialGrid<Scalar>& grid() const noexcept { return grid_; }
    const Vector& values() const noexcept { return values_; }
    FieldKind kind() const noexcept { return kind_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    Scalar operator[](Eigen::Index i) const { return values_[i]; }

    RadialField with_values(Vector v) const { return RadialField(grid_, std::move(v), kind_); }
    RadialField as(FieldKind kind) const { return RadialField(grid_, values_, kind); }

    template <typename Other>
    RadialField<Other> cast() const
    {
        return RadialField<Other>(grid_.template cast<Other>(), values_.template cast<Other>(), kind_);
    }

private:
    void check_kind()
    {
        if (kind_ == FieldKind::Density) {
            for (Eigen::Index i = 0; i < values_.size(); ++i)
                if (values_[i] < Scalar(0) || !std::isfinite(static_cast<double>(values_[i])))
                    throw Error(ErrorCode::NegativeDensity, "density field has a negative or non-finite sample");
        }
        else if (kind_ == FieldKind::Potential) {
            const Eigen::Index n = values_.size() - 1;
            const Scalar scale = Scalar(1) + values_.cwiseAbs().maxCoeff();
            using std::abs;
            if (abs(values_[n]) > Scalar(1e-12) * scale)
                throw Error(ErrorCode::InvalidArgument, "potential field must vanish at r = 1");
            values_[n] = Scalar(0);
        }
    }

    RadialGrid<Scalar> grid_;
    Vector values_;
    FieldKind kind_;
};

template <typename Scalar>
void require_same_grid(const RadialGrid<Scalar>& a, const RadialGrid<Scalar>& b)
{
    if (!a.same_as(b))
        throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

/// Rescales a nonnegative field so that its disk integral equals m.
template <typename Scalar>
RadialField<Scalar> project_density(const RadialField<Scalar>& f, Scalar m)
{
    if (!(m > Scalar(0)))
        throw Error(ErrorCode::NonpositiveMass, "target mass must be positive");
    if ((f.values().array() < Scalar(0)).any())
        throw Error(ErrorCode::NegativeDensity, "cannot project a signed field");
    const Scalar mass = f.grid().weights().dot(f.values());
    if (!(mass > Scalar(0)))
        throw Error(ErrorCode::ZeroDensity, "field is identically zero");
    return RadialField<Scalar>(f.grid(), f.values() * (m / mass), FieldKind::Density);
}

/// (delta1, delta2, epsilon) select one of the three limit systems.
struct FlowConfig {
    double delta1 = 1.0;
    double delta2 = 0.0;
    double epsilon = 0.0;
    double dt = 1e-3;
    double t_end = 1.0;
    bool adapt = true;
    double dt_max = 0.1;
    double energy_tol = 1e-10;  ///< relative energy increase tolerated per accepted step
    double steady_tol = 1e-10;  ///< relative state change per unit time counted as steady
    long max_steps = 1000000;
};

enum class FlowCase {
    ParabolicEllipticFull,  ///< (1, 1, 0): both densities evolve, both potentials elliptic
    ParabolicEllipticTwo,   ///< (1, 0, 0): species 2 slaved to its Gibbs state
    Exponential,            ///< (0, 0, 1): potentials evolve, densities slaved
};

inline FlowCase flow_case(const FlowConfig& cfg)
{
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || !(cfg.dt_max > 0.0))
        throw Error(ErrorCode::BadFlowConfig, "dt, dt_max and t_end must be positive");
    if (cfg.delta1 < 0.0 || cfg.delta2 < 0.0 || cfg.epsilon < 0.0)
        throw Error(ErrorCode::BadFlowConfig, "delta1, delta2, epsilon must be >= 0");
    auto is = [&](double d1, double d2, double e) {
        return cfg.delta1 == d1 && cfg.delta2 == d2 && cfg.epsilon == e;
    };
    if (is(1, 1, 0))
        return FlowCase::ParabolicEllipticFull;
    if (is(1, 0, 0))
        return FlowCase::ParabolicEllipticTwo;
    if (is(0, 0, 1))
        return FlowCase::Exponential;
    throw Error(ErrorCode::BadFlowConfig,
                "(delta1, delta2, epsilon) must be one of (1,1,0), (1,0,0), (0,0,1)");
}

} // namespace chemo
