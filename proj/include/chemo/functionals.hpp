#pragma once

#include "chemo/liouville.hpp"

#include <array>
#include <utility>

namespace chemo {

/// Itemized energy. Every part already carries its coefficient, so total is their sum.
template <typename Scalar>
struct FunctionalReport {
    Scalar entropy1 = 0;
    Scalar entropy2 = 0;
    Scalar interaction = 0;
    Scalar dirichlet = 0;
    Scalar cross = 0;
    Scalar log_terms = 0;
    Scalar total = 0;

    Scalar sum_of_parts() const { return entropy1 + entropy2 + interaction + dirichlet + cross + log_terms; }
    FunctionalReport& close()
    {
        total = sum_of_parts();
        return *this;
    }
};

/// F(rho) = int rho ln rho + (alpha/2) (rho, Delta^{-1} rho).
template <typename Scalar>
FunctionalReport<Scalar> free_energy(const RadialField<Scalar>& rho, const Params& p)
{
    FunctionalReport<Scalar> r;
    r.entropy1 = entropy(rho);
    r.interaction = Scalar(p.alpha / 2) * interaction_energy(rho);
    return r.close();
}

/// (alpha/2) int |grad u|^2 - m ln int e^{alpha u}.
template <typename Scalar>
Scalar mt_functional(const RadialField<Scalar>& u, Scalar m, Scalar alpha)
{
    return alpha / Scalar(2) * dirichlet_energy(u) - m * log_partition(u.grid(), Vec<Scalar>(alpha * u.values()));
}

/// (gamma/2) int |grad w|^2 + m ln int e^{-gamma w + beta u}, u = inv_laplacian(rho).
template <typename Scalar>
Scalar h_gamma(const RadialField<Scalar>& rho, const RadialField<Scalar>& w, Scalar m, const Params& p)
{
    require_same_grid(rho.grid(), w.grid());
    const Vec<Scalar> u = inv_laplacian(rho.grid(), rho.values());
    const Vec<Scalar> phi = Scalar(-p.gamma) * w.values() + Scalar(p.beta) * u;
    return Scalar(p.gamma / 2) * dirichlet_energy(w) + m * log_partition(rho.grid(), phi);
}

/// F(rho) - theta [(gamma/2) int |grad w|^2 + m2 ln int e^{-gamma w - theta beta u}].
///
/// For theta = -1 this is F(rho) + h_gamma(rho, w, m2). For theta = +1 the bracket enters
/// with a minus sign; it is the reduced energy of the flow with species 2 slaved to w.
template <typename Scalar>
FunctionalReport<Scalar> f_m(const RadialField<Scalar>& rho, const RadialField<Scalar>& w, const Params& p)
{
    require_same_grid(rho.grid(), w.grid());
    auto r = free_energy(rho, p);
    const Scalar sign = Scalar(-p.theta);
    const Vec<Scalar> u = inv_laplacian(rho.grid(), rho.values());
    const Vec<Scalar> phi = Scalar(-p.gamma) * w.values() + Scalar(-p.theta * p.beta) * u;
    r.dirichlet = sign * Scalar(p.gamma / 2) * dirichlet_energy(w);
    r.log_terms = p.m2 > 0.0 ? sign * Scalar(p.m2) * log_partition(rho.grid(), phi) : Scalar(0);
    return r.close();
}

/// inf over w of f_m(rho, w): the value and the minimizing w.
/// gamma = 0 makes the w-dependence trivial and w = 0 is returned.
template <typename Scalar>
std::pair<FunctionalReport<Scalar>, RadialField<Scalar>> bar_f(const RadialField<Scalar>& rho, const Params& p,
                                                                const SolveOptions& opt = {},
                                                                const RadialField<Scalar>* warm = nullptr)
{
    auto w = (p.gamma == 0.0 || p.m2 == 0.0) ? RadialField<Scalar>::zero(rho.grid(), FieldKind::Potential)
                                             : minimize_w(rho, p, opt, warm);
    auto report = f_m(rho, w, p);
    return {report, std::move(w)};
}

/// (alpha/2)|u1|^2 - (theta gamma/2)|u2|^2 - beta (grad u1, grad u2)
///   - M1 ln int e^{alpha u1 - beta u2} - theta M2 ln int e^{-gamma u2 - theta beta u1}.
template <typename Scalar>
FunctionalReport<Scalar> h_theta_bar(const RadialField<Scalar>& u1, const RadialField<Scalar>& u2, const Params& p)
{
    require_same_grid(u1.grid(), u2.grid());
    const auto& g = u1.grid();
    const Scalar a(p.alpha), b(p.beta), c(p.gamma), th(p.theta);
    FunctionalReport<Scalar> r;
    r.dirichlet = a / Scalar(2) * dirichlet_energy(u1) - th * c / Scalar(2) * dirichlet_energy(u2);
    r.cross = -b * dirichlet_cross(u1, u2);
    const Vec<Scalar> phi1 = a * u1.values() - b * u2.values();
    const Vec<Scalar> phi2 = -c * u2.values() - th * b * u1.values();
    r.log_terms = -Scalar(p.m1) * log_partition(g, phi1) - th * Scalar(p.m2) * log_partition(g, phi2);
    return r.close();
}

/// int rho1 ln rho1 + theta int rho2 ln rho2 + (alpha/2)(rho1, D rho1) - (theta gamma/2)(rho2, D rho2)
///   - beta (rho2, D rho1), with D = Delta^{-1}.
template <typename Scalar>
FunctionalReport<Scalar> h_theta_under(const RadialField<Scalar>& rho1, const RadialField<Scalar>& rho2,
                                       const Params& p)
{
    require_same_grid(rho1.grid(), rho2.grid());
    const Scalar th(p.theta);
    FunctionalReport<Scalar> r;
    r.entropy1 = entropy(rho1);
    r.entropy2 = th * entropy(rho2);
    r.interaction = Scalar(p.alpha / 2) * interaction_energy(rho1) - th * Scalar(p.gamma / 2) * interaction_energy(rho2);
    r.cross = -Scalar(p.beta) * pairing(rho2, rho1);
    return r.close();
}

} // namespace chemo
