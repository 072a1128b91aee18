#pragma once

#include "chemo/error.hpp"

#include <vector>

namespace chemo {

/// Radial problem r^{-1}(r v_r)_r + r^{-beta_m/2pi} e^{-gamma v} = 0 on psi <= r <= 1 with
/// v_r(1) = -m2/2pi. In t = -ln r it becomes v_tt + e^{(beta_m/2pi - 2) t - gamma v} = 0, and
/// vbar = v - c0 t, c0 = (beta_m/2pi - 2)/gamma, solves vbar_tt + e^{-gamma vbar} = 0.
struct LemwParams {
    double gamma = 1.0;
    double beta_m = 0.0;  ///< the product beta * M
    double m2 = 0.0;
    double psi = 0.5;
};

/// Checks gamma > 0, m2 > 0, 1e-12 <= psi < 1 and (beta_m - gamma m2)/2pi - 2 > 0.
void validate_lemw(const LemwParams& lp);

/// (beta_m/2pi - 2)/gamma: the drift removed between v and vbar.
double vbar_shift(const LemwParams& lp);

/// ((beta_m - gamma m2)/2pi - 2)/gamma = -vbar_t(0).
double matching_target(const LemwParams& lp);

/// vbar(t) = -ln(4 E gamma)/gamma - k s + (2/gamma) ln(1 - e^{k gamma s}), k = sqrt(2E), s = t + ln psi.
/// It blows down at t = ln(1/psi).
double exact_vbar(double e, double gamma, double psi, double t);

/// d/dt of exact_vbar.
double exact_vbar_t(double e, double gamma, double psi, double t);

/// vbar_t^2/2 - e^{-gamma vbar}/gamma, conserved along solutions.
double vbar_energy(double vbar, double vbar_t, double gamma);

/// E > 0 with sqrt(2E) coth(sqrt(E/2) gamma ln(1/psi)) = matching_target, by bisection.
double match_energy(const LemwParams& lp);

struct VeqTrajectory {
    std::vector<double> t;
    std::vector<double> r;   ///< e^{-t}
    std::vector<double> v;
    std::vector<double> vt;  ///< dv/dt = -r v_r
    double half_integral = 0.0;  ///< int_0^{ln(1/sqrt psi)} v_t^2 dt = int_{sqrt psi}^1 r v_r^2 dr
    double energy_drift = 0.0;   ///< max |E(t) - E(0)| of the vbar energy (0 when gamma = 0)
};

/// RK4 in t from r = 1 inward to t = ln(1/psi) - 1 (one unit short of the blow-down),
/// starting from v(1) = v1, v_t(0) = m2/2pi. At least n steps, step <= 2e-3, and
/// t = ln(1/sqrt psi) always falls on a step. Only gamma >= 0 and psi in (0, 1) are required.
/// Throws MonotonicityLost when v_r > 0 somewhere on the integrated range.
VeqTrajectory integrate_veq_from(const LemwParams& lp, double v1, int n);

/// integrate_veq_from with v(1) taken from the exact solution at the matched energy.
VeqTrajectory integrate_veq(const LemwParams& lp, int n = 4000);

/// ln^{-1}(1/sqrt psi) int_{sqrt psi}^1 r |v_r|^2 dr; tends to (m2/2pi)^2 as psi -> 0.
double asymptotic_ratio(const LemwParams& lp, int n = 4000);

} // namespace chemo
