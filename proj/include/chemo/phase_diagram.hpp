#pragma once

#include "chemo/model.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace chemo {

struct LambdaValues {
    double lambda = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

/// Lambda1 = M2 (-2 + (beta M1 - gamma M2) / 2pi), Lambda2 = 2 M1 - alpha M1^2/4pi + gamma M2^2/4pi.
inline LambdaValues lambda_val(double m1, double m2, const Params& p)
{
    const double pi = kPi<double>;
    LambdaValues v;
    v.lambda1 = m2 * (-2.0 + (p.beta * m1 - p.gamma * m2) / (2.0 * pi));
    v.lambda2 = 2.0 * m1 - p.alpha * m1 * m1 / (4.0 * pi) + p.gamma * m2 * m2 / (4.0 * pi);
    v.lambda = v.lambda1 + v.lambda2;
    return v;
}

/// 4 pi sum_{i in J} M_i - (1/2) sum_{i,j in J} a_ij M_i M_j. Subset indices are 0-based.
double lambda_j(std::span<const double> masses, const Eigen::MatrixXd& a, std::span<const int> subset);

/// Lambda_J > 0 for every nonempty J.
bool all_subsets_positive(std::span<const double> masses, const Eigen::MatrixXd& a);

/// Lambda_I(m) > 0 for every 0 < m_i <= M_i, I the full index set. The box minimum of the
/// quadratic is searched over all faces (each coordinate free, at 0, or at M_i).
bool refined_condition(std::span<const double> masses, const Eigen::MatrixXd& a);

/// Larger root M of Lambda(M, (4pi/gamma)(2beta/alpha - 1)) = 0; +infinity when gamma = 0.
double underline_m(const Params& p);

enum class Verdict { BoundedBelow, RadiallyBounded, UnboundedBelow, Unknown, Exists, NotCovered };

std::string_view to_string(Verdict v) noexcept;

struct Inequality {
    std::string name;
    double value;  ///< the inequality holds when value > 0
};

struct PhaseVerdict {
    double m1 = 0.0;
    double m2 = 0.0;
    Verdict verdict = Verdict::Unknown;
    int rule = 0;          ///< first rule that matched, 0 if none
    unsigned matched = 0;  ///< bit k-1 set when rule k holds, independent of order
    LambdaValues lambda;
    std::vector<Inequality> fired;
};

/// Conflict case (theta = -1). Rules in order, first match wins:
///  1. M1 < 8pi/alpha                                         -> BoundedBelow
///  2. Lambda < 0 and Lambda2 < 0                             -> UnboundedBelow
///  3. beta > alpha/2, Lambda > 0, 2beta/alpha > gamma M2/4pi + 1, M1 < underline_m -> RadiallyBounded
///  4. beta > alpha/2 and rule 3 holds at (M1, M2') for some M2' <= M2 -> RadiallyBounded
///  otherwise Unknown. Inequalities within 1e-12 of equality never hold.
PhaseVerdict classify_conflict(const Params& p);

/// Conflict-free case (theta = +1): Exists when M1 < 8pi/alpha and
/// 4pi(M1 + m) - alpha M1^2/2 + gamma m^2/2 - beta M1 m > 0 for all m in (0, M2); otherwise NotCovered.
PhaseVerdict classify_conflict_free(const Params& p);

/// Vertical asymptote of the conflict-free existence boundary (case 2beta >= alpha, gamma > 0):
/// the root above 4pi/beta of (beta^2 + alpha gamma) M^2 - 8pi(beta + gamma) M + 16 pi^2 = 0.
double conflict_free_asymptote(const Params& p);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct Curve {
    std::string name;
    std::vector<std::pair<double, double>> points;  ///< (m1, m2)
};

struct Sweep {
    int resolution = 0;
    Range m1;
    Range m2;
    std::vector<PhaseVerdict> cells;  ///< row-major: index = j * resolution + i, i along m1
    std::vector<Curve> curves;
    long rule12_overlaps = 0;  ///< points where rules 1 and 2 both hold
    bool ellipse = false;      ///< Lambda = 0 is an ellipse (conflict, gamma > 0, beta^2 < alpha gamma)

    const PhaseVerdict& at(int i, int j) const { return cells[static_cast<std::size_t>(j) * resolution + i]; }
    double cell_width() const { return (m1.hi - m1.lo) / resolution; }
    double cell_height() const { return (m2.hi - m2.lo) / resolution; }
};

/// Classifies the cell centres of a resolution x resolution grid in parallel and samples the
/// analytic boundary curves. Masses outside the valid domain (m1 <= 0) are skipped.
Sweep sweep(const Params& base, Range m1, Range m2, int resolution, unsigned threads = 0);

} // namespace chemo
