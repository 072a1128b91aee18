#include "chemo/phase_diagram.hpp"

#include "chemo/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace chemo {

namespace {

constexpr double kPiD = kPi<double>;
constexpr double kEdge = 1e-12;
const double kInf = std::numeric_limits<double>::infinity();

/// Real roots of a x^2 + b x + c = 0, ascending. Degenerates to the linear case when a == 0.
std::vector<double> real_roots(double a, double b, double c)
{
    if (a == 0.0) {
        if (b == 0.0)
            return {};
        return {-c / b};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0)
        return {};
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    std::vector<double> r;
    if (q != 0.0)
        r = {q / a, c / q};
    else
        r = {0.0, 0.0};
    std::sort(r.begin(), r.end());
    return r;
}

void check_symmetric(const Eigen::MatrixXd& a, std::size_t n)
{
    if (a.rows() != static_cast<Eigen::Index>(n) || a.cols() != static_cast<Eigen::Index>(n))
        throw Error(ErrorCode::InvalidArgument, "coupling matrix size differs from number of masses");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error(ErrorCode::AsymmetricMatrix, "coupling matrix must be symmetric");
}

double lambda_full(const Eigen::VectorXd& m, const Eigen::MatrixXd& a)
{
    return 4.0 * kPiD * m.sum() - 0.5 * m.dot(a * m);
}

bool holds(double v) { return v > kEdge; }

/// 4pi(M1 + m) - alpha M1^2/2 + gamma m^2/2 - beta M1 m.
double existence_quadratic(const Params& p, double m1, double m)
{
    return 4.0 * kPiD * (m1 + m) - 0.5 * p.alpha * m1 * m1 + 0.5 * p.gamma * m * m - p.beta * m1 * m;
}

/// max of Lambda(M1, .) over [0, hi]; Lambda is concave (or linear) in M2.
double max_lambda_below(const Params& p, double m1, double hi)
{
    double best = std::max(lambda_val(m1, 0.0, p).lambda, lambda_val(m1, hi, p).lambda);
    if (p.gamma > 0.0) {
        const double vertex = (p.beta * m1 - 4.0 * kPiD) / p.gamma;
        if (vertex > 0.0 && vertex < hi)
            best = std::max(best, lambda_val(m1, vertex, p).lambda);
    }
    return best;
}

} // namespace

std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::BoundedBelow: return "BoundedBelow";
    case Verdict::RadiallyBounded: return "RadiallyBounded";
    case Verdict::UnboundedBelow: return "UnboundedBelow";
    case Verdict::Unknown: return "Unknown";
    case Verdict::Exists: return "Exists";
    case Verdict::NotCovered: return "NotCovered";
    }
    return "Unknown";
}

double lambda_j(std::span<const double> masses, const Eigen::MatrixXd& a, std::span<const int> subset)
{
    check_symmetric(a, masses.size());
    if (subset.empty())
        throw Error(ErrorCode::InvalidArgument, "subset must be nonempty");
    double linear = 0.0;
    double quad = 0.0;
    for (int i : subset) {
        if (i < 0 || static_cast<std::size_t>(i) >= masses.size())
            throw Error(ErrorCode::InvalidArgument, "subset index out of range");
        linear += masses[i];
        for (int j : subset)
            quad += a(i, j) * masses[i] * masses[j];
    }
    return 4.0 * kPiD * linear - 0.5 * quad;
}

bool all_subsets_positive(std::span<const double> masses, const Eigen::MatrixXd& a)
{
    check_symmetric(a, masses.size());
    const std::size_t n = masses.size();
    if (n == 0 || n > 20)
        throw Error(ErrorCode::InvalidArgument, "need between 1 and 20 species");
    std::vector<int> subset;
    for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
        subset.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ul << i))
                subset.push_back(static_cast<int>(i));
        if (!(lambda_j(masses, a, subset) > 0.0))
            return false;
    }
    return true;
}

bool refined_condition(std::span<const double> masses, const Eigen::MatrixXd& a)
{
    check_symmetric(a, masses.size());
    const int n = static_cast<int>(masses.size());
    if (n == 0 || n > 12)
        throw Error(ErrorCode::InvalidArgument, "need between 1 and 12 species");
    Eigen::VectorXd upper(n);
    for (int i = 0; i < n; ++i) {
        if (!(masses[i] > 0.0))
            throw Error(ErrorCode::NonpositiveMass, "masses must be positive");
        upper[i] = masses[i];
    }

    // Each coordinate is free (0), pinned at 0 (1) or pinned at M_i (2).
    long faces = 1;
    for (int i = 0; i < n; ++i)
        faces *= 3;
    for (long code = 0; code < faces; ++code) {
        std::vector<int> state(n);
        long c = code;
        for (int i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
        }
        Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
        std::vector<int> free;
        for (int i = 0; i < n; ++i) {
            if (state[i] == 0)
                free.push_back(i);
            else if (state[i] == 2)
                m[i] = upper[i];
        }
        if (!free.empty()) {
            const int k = static_cast<int>(free.size());
            Eigen::MatrixXd aff(k, k);
            Eigen::VectorXd rhs(k);
            for (int r = 0; r < k; ++r) {
                rhs[r] = 4.0 * kPiD;
                for (int s = 0; s < n; ++s)
                    if (state[s] != 0)
                        rhs[r] -= a(free[r], s) * m[s];
                for (int s = 0; s < k; ++s)
                    aff(r, s) = a(free[r], free[s]);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(aff);
            if (!lu.isInvertible())
                continue;
            const Eigen::VectorXd x = lu.solve(rhs);
            bool inside = true;
            for (int r = 0; r < k; ++r) {
                if (x[r] < 0.0 || x[r] > upper[free[r]])
                    inside = false;
                m[free[r]] = x[r];
            }
            if (!inside)
                continue;
        }
        if (m.cwiseAbs().maxCoeff() == 0.0)
            continue;
        if (!(lambda_full(m, a) > 0.0))
            return false;
    }
    return true;
}

double underline_m(const Params& p)
{
    if (p.gamma == 0.0)
        return kInf;
    if (!(p.alpha > 0.0))
        throw Error(ErrorCode::InvalidArgument, "underline_m needs alpha > 0");
    const double m2s = 4.0 * kPiD / p.gamma * (2.0 * p.beta / p.alpha - 1.0);
    // Lambda(M, m2s) = -(alpha/4pi) M^2 + b M - c
    const double qa = p.alpha / (4.0 * kPiD);
    const double b = 2.0 + p.beta * m2s / (2.0 * kPiD);
    const double c = 2.0 * m2s + p.gamma * m2s * m2s / (4.0 * kPiD);
    const auto roots = real_roots(qa, -b, c);
    if (roots.empty())
        throw Error(ErrorCode::NoRealRoot, "Lambda(M, M2*) = 0 has no real root");
    return roots.back();
}

double conflict_free_asymptote(const Params& p)
{
    const double qa = p.beta * p.beta + p.alpha * p.gamma;
    const auto roots = real_roots(qa, -8.0 * kPiD * (p.beta + p.gamma), 16.0 * kPiD * kPiD);
    const double floor = p.beta > 0.0 ? 4.0 * kPiD / p.beta : 0.0;
    for (double r : roots)
        if (r > floor)
            return r;
    return kInf;
}

PhaseVerdict classify_conflict(const Params& params)
{
    const Params p = validate_params(params);
    if (p.theta != -1)
        throw Error(ErrorCode::BadTheta, "classify_conflict needs theta = -1");
    PhaseVerdict v;
    v.m1 = p.m1;
    v.m2 = p.m2;
    v.lambda = lambda_val(p.m1, p.m2, p);

    const double critical = p.alpha > 0.0 ? 8.0 * kPiD / p.alpha : kInf;
    const double below_critical = critical - p.m1;
    v.fired.push_back({"8pi/alpha - M1", below_critical});
    v.fired.push_back({"-Lambda", -v.lambda.lambda});
    v.fired.push_back({"-Lambda2", -v.lambda.lambda2});

    const bool r1 = holds(below_critical);
    const bool r2 = holds(-v.lambda.lambda) && holds(-v.lambda.lambda2);

    bool r3 = false;
    bool r4 = false;
    const double attraction = p.beta - p.alpha / 2.0;
    v.fired.push_back({"beta - alpha/2", attraction});
    if (holds(attraction)) {
        const double gamma_gap = 2.0 * p.beta / p.alpha - (p.gamma * p.m2 / (4.0 * kPiD) + 1.0);
        v.fired.push_back({"2beta/alpha - gamma M2/4pi - 1", gamma_gap});
        v.fired.push_back({"Lambda", v.lambda.lambda});
        double mbar = kInf;
        bool have_mbar = true;
        try {
            mbar = underline_m(p);
        }
        catch (const Error&) {
            have_mbar = false;
        }
        if (have_mbar) {
            const double strip = std::isinf(mbar) ? kInf : mbar - p.m1;
            v.fired.push_back({"underline_m - M1", strip});
            r3 = holds(v.lambda.lambda) && holds(gamma_gap) && holds(strip);

            // rule 4: some M2' in [0, min(M2, M2*)) passes rule 3
            const double m2_star = p.gamma > 0.0 ? 4.0 * kPiD / p.gamma * (2.0 * p.beta / p.alpha - 1.0) : kInf;
            const double hi = std::min(p.m2, m2_star);
            const double best = max_lambda_below(p, p.m1, hi);
            v.fired.push_back({"max Lambda(M1, M2' <= M2)", best});
            r4 = holds(strip) && holds(best);
        }
    }

    v.matched = (r1 ? 1u : 0u) | (r2 ? 2u : 0u) | (r3 ? 4u : 0u) | (r4 ? 8u : 0u);
    if (r1) {
        v.verdict = Verdict::BoundedBelow;
        v.rule = 1;
    }
    else if (r2) {
        v.verdict = Verdict::UnboundedBelow;
        v.rule = 2;
    }
    else if (r3) {
        v.verdict = Verdict::RadiallyBounded;
        v.rule = 3;
    }
    else if (r4) {
        v.verdict = Verdict::RadiallyBounded;
        v.rule = 4;
    }
    return v;
}

PhaseVerdict classify_conflict_free(const Params& params)
{
    const Params p = validate_params(params);
    if (p.theta != 1)
        throw Error(ErrorCode::BadTheta, "classify_conflict_free needs theta = +1");
    PhaseVerdict v;
    v.m1 = p.m1;
    v.m2 = p.m2;
    v.lambda = lambda_val(p.m1, p.m2, p);

    const double critical = p.alpha > 0.0 ? 8.0 * kPiD / p.alpha : kInf;
    v.fired.push_back({"8pi/alpha - M1", critical - p.m1});

    // min over m in [0, M2] of the existence quadratic
    double qmin = std::min(existence_quadratic(p, p.m1, 0.0), existence_quadratic(p, p.m1, p.m2));
    if (p.gamma > 0.0) {
        const double vertex = (p.beta * p.m1 - 4.0 * kPiD) / p.gamma;
        if (vertex > 0.0 && vertex < p.m2)
            qmin = std::min(qmin, existence_quadratic(p, p.m1, vertex));
    }
    v.fired.push_back({"min_m existence quadratic", qmin});
    if (2.0 * p.beta >= p.alpha && p.gamma > 0.0)
        v.fired.push_back({"asymptote - M1", conflict_free_asymptote(p) - p.m1});

    const bool ok = holds(critical - p.m1) && holds(qmin);
    v.matched = ok ? 1u : 0u;
    v.rule = ok ? 1 : 0;
    v.verdict = ok ? Verdict::Exists : Verdict::NotCovered;
    return v;
}

namespace {

void add_vertical(std::vector<Curve>& out, const std::string& name, double m1, Range m2, int samples)
{
    Curve c{name, {}};
    for (int k = 0; k <= samples; ++k)
        c.points.emplace_back(m1, m2.lo + (m2.hi - m2.lo) * k / samples);
    out.push_back(std::move(c));
}

void add_horizontal(std::vector<Curve>& out, const std::string& name, double m2, Range m1, int samples)
{
    Curve c{name, {}};
    for (int k = 0; k <= samples; ++k)
        c.points.emplace_back(m1.lo + (m1.hi - m1.lo) * k / samples, m2);
    out.push_back(std::move(c));
}

bool inside(double x, Range r) { return x >= r.lo && x <= r.hi; }

/// Zero set of a polynomial quadratic in each variable, sampled along both axes.
/// coef_in_m2(m1) and coef_in_m1(m2) return {a, b, c} of the quadratic in the other variable.
template <typename F, typename G>
Curve quadratic_locus(const std::string& name, Range m1, Range m2, int samples, F coef_in_m2, G coef_in_m1)
{
    Curve c{name, {}};
    for (int k = 0; k <= samples; ++k) {
        const double x = m1.lo + (m1.hi - m1.lo) * k / samples;
        const auto [a, b, cc] = coef_in_m2(x);
        for (double y : real_roots(a, b, cc))
            if (inside(y, m2))
                c.points.emplace_back(x, y);
    }
    for (int k = 0; k <= samples; ++k) {
        const double y = m2.lo + (m2.hi - m2.lo) * k / samples;
        const auto [a, b, cc] = coef_in_m1(y);
        for (double x : real_roots(a, b, cc))
            if (inside(x, m1))
                c.points.emplace_back(x, y);
    }
    return c;
}

} // namespace

Sweep sweep(const Params& base, Range m1, Range m2, int resolution, unsigned threads)
{
    validate_params(base);
    if (resolution < 0)
        throw Error(ErrorCode::InvalidArgument, "resolution must be >= 0");
    if (!(m1.hi >= m1.lo) || !(m2.hi >= m2.lo) || m1.lo < 0.0 || m2.lo < 0.0)
        throw Error(ErrorCode::InvalidArgument, "mass ranges must be nonnegative and ordered");

    Sweep s;
    s.m1 = m1;
    s.m2 = m2;
    if (m1.hi == m1.lo || m2.hi == m2.lo || resolution == 0)
        return s;
    s.resolution = resolution;
    s.ellipse = base.theta == -1 && base.gamma > 0.0 && base.beta * base.beta < base.alpha * base.gamma;

    const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
    s.cells.resize(n);
    const double w = s.cell_width();
    const double h = s.cell_height();
    parallel_for(
        n,
        [&](std::size_t idx) {
            const int i = static_cast<int>(idx % resolution);
            const int j = static_cast<int>(idx / resolution);
            Params p = base;
            p.m1 = m1.lo + (i + 0.5) * w;
            p.m2 = m2.lo + (j + 0.5) * h;
            s.cells[idx] = p.theta == -1 ? classify_conflict(p) : classify_conflict_free(p);
        },
        threads == 0 ? default_threads() : threads);
    for (const auto& c : s.cells)
        if ((c.matched & 3u) == 3u)
            ++s.rule12_overlaps;

    const int samples = std::max(200, 4 * resolution);
    const Params& p = base;
    const double pi = kPiD;
    if (p.alpha > 0.0 && inside(8.0 * pi / p.alpha, m1))
        add_vertical(s.curves, "critical_mass", 8.0 * pi / p.alpha, m2, samples);

    if (p.theta == -1) {
        if (p.beta > 0.0 && inside(4.0 * pi / p.beta, m1))
            add_vertical(s.curves, "cross_mass", 4.0 * pi / p.beta, m2, samples);
        s.curves.push_back(quadratic_locus(
            "lambda_zero", m1, m2, samples,
            [&](double x) {
                return std::array<double, 3>{-p.gamma / (4 * pi), -2.0 + p.beta * x / (2 * pi),
                                             2.0 * x - p.alpha * x * x / (4 * pi)};
            },
            [&](double y) {
                return std::array<double, 3>{-p.alpha / (4 * pi), 2.0 + p.beta * y / (2 * pi),
                                             -2.0 * y - p.gamma * y * y / (4 * pi)};
            }));
        s.curves.push_back(quadratic_locus(
            "lambda2_zero", m1, m2, samples,
            [&](double x) {
                return std::array<double, 3>{p.gamma / (4 * pi), 0.0, 2.0 * x - p.alpha * x * x / (4 * pi)};
            },
            [&](double y) {
                return std::array<double, 3>{-p.alpha / (4 * pi), 2.0, p.gamma * y * y / (4 * pi)};
            }));
        if (p.gamma > 0.0) {
            Curve flux{"flux_line", {}};
            for (int k = 0; k <= samples; ++k) {
                const double x = m1.lo + (m1.hi - m1.lo) * k / samples;
                const double y = (p.beta * x - 4.0 * pi) / p.gamma;
                if (inside(y, m2))
                    flux.points.emplace_back(x, y);
            }
            s.curves.push_back(std::move(flux));
        }
        if (p.beta > p.alpha / 2.0 && p.alpha > 0.0) {
            if (p.gamma > 0.0) {
                const double m2s = 4.0 * pi / p.gamma * (2.0 * p.beta / p.alpha - 1.0);
                if (inside(m2s, m2))
                    add_horizontal(s.curves, "gamma_condition", m2s, m1, samples);
            }
            try {
                const double mbar = underline_m(p);
                if (std::isfinite(mbar) && inside(mbar, m1))
                    add_vertical(s.curves, "underline_m", mbar, m2, samples);
            }
            catch (const Error&) {
            }
        }
    }
    else {
        s.curves.push_back(quadratic_locus(
            "existence_boundary", m1, m2, samples,
            [&](double x) {
                return std::array<double, 3>{p.gamma / 2.0, 4.0 * pi - p.beta * x,
                                             4.0 * pi * x - p.alpha * x * x / 2.0};
            },
            [&](double y) {
                return std::array<double, 3>{-p.alpha / 2.0, 4.0 * pi - p.beta * y,
                                             4.0 * pi * y + p.gamma * y * y / 2.0};
            }));
        const double qa = p.beta * p.beta + p.alpha * p.gamma;
        for (double r : real_roots(qa, -8.0 * pi * (p.beta + p.gamma), 16.0 * pi * pi))
            if (r > 0.0 && inside(r, m1))
                add_vertical(s.curves, "tangency", r, m2, samples);
    }
    return s;
}

} // namespace chemo
