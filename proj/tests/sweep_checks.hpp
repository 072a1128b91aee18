#pragma once

#include "chemo/phase_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chemo::testing {

inline double segment_distance(double px, double py, std::pair<double, double> a, std::pair<double, double> b)
{
    const double dx = b.first - a.first, dy = b.second - a.second;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - a.first) * dx + (py - a.second) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - a.first - t * dx, py - a.second - t * dy);
}

/// Distance from (x, y) to the nearest emitted curve, in cell units. Curve points are joined only
/// when they are close, so that two branches of one locus are never bridged.
inline double curve_distance(const Sweep& s, double x, double y)
{
    const double w = s.cell_width(), h = s.cell_height();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : s.curves) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [m1, m2] : c.points)
            pts.emplace_back(m1 / w, m2 / h);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            best = std::min(best, std::hypot(x / w - pts[k].first, y / h - pts[k].second));
            if (k + 1 < pts.size() && std::hypot(pts[k + 1].first - pts[k].first, pts[k + 1].second - pts[k].second) < 1)
                best = std::min(best, segment_distance(x / w, y / h, pts[k], pts[k + 1]));
        }
    }
    return best;
}

struct SweepAudit {
    long changes = 0;
    long stray = 0;           ///< verdict changes farther than one cell from every curve
    double worst = 0.0;       ///< largest such distance, cells
    long rule4_breaks = 0;    ///< columns where the rule-4 bit switches off as M2 grows
};

/// Every pair of neighbouring cells with different verdicts must have its midpoint within one
/// cell of an emitted curve.
inline SweepAudit audit(const Sweep& s)
{
    SweepAudit a;
    const int n = s.resolution;
    const double w = s.cell_width(), h = s.cell_height();
    auto centre = [&](int i, int j) {
        return std::pair<double, double>{s.m1.lo + (i + 0.5) * w, s.m2.lo + (j + 0.5) * h};
    };
    auto check = [&](int i0, int j0, int i1, int j1) {
        if (s.at(i0, j0).verdict == s.at(i1, j1).verdict)
            return;
        ++a.changes;
        const auto [x0, y0] = centre(i0, j0);
        const auto [x1, y1] = centre(i1, j1);
        const double d = curve_distance(s, (x0 + x1) / 2, (y0 + y1) / 2);
        a.worst = std::max(a.worst, d);
        if (d > 1.0)
            ++a.stray;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n)
                check(i, j, i + 1, j);
            if (j + 1 < n)
                check(i, j, i, j + 1);
        }
    for (int i = 0; i < n; ++i) {
        bool on = false;
        for (int j = 0; j < n; ++j) {
            const bool r4 = (s.at(i, j).matched & 8u) != 0;
            if (on && !r4)
                ++a.rule4_breaks;
            on = on || r4;
        }
    }
    return a;
}

} // namespace chemo::testing
