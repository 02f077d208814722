#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the solver paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "msweep/vec2.hpp"

namespace oracle {

using msweep::Vec2;

/// Minimum over all N! matchings of the mean squared distance.
inline double brute_force_w2_cost(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) c += msweep::norm2(a[i] - b[perm[i]]);
        best = std::min(best, c / static_cast<double>(a.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Nearest point on the boundary of an ellipse centred at c, by
/// dense parameter sampling followed by golden-section refinement. The ellipse
/// is rotated counter-clockwise by `world_rotation`.
inline Vec2 ellipse_nearest_dense(Vec2 c, double a1, double a2, double world_rotation, Vec2 p,
                                  std::size_t n = 200000) {
    auto at = [&](double th) {
        const Vec2 local{a1 * std::cos(th), a2 * std::sin(th)};
        return c + msweep::rotate(local, world_rotation);
    };
    double best_t = 0.0;
    double best = std::numeric_limits<double>::infinity();
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = two_pi * static_cast<double>(k) / static_cast<double>(n);
        const double d = msweep::norm2(at(th) - p);
        if (d < best) {
            best = d;
            best_t = th;
        }
    }
    double lo = best_t - two_pi / static_cast<double>(n);
    double hi = best_t + two_pi / static_cast<double>(n);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double m1 = hi - g * (hi - lo);
        const double m2 = lo + g * (hi - lo);
        if (msweep::norm2(at(m1) - p) < msweep::norm2(at(m2) - p)) hi = m2;
        else lo = m1;
    }
    return at(0.5 * (lo + hi));
}

inline std::vector<Vec2> random_points(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {u(gen), u(gen)};
    return pts;
}

}  // namespace oracle
