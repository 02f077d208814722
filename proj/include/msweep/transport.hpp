#pragma once

/// @file transport.hpp
/// @brief Equal-weight empirical measures and exact quadratic optimal transport.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "msweep/geometry.hpp"
#include "msweep/vec2.hpp"

namespace msweep {

/// (1/N) sum_i delta_{x_i} on R^d, stored row-major.
class ParticleCloud {
public:
    /// Throws InvalidArgument unless dim >= 1, coords.size() is a positive
    /// multiple of dim and every coordinate is finite.
    ParticleCloud(std::size_t dim, std::vector<double> coords);

    static ParticleCloud from_points(std::span<const Vec2> points);

    std::size_t size() const { return coords_.size() / dim_; }
    std::size_t dim() const { return dim_; }

    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    const std::vector<double>& coords() const { return coords_; }

    /// Planar accessors; valid only when dim() == 2.
    Vec2 at(std::size_t i) const { return {coords_[2 * i], coords_[2 * i + 1]}; }
    void set(std::size_t i, Vec2 p) {
        coords_[2 * i] = p.x;
        coords_[2 * i + 1] = p.y;
    }
    std::vector<Vec2> points() const;

    friend bool operator==(const ParticleCloud&, const ParticleCloud&) = default;

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Optimal matching a_i -> b_{permutation[i]}; cost is the mean squared length.
struct Assignment {
    std::vector<std::size_t> permutation;
    double cost = 0.0;
};

struct W2Result {
    double distance = 0.0;
    Assignment plan;
};

/// Mean of |a_i - b_{perm[i]}|^2.
double matching_cost(const ParticleCloud& a, const ParticleCloud& b, std::span<const std::size_t> perm);

/// Exact W2 between equal-size clouds via a shortest-augmenting-path linear
/// assignment solver. Throws SizeMismatch when sizes or dimensions differ.
W2Result w2(const ParticleCloud& a, const ParticleCloud& b);

/// Displacement interpolation ((1-t) id + t F)# a along `plan` from a to b.
/// Throws ParameterOutOfRange for t outside [0, 1].
ParticleCloud geodesic(const ParticleCloud& a, const ParticleCloud& b, const Assignment& plan, double t);

/// Particle-wise projection (P_C)# a. OutOfReach messages carry the particle index.
ParticleCloud project_measure(const ParticleCloud& a, const ProxRegularSet& set,
                              ReachPolicy policy = ReachPolicy::Strict);

/// A cloud together with per-particle velocities (same layout as coords).
struct CurveState {
    ParticleCloud cloud;
    std::vector<double> velocity;
};

using Curve = std::function<CurveState(double)>;

/// |(W2^2(t+h) - W2^2(t-h)) / (2h) - 2 sum_i <u_i - v_{s(i)}, x_i - y_{s(i)}> / N|
/// with s the optimal assignment at t. Diagnostic only.
double w2_derivative_check(const Curve& a, const Curve& b, double t, double h);

}  // namespace msweep
