#pragma once

/// @file geometry.hpp
/// @brief Prox-regular sets in the plane and time-dependent viability regions.
///
/// A set is an intersection of primitives. Every primitive is the closed region
/// a crowd may occupy: half-plane, disc, disc complement, ellipse complement,
/// axis-aligned box, or the complement of a wall with an exit. Queries are pure
/// functions of immutable descriptors.

#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include "msweep/vec2.hpp"

namespace msweep {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// {x : <normal, x> <= offset}; `normal` has unit length.
struct HalfSpace {
    Vec2 normal{1.0, 0.0};
    double offset = 0.0;
    friend bool operator==(const HalfSpace&, const HalfSpace&) = default;
};

/// Closed disc.
struct Ball {
    Vec2 center{};
    double radius = 1.0;
    friend bool operator==(const Ball&, const Ball&) = default;
};

/// {x : |x - center| >= radius}.
struct BallComplement {
    Vec2 center{};
    double radius = 1.0;
    friend bool operator==(const BallComplement&, const BallComplement&) = default;
};

/// Complement of the open ellipse interior. In local coordinates
/// u = R(angle) (x - center) the obstacle is (u1/a1)^2 + (u2/a2)^2 < 1.
struct EllipseComplement {
    Vec2 center{};
    double a1 = 1.0;
    double a2 = 1.0;
    double angle = 0.0;
    friend bool operator==(const EllipseComplement&, const EllipseComplement&) = default;
};

/// Closed axis-aligned box.
struct Box {
    Vec2 lo{};
    Vec2 hi{};
    friend bool operator==(const Box&, const Box&) = default;

    bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
    Vec2 center() const { return 0.5 * (lo + hi); }
};

/// Complement of the thickened wall {x1 = 0, gap <= |x2| <= extent} + thickness*B.
/// The thickening is a pair of capsules, so the boundary is smooth everywhere.
struct WallWithExit {
    double gap = 0.6;
    double thickness = 0.1;
    double extent = kInf;
    friend bool operator==(const WallWithExit&, const WallWithExit&) = default;
};

using Primitive = std::variant<HalfSpace, Ball, BallComplement, EllipseComplement, Box, WallWithExit>;

/// Finite intersection of primitives (at least one).
struct Shape {
    std::vector<Primitive> parts;
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Largest r for which the primitive is r-prox-regular (infinite for convex sets).
double geometric_reach(const Primitive& p);
/// Minimum over the parts; exact when the parts' boundaries are separated.
double geometric_reach(const Shape& s);

/// Projection behaviour when the query lies at or beyond the declared reach.
enum class ReachPolicy {
    Strict,         ///< OutOfReach whenever distance >= reach
    UniqueNearest,  ///< OutOfReach only when the nearest point is not unique
};

class ProxRegularSet {
public:
    /// Throws InvalidArgument on an empty shape, a non-positive reach or
    /// malformed primitive parameters.
    ProxRegularSet(Shape shape, double reach);

    static ProxRegularSet with_geometric_reach(Shape shape);

    const Shape& shape() const { return shape_; }
    double reach() const { return reach_; }

    friend bool operator==(const ProxRegularSet&, const ProxRegularSet&) = default;

private:
    Shape shape_;
    double reach_;
};

double distance(const ProxRegularSet& set, Vec2 x);

/// Negative inside, positive outside; exact inside, a lower bound of the
/// distance outside an intersection.
double signed_distance(const ProxRegularSet& set, Vec2 x);

bool contains(const ProxRegularSet& set, Vec2 x, double tol = 1e-9);

Vec2 project(const ProxRegularSet& set, Vec2 x, ReachPolicy policy = ReachPolicy::Strict);

/// Unit outward normal at the boundary point nearest to `x` (x in the set or on
/// its boundary). Throws NonSmoothPoint where two boundary pieces meet.
Vec2 outward_normal(const ProxRegularSet& set, Vec2 x);

/// Boundary points of the set lying in `window`, roughly `n` of them.
std::vector<Vec2> boundary_samples(const ProxRegularSet& set, const Box& window, std::size_t n);

/// Sampled Hausdorff distance between a and b, both clipped to `workspace`.
double hausdorff(const ProxRegularSet& a, const ProxRegularSet& b, const Box& workspace,
                 std::size_t samples);

struct RBallReport {
    bool ok = true;
    double worst_excess = 0.0;  ///< max of <v, y-x> - |x-y|^2/(2r) over sampled pairs
    Vec2 boundary_point{};
    Vec2 set_point{};
    std::size_t pairs_checked = 0;
};

/// Sampled check of <v, y - x> <= |x - y|^2 / (2 r) for boundary x, outward unit
/// normal v and set points y, all inside `workspace`.
RBallReport r_ball_test(const ProxRegularSet& set, double r, const Box& workspace,
                        std::size_t samples);

// =============================================================================
// Moving sets
// =============================================================================

/// Rigid motion of one part: translation at constant velocity, and for
/// ellipses a rotation about their own centre (angle(t) = angle0 + rate*t).
struct Motion {
    Vec2 velocity{};
    double angular_rate = 0.0;
    friend bool operator==(const Motion&, const Motion&) = default;
};

struct MovingPart {
    Primitive shape;
    Motion motion{};
    friend bool operator==(const MovingPart&, const MovingPart&) = default;
};

class MovingSet {
public:
    /// `reach` and `lipschitz` may be NaN to take the geometric reach and the
    /// kinematic speed bound of the parts.
    MovingSet(std::vector<MovingPart> parts, double horizon, double lipschitz, double reach);

    const std::vector<MovingPart>& parts() const { return parts_; }
    double horizon() const { return horizon_; }
    double lipschitz() const { return lipschitz_; }
    double reach() const { return reach_; }
    bool is_static() const;

    /// Upper bound on boundary speed from the declared motions.
    double kinematic_speed_bound() const;

    friend bool operator==(const MovingSet&, const MovingSet&) = default;

private:
    std::vector<MovingPart> parts_;
    double horizon_;
    double lipschitz_;
    double reach_;
};

/// C(t). Throws TimeOutOfHorizon outside [0, horizon].
ProxRegularSet eval_moving(const MovingSet& ms, double t);

struct LipschitzReport {
    bool ok = true;
    double worst_ratio = 0.0;  ///< max d_H(C(t), C(s)) / |t - s| over sampled pairs
    double t = 0.0;
    double s = 0.0;
};

/// Sampled d_H(C(t), C(s)) <= M |t - s| + tol over `pairs` consecutive times.
LipschitzReport hausdorff_lipschitz_test(const MovingSet& ms, const Box& workspace,
                                         std::size_t pairs, std::size_t samples);

// Primitive-level helpers, exposed for tests and rendering.

/// Nearest point of the ellipse boundary to `p` in local (axis-aligned) coordinates.
struct EllipseFoot {
    Vec2 point{};
    double distance = 0.0;
    bool inside = false;     ///< p strictly inside the ellipse
    bool ambiguous = false;  ///< p on the medial axis: the foot is not unique
    int iterations = 0;
};
EllipseFoot ellipse_foot(double a1, double a2, Vec2 p);

/// World-frame point on the ellipse boundary at parameter theta.
Vec2 ellipse_point(const EllipseComplement& e, double theta);

}  // namespace msweep
