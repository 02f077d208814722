#include "msweep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "msweep/error.hpp"

namespace msweep {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kFdStep = 1e-6;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt_point(Vec2 p) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

Vec2 to_local(const EllipseComplement& e, Vec2 x) { return rotate(x - e.center, e.angle); }
Vec2 to_world(const EllipseComplement& e, Vec2 u) { return e.center + rotate(u, -e.angle); }

// Core segments of the wall: upper [gap, extent] and lower [-extent, -gap] on x1 = 0.
struct WallCore {
    Vec2 point;   // nearest core point
    double dist;  // distance to it
    double other; // distance to the other core segment
};

WallCore wall_core(const WallWithExit& w, Vec2 x) {
    const Vec2 up{0.0, std::clamp(x.y, w.gap, w.extent)};
    const Vec2 lo{0.0, std::clamp(x.y, -w.extent, -w.gap)};
    const double du = norm(x - up);
    const double dl = norm(x - lo);
    return du <= dl ? WallCore{up, du, dl} : WallCore{lo, dl, du};
}

struct Foot {
    Vec2 point;       // nearest point of the primitive set
    bool ambiguous;   // nearest point not unique
};

// ---------------------------------------------------------------------------
// Primitive queries
// ---------------------------------------------------------------------------

double prim_signed_distance(const Primitive& prim, Vec2 x) {
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) { return dot(h.normal, x) - h.offset; },
            [&](const Ball& b) { return norm(x - b.center) - b.radius; },
            [&](const BallComplement& b) { return b.radius - norm(x - b.center); },
            [&](const EllipseComplement& e) {
                const EllipseFoot f = ellipse_foot(e.a1, e.a2, to_local(e, x));
                return f.inside ? f.distance : -f.distance;
            },
            [&](const Box& b) {
                const Vec2 q{std::max(b.lo.x - x.x, x.x - b.hi.x), std::max(b.lo.y - x.y, x.y - b.hi.y)};
                const Vec2 qp{std::max(q.x, 0.0), std::max(q.y, 0.0)};
                return norm(qp) + std::min(std::max(q.x, q.y), 0.0);
            },
            [&](const WallWithExit& w) { return w.thickness - wall_core(w, x).dist; },
        },
        prim);
}

// Nearest point of the primitive set; identity for points already inside.
Foot prim_nearest(const Primitive& prim, Vec2 x) {
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) {
                const double s = dot(h.normal, x) - h.offset;
                return Foot{s > 0.0 ? x - s * h.normal : x, false};
            },
            [&](const Ball& b) {
                const Vec2 d = x - b.center;
                const double r = norm(d);
                return Foot{r > b.radius ? b.center + (b.radius / r) * d : x, false};
            },
            [&](const BallComplement& b) {
                const Vec2 d = x - b.center;
                const double r = norm(d);
                if (r >= b.radius) return Foot{x, false};
                if (r <= 1e-13 * b.radius) return Foot{b.center + Vec2{b.radius, 0.0}, true};
                return Foot{b.center + (b.radius / r) * d, false};
            },
            [&](const EllipseComplement& e) {
                const EllipseFoot f = ellipse_foot(e.a1, e.a2, to_local(e, x));
                if (!f.inside) return Foot{x, false};
                return Foot{to_world(e, f.point), f.ambiguous};
            },
            [&](const Box& b) {
                return Foot{{std::clamp(x.x, b.lo.x, b.hi.x), std::clamp(x.y, b.lo.y, b.hi.y)}, false};
            },
            [&](const WallWithExit& w) {
                const WallCore c = wall_core(w, x);
                if (c.dist >= w.thickness) return Foot{x, false};
                if (c.dist <= 1e-13 * w.thickness) return Foot{c.point + Vec2{w.thickness, 0.0}, true};
                return Foot{c.point + (w.thickness / c.dist) * (x - c.point), false};
            },
        },
        prim);
}

// Outward unit normal at the boundary point nearest to x.
Vec2 prim_normal(const Primitive& prim, Vec2 x) {
    auto non_smooth = [&]() -> Vec2 {
        fail(ErrorCode::NonSmoothPoint, "outward normal undefined at " + fmt_point(x));
    };
    return std::visit(
        Overloaded{
            [&](const HalfSpace& h) { return h.normal; },
            [&](const Ball& b) {
                const Vec2 d = x - b.center;
                const double r = norm(d);
                if (r <= 1e-13 * b.radius) return non_smooth();
                return d / r;
            },
            [&](const BallComplement& b) {
                const Vec2 d = x - b.center;
                const double r = norm(d);
                if (r <= 1e-13 * b.radius) return non_smooth();
                return -d / r;
            },
            [&](const EllipseComplement& e) {
                const EllipseFoot f = ellipse_foot(e.a1, e.a2, to_local(e, x));
                if (f.ambiguous) return non_smooth();
                // gradient of f = 1 - (u1/a1)^2 - (u2/a2)^2 at the foot
                const Vec2 g{-2.0 * f.point.x / (e.a1 * e.a1), -2.0 * f.point.y / (e.a2 * e.a2)};
                const Vec2 w = rotate(g, -e.angle);
                return w / norm(w);
            },
            [&](const Box& b) {
                const Vec2 q{std::max(b.lo.x - x.x, x.x - b.hi.x), std::max(b.lo.y - x.y, x.y - b.hi.y)};
                const double tol = 1e-12 * (1.0 + norm(b.hi - b.lo));
                if (std::abs(q.x - q.y) <= tol || (q.x > tol && q.y > tol)) return non_smooth();
                const Vec2 c = b.center();
                if (q.x > q.y) return Vec2{x.x >= c.x ? 1.0 : -1.0, 0.0};
                return Vec2{0.0, x.y >= c.y ? 1.0 : -1.0};
            },
            [&](const WallWithExit& w) {
                const WallCore c = wall_core(w, x);
                if (c.dist <= 1e-13 * w.thickness || std::abs(c.other - c.dist) <= 1e-12) return non_smooth();
                return (c.point - x) / c.dist;
            },
        },
        prim);
}

void check_primitive(const Primitive& prim) {
    auto bad = [](const char* what) { fail(ErrorCode::InvalidArgument, what); };
    std::visit(Overloaded{
                   [&](const HalfSpace& h) {
                       if (!finite(h.normal) || std::abs(norm(h.normal) - 1.0) > 1e-12 || !std::isfinite(h.offset))
                           bad("half-space normal must be a finite unit vector");
                   },
                   [&](const Ball& b) {
                       if (!finite(b.center) || !(b.radius > 0.0)) bad("ball needs a finite centre and positive radius");
                   },
                   [&](const BallComplement& b) {
                       if (!finite(b.center) || !(b.radius > 0.0))
                           bad("ball complement needs a finite centre and positive radius");
                   },
                   [&](const EllipseComplement& e) {
                       if (!finite(e.center) || !(e.a1 > 0.0) || !(e.a2 > 0.0) || !std::isfinite(e.a1) ||
                           !std::isfinite(e.a2) || !std::isfinite(e.angle))
                           bad("ellipse needs positive finite semi-axes");
                   },
                   [&](const Box& b) {
                       if (!finite(b.lo) || !finite(b.hi) || !(b.lo.x < b.hi.x) || !(b.lo.y < b.hi.y))
                           bad("box needs lo < hi componentwise");
                   },
                   [&](const WallWithExit& w) {
                       if (!(w.thickness > 0.0) || !(w.gap > w.thickness) || !(w.extent > w.gap))
                           bad("wall needs 0 < thickness < gap < extent");
                   },
               },
               prim);
}

// ---------------------------------------------------------------------------
// Boundary sampling
// ---------------------------------------------------------------------------

// Liang-Barsky clip of p + s*d, s in [s0, s1], against the window.
bool clip(Vec2 p, Vec2 d, double& s0, double& s1, const Box& w) {
    const double pv[2] = {p.x, p.y};
    const double dv[2] = {d.x, d.y};
    const double lo[2] = {w.lo.x, w.lo.y};
    const double hi[2] = {w.hi.x, w.hi.y};
    for (int k = 0; k < 2; ++k) {
        if (dv[k] == 0.0) {
            if (pv[k] < lo[k] || pv[k] > hi[k]) return false;
            continue;
        }
        double a = (lo[k] - pv[k]) / dv[k];
        double b = (hi[k] - pv[k]) / dv[k];
        if (a > b) std::swap(a, b);
        s0 = std::max(s0, a);
        s1 = std::min(s1, b);
    }
    return s0 <= s1;
}

void sample_line(Vec2 p, Vec2 d, double s0, double s1, const Box& w, std::size_t n, std::vector<Vec2>& out) {
    if (!clip(p, d, s0, s1, w) || n == 0) return;
    if (n == 1 || s1 == s0) {
        out.push_back(p + (0.5 * (s0 + s1)) * d);
        return;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double s = s0 + (s1 - s0) * static_cast<double>(k) / static_cast<double>(n - 1);
        out.push_back(p + s * d);
    }
}

// Angular range of a circle (centre c, radius r) that can meet the window,
// from the window's circumscribed disc. Returns false if the circle misses it.
bool arc_range(Vec2 c, double r, const Box& w, double& mid, double& half) {
    const Vec2 m = w.center();
    const double rho = 0.5 * norm(w.hi - w.lo);
    const double dm = norm(m - c);
    mid = std::atan2(m.y - c.y, m.x - c.x);
    if (dm <= 1e-300) {
        half = std::numbers::pi;
        return rho >= r;
    }
    const double cosd = (dm * dm + r * r - rho * rho) / (2.0 * r * dm);
    if (cosd > 1.0) return false;
    half = cosd <= -1.0 ? std::numbers::pi : std::acos(cosd);
    return true;
}

// Circle points inside the window; `keep` filters pieces of the circle.
template <class Keep>
void sample_arc(Vec2 c, double r, const Box& w, std::size_t n, std::vector<Vec2>& out, Keep keep) {
    double mid = 0.0;
    double half = 0.0;
    if (!arc_range(c, r, w, mid, half) || n == 0) return;
    for (std::size_t k = 0; k < n; ++k) {
        const double th = mid - half + 2.0 * half * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        const Vec2 p = c + Vec2{r * std::cos(th), r * std::sin(th)};
        if (w.contains(p) && keep(p)) out.push_back(p);
    }
}

void sample_arc(Vec2 c, double r, const Box& w, std::size_t n, std::vector<Vec2>& out) {
    sample_arc(c, r, w, n, out, [](Vec2) { return true; });
}

void prim_boundary(const Primitive& prim, const Box& w, std::size_t n, std::vector<Vec2>& out) {
    const double diag = norm(w.hi - w.lo);
    std::visit(Overloaded{
                   [&](const HalfSpace& h) {
                       const Vec2 p0 = h.offset * h.normal;
                       const Vec2 t = perp(h.normal);
                       const double s = dot(w.center() - p0, t);
                       sample_line(p0, t, s - diag, s + diag, w, n, out);
                   },
                   [&](const Ball& b) { sample_arc(b.center, b.radius, w, n, out); },
                   [&](const BallComplement& b) { sample_arc(b.center, b.radius, w, n, out); },
                   [&](const EllipseComplement& e) {
                       // parameter window around the foot of the window centre
                       const double rho = 0.5 * diag;
                       const double amin = std::min(e.a1, e.a2);
                       double mid = 0.0;
                       double half = std::numbers::pi;
                       if (4.0 * rho < std::numbers::pi * amin) {
                           const EllipseFoot f = ellipse_foot(e.a1, e.a2, to_local(e, w.center()));
                           if (f.distance > rho) return;
                           mid = std::atan2(f.point.y / e.a2, f.point.x / e.a1);
                           half = 4.0 * rho / amin;
                       }
                       for (std::size_t k = 0; k < n; ++k) {
                           const double th =
                               mid - half + 2.0 * half * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
                           const Vec2 p = ellipse_point(e, th);
                           if (w.contains(p)) out.push_back(p);
                       }
                   },
                   [&](const Box& b) {
                       const std::size_t m = std::max<std::size_t>(n / 4, 2);
                       sample_line(b.lo, {1.0, 0.0}, 0.0, b.hi.x - b.lo.x, w, m, out);
                       sample_line({b.lo.x, b.hi.y}, {1.0, 0.0}, 0.0, b.hi.x - b.lo.x, w, m, out);
                       sample_line(b.lo, {0.0, 1.0}, 0.0, b.hi.y - b.lo.y, w, m, out);
                       sample_line({b.hi.x, b.lo.y}, {0.0, 1.0}, 0.0, b.hi.y - b.lo.y, w, m, out);
                   },
                   [&](const WallWithExit& wall) {
                       const std::size_t m = std::max<std::size_t>(n / 6, 2);
                       const double d = wall.thickness;
                       const double len = std::isfinite(wall.extent)
                                              ? wall.extent - wall.gap
                                              : std::abs(w.lo.y) + std::abs(w.hi.y) + diag;
                       for (double side : {1.0, -1.0}) {
                           const double y0 = side * wall.gap;
                           sample_line({d, y0}, {0.0, side}, 0.0, len, w, m, out);
                           sample_line({-d, y0}, {0.0, side}, 0.0, len, w, m, out);
                           // rounded end facing the exit
                           sample_arc({0.0, y0}, d, w, m, out, [&](Vec2 p) { return side * (p.y - y0) <= 0.0; });
                           if (std::isfinite(wall.extent)) {
                               const double y1 = side * wall.extent;
                               sample_arc({0.0, y1}, d, w, m, out, [&](Vec2 p) { return side * (p.y - y1) >= 0.0; });
                           }
                       }
                   },
               },
               prim);
}

// Nearest point of an intersection when projecting onto single violated parts
// does not yield a feasible point: sample the feasible boundary near x, then
// refine by resampling in shrinking windows around the incumbent.
Foot refine_nearest(const ProxRegularSet& set, Vec2 x, double radius) {
    constexpr std::size_t kSamples = 256;
    auto best_in = [&](const Box& window, Vec2 incumbent, double best) {
        for (Vec2 p : boundary_samples(set, window, kSamples)) {
            const double d = norm(p - x);
            if (d < best) {
                best = d;
                incumbent = p;
            }
        }
        return std::pair{incumbent, best};
    };
    Vec2 half{radius, radius};
    auto [p, d] = best_in(Box{x - half, x + half}, x, kInf);
    if (!std::isfinite(d)) fail(ErrorCode::OutOfReach, "no feasible boundary point near " + fmt_point(x));
    double win = 8.0 * radius / static_cast<double>(kSamples);
    for (int round = 0; round < 24 && win > 1e-14; ++round) {
        half = {win, win};
        std::tie(p, d) = best_in(Box{p - half, p + half}, p, d);
        win /= 8.0;
    }
    return Foot{p, false};
}

Foot set_nearest(const ProxRegularSet& set, Vec2 x) {
    const auto& parts = set.shape().parts;
    if (parts.size() == 1) return prim_nearest(parts.front(), x);

    double worst = -kInf;
    for (const auto& p : parts) worst = std::max(worst, prim_signed_distance(p, x));
    if (worst <= 0.0) return Foot{x, false};

    Foot best{x, false};
    double best_d = kInf;
    bool tie = false;
    for (const auto& part : parts) {
        if (prim_signed_distance(part, x) <= 0.0) continue;
        const Foot f = prim_nearest(part, x);
        bool feasible = true;
        for (const auto& other : parts)
            if (&other != &part && prim_signed_distance(other, f.point) > kFeasTol) feasible = false;
        if (!feasible) continue;
        const double d = norm(f.point - x);
        if (d < best_d - 1e-12) {
            best = f;
            best_d = d;
            tie = false;
        } else if (d <= best_d + 1e-12 && norm(f.point - best.point) > 1e-9) {
            tie = true;
        }
    }
    if (std::isfinite(best_d)) return Foot{best.point, best.ambiguous || tie};
    return refine_nearest(set, x, 2.0 * worst + 1.0);
}

}  // namespace

// =============================================================================
// Ellipse foot point
// =============================================================================

EllipseFoot ellipse_foot(double a1, double a2, Vec2 p) {
    const bool swapped = a1 < a2;
    const double e0 = swapped ? a2 : a1;
    const double e1 = swapped ? a1 : a2;
    const double sx = (swapped ? p.y : p.x) < 0.0 ? -1.0 : 1.0;
    const double sy = (swapped ? p.x : p.y) < 0.0 ? -1.0 : 1.0;
    const double y0 = std::abs(swapped ? p.y : p.x);
    const double y1 = std::abs(swapped ? p.x : p.y);

    EllipseFoot out;
    const double z0 = y0 / e0;
    const double z1 = y1 / e1;
    const double g = z0 * z0 + z1 * z1 - 1.0;
    out.inside = g < 0.0;

    const double axis_tol = 1e-13 * e0;
    double x0 = 0.0;
    double x1 = 0.0;
    if (g == 0.0) {
        x0 = y0;
        x1 = y1;
    } else if (y1 > axis_tol) {
        if (y0 > axis_tol) {
            // Stationarity of |y - x|^2 + t((x0/e0)^2 + (x1/e1)^2 - 1) gives
            // x_i = e_i^2 y_i / (t + e_i^2); with s = t / e1^2 the constraint
            // becomes G(s) = 0, convex and decreasing on (-1, inf).
            const double r0 = (e0 / e1) * (e0 / e1);
            const double n0 = r0 * z0;
            double lo = z1 - 1.0;
            double hi = out.inside ? 0.0 : std::hypot(n0, z1) - 1.0;
            // seed from the angular parameter of the query point
            double s = std::clamp(std::hypot(z0, z1) - 1.0, lo, hi);
            double width_mark = hi - lo;
            int it = 0;
            for (; it < 64; ++it) {
                const double q0 = n0 / (s + r0);
                const double q1 = z1 / (s + 1.0);
                const double G = q0 * q0 + q1 * q1 - 1.0;
                const double dG = -2.0 * (q0 * q0 / (s + r0) + q1 * q1 / (s + 1.0));
                if (std::abs(G) <= 1e-12) {
                    // final Newton step
                    const double polish = s - G / dG;
                    if (polish > -1.0) s = polish;
                    break;
                }
                if (G > 0.0) lo = s; else hi = s;
                double next = s - G / dG;
                bool bisect = !(next > lo && next < hi);
                if (it % 2 == 1) {
                    if (hi - lo > 0.5 * width_mark) bisect = true;
                    width_mark = hi - lo;
                }
                s = bisect ? 0.5 * (lo + hi) : next;
            }
            out.iterations = it + 1;
            x0 = r0 * y0 / (s + r0);
            x1 = y1 / (s + 1.0);
        } else {
            x0 = 0.0;
            x1 = e1;
            out.ambiguous = out.inside && y1 <= axis_tol;
        }
    } else {
        const double denom = e0 * e0 - e1 * e1;
        const double numer = e0 * y0;
        if (numer < denom) {
            const double xde0 = numer / denom;
            x0 = e0 * xde0;
            x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
            out.ambiguous = true;  // (x0, +x1) and (x0, -x1) are both nearest
        } else {
            x0 = e0;
            x1 = 0.0;
            out.ambiguous = denom == 0.0 && y0 <= axis_tol;
        }
    }
    out.distance = std::hypot(x0 - y0, x1 - y1);
    const Vec2 foot{sx * x0, sy * x1};
    out.point = swapped ? Vec2{foot.y, foot.x} : foot;
    return out;
}

Vec2 ellipse_point(const EllipseComplement& e, double theta) {
    return to_world(e, {e.a1 * std::cos(theta), e.a2 * std::sin(theta)});
}

// =============================================================================
// Sets
// =============================================================================

double geometric_reach(const Primitive& p) {
    return std::visit(Overloaded{
                          [](const HalfSpace&) { return kInf; },
                          [](const Ball&) { return kInf; },
                          [](const BallComplement& b) { return b.radius; },
                          [](const EllipseComplement& e) {
                              const double lo = std::min(e.a1, e.a2);
                              return lo * lo / std::max(e.a1, e.a2);
                          },
                          [](const Box&) { return kInf; },
                          [](const WallWithExit& w) { return w.thickness; },
                      },
                      p);
}

double geometric_reach(const Shape& s) {
    double r = kInf;
    for (const auto& p : s.parts) r = std::min(r, geometric_reach(p));
    return r;
}

ProxRegularSet::ProxRegularSet(Shape shape, double reach) : shape_(std::move(shape)), reach_(reach) {
    if (shape_.parts.empty()) fail(ErrorCode::InvalidArgument, "shape has no parts");
    for (const auto& p : shape_.parts) check_primitive(p);
    if (!(reach_ > 0.0)) fail(ErrorCode::InvalidArgument, "reach must be positive");
}

ProxRegularSet ProxRegularSet::with_geometric_reach(Shape shape) {
    const double r = geometric_reach(shape);
    return ProxRegularSet(std::move(shape), r);
}

double signed_distance(const ProxRegularSet& set, Vec2 x) {
    double s = -kInf;
    for (const auto& p : set.shape().parts) s = std::max(s, prim_signed_distance(p, x));
    return s;
}

double distance(const ProxRegularSet& set, Vec2 x) {
    const auto& parts = set.shape().parts;
    if (parts.size() == 1) return std::max(0.0, prim_signed_distance(parts.front(), x));
    return norm(set_nearest(set, x).point - x);
}

bool contains(const ProxRegularSet& set, Vec2 x, double tol) { return signed_distance(set, x) <= tol; }

Vec2 project(const ProxRegularSet& set, Vec2 x, ReachPolicy policy) {
    if (!finite(x)) fail(ErrorCode::InvalidArgument, "projection of a non-finite point");
    const Foot f = set_nearest(set, x);
    const double d = norm(f.point - x);
    if (policy == ReachPolicy::Strict && d >= set.reach()) {
        std::ostringstream os;
        os.precision(17);
        os << "point " << fmt_point(x) << " at distance " << d << " >= reach " << set.reach();
        fail(ErrorCode::OutOfReach, os.str());
    }
    if (f.ambiguous) fail(ErrorCode::OutOfReach, "nearest point of " + fmt_point(x) + " is not unique");
    return f.point;
}

Vec2 outward_normal(const ProxRegularSet& set, Vec2 x) {
    const auto& parts = set.shape().parts;
    if (parts.size() == 1) return prim_normal(parts.front(), x);

    // Composite: the two largest constituent signed distances must be apart
    // by more than the stencil can blur.
    double first = -kInf;
    double second = -kInf;
    for (const auto& p : parts) {
        const double s = prim_signed_distance(p, x);
        if (s > first) {
            second = first;
            first = s;
        } else if (s > second) {
            second = s;
        }
    }
    if (first - second <= 4.0 * kFdStep)
        fail(ErrorCode::NonSmoothPoint, "two boundary pieces meet near " + fmt_point(x));
    const Vec2 g{
        (signed_distance(set, x + Vec2{kFdStep, 0.0}) - signed_distance(set, x - Vec2{kFdStep, 0.0})) / (2 * kFdStep),
        (signed_distance(set, x + Vec2{0.0, kFdStep}) - signed_distance(set, x - Vec2{0.0, kFdStep})) / (2 * kFdStep)};
    const double n = norm(g);
    if (!(n > 0.0)) fail(ErrorCode::NonSmoothPoint, "degenerate signed-distance gradient at " + fmt_point(x));
    return g / n;
}

std::vector<Vec2> boundary_samples(const ProxRegularSet& set, const Box& window, std::size_t n) {
    const auto& parts = set.shape().parts;
    const std::size_t per = std::max<std::size_t>(n / parts.size(), 4);
    std::vector<Vec2> raw;
    for (const auto& p : parts) prim_boundary(p, window, per, raw);
    if (parts.size() == 1) return raw;
    std::vector<Vec2> out;
    out.reserve(raw.size());
    for (Vec2 p : raw)
        if (signed_distance(set, p) <= kFeasTol) out.push_back(p);
    return out;
}

namespace {

std::vector<Vec2> set_samples(const ProxRegularSet& set, const Box& ws, std::size_t samples) {
    std::vector<Vec2> pts = boundary_samples(set, ws, samples / 2);
    std::vector<Vec2> extra;
    prim_boundary(ws, ws, samples / 4, extra);
    const auto grid = static_cast<std::size_t>(std::sqrt(static_cast<double>(samples / 4)));
    for (std::size_t i = 0; i < grid; ++i)
        for (std::size_t j = 0; j < grid; ++j)
            extra.push_back({ws.lo.x + (ws.hi.x - ws.lo.x) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid),
                             ws.lo.y + (ws.hi.y - ws.lo.y) * (static_cast<double>(j) + 0.5) / static_cast<double>(grid)});
    for (Vec2 p : extra)
        if (contains(set, p)) pts.push_back(p);
    return pts;
}

double directed_hausdorff(const ProxRegularSet& a, const ProxRegularSet& b, const Box& ws, std::size_t samples) {
    double h = 0.0;
    for (Vec2 p : set_samples(a, ws, samples)) h = std::max(h, distance(b, p));
    return h;
}

}  // namespace

double hausdorff(const ProxRegularSet& a, const ProxRegularSet& b, const Box& workspace, std::size_t samples) {
    if (a.shape() == b.shape()) return 0.0;
    return std::max(directed_hausdorff(a, b, workspace, samples), directed_hausdorff(b, a, workspace, samples));
}

RBallReport r_ball_test(const ProxRegularSet& set, double r, const Box& workspace, std::size_t samples) {
    RBallReport rep;
    rep.worst_excess = -kInf;
    const std::vector<Vec2> bnd = boundary_samples(set, workspace, samples);
    const std::vector<Vec2> pts = set_samples(set, workspace, samples);
    for (Vec2 x : bnd) {
        Vec2 v;
        try {
            v = outward_normal(set, x);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NonSmoothPoint) continue;
            throw;
        }
        for (Vec2 y : pts) {
            const Vec2 d = y - x;
            const double excess = dot(v, d) - norm2(d) / (2.0 * r);
            ++rep.pairs_checked;
            if (excess > rep.worst_excess) {
                rep.worst_excess = excess;
                rep.boundary_point = x;
                rep.set_point = y;
            }
        }
    }
    rep.ok = rep.worst_excess <= 1e-9;
    return rep;
}

// =============================================================================
// Moving sets
// =============================================================================

MovingSet::MovingSet(std::vector<MovingPart> parts, double horizon, double lipschitz, double reach)
    : parts_(std::move(parts)), horizon_(horizon), lipschitz_(lipschitz), reach_(reach) {
    if (parts_.empty()) fail(ErrorCode::InvalidArgument, "moving set has no parts");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
    for (const auto& p : parts_) {
        check_primitive(p.shape);
        if (!finite(p.motion.velocity) || !std::isfinite(p.motion.angular_rate))
            fail(ErrorCode::InvalidArgument, "motion parameters must be finite");
        const bool rotates = p.motion.angular_rate != 0.0;
        const bool translates = p.motion.velocity != Vec2{};
        if (rotates && (std::holds_alternative<HalfSpace>(p.shape) || std::holds_alternative<Box>(p.shape)))
            fail(ErrorCode::InvalidArgument, "only discs and ellipses may rotate");
        if ((rotates || translates) && std::holds_alternative<WallWithExit>(p.shape))
            fail(ErrorCode::InvalidArgument, "the wall is static");
    }
    Shape base;
    for (const auto& p : parts_) base.parts.push_back(p.shape);
    if (std::isnan(reach_)) reach_ = geometric_reach(base);
    if (std::isnan(lipschitz_)) lipschitz_ = kinematic_speed_bound();
    if (!(reach_ > 0.0)) fail(ErrorCode::InvalidArgument, "reach must be positive");
    if (!(lipschitz_ >= 0.0)) fail(ErrorCode::InvalidArgument, "Lipschitz constant must be non-negative");
}

bool MovingSet::is_static() const {
    return std::all_of(parts_.begin(), parts_.end(), [](const MovingPart& p) {
        return p.motion.velocity == Vec2{} && p.motion.angular_rate == 0.0;
    });
}

double MovingSet::kinematic_speed_bound() const {
    double m = 0.0;
    for (const auto& p : parts_) {
        double v = norm(p.motion.velocity);
        if (const auto* h = std::get_if<HalfSpace>(&p.shape)) v = std::abs(dot(h->normal, p.motion.velocity));
        if (const auto* e = std::get_if<EllipseComplement>(&p.shape))
            v += std::abs(p.motion.angular_rate) * std::max(e->a1, e->a2);
        m = std::max(m, v);
    }
    return m;
}

ProxRegularSet eval_moving(const MovingSet& ms, double t) {
    const double slack = 1e-12 * std::max(1.0, ms.horizon());
    if (!(t >= -slack && t <= ms.horizon() + slack)) {
        std::ostringstream os;
        os << "t = " << t << " outside [0, " << ms.horizon() << "]";
        fail(ErrorCode::TimeOutOfHorizon, os.str());
    }
    t = std::clamp(t, 0.0, ms.horizon());
    Shape s;
    s.parts.reserve(ms.parts().size());
    for (const auto& part : ms.parts()) {
        const Vec2 shift = t * part.motion.velocity;
        s.parts.push_back(std::visit(Overloaded{
                                         [&](HalfSpace h) -> Primitive {
                                             h.offset += dot(h.normal, shift);
                                             return h;
                                         },
                                         [&](Ball b) -> Primitive {
                                             b.center += shift;
                                             return b;
                                         },
                                         [&](BallComplement b) -> Primitive {
                                             b.center += shift;
                                             return b;
                                         },
                                         [&](EllipseComplement e) -> Primitive {
                                             e.center += shift;
                                             e.angle += part.motion.angular_rate * t;
                                             return e;
                                         },
                                         [&](Box b) -> Primitive {
                                             b.lo += shift;
                                             b.hi += shift;
                                             return b;
                                         },
                                         [&](WallWithExit w) -> Primitive { return w; },
                                     },
                                     part.shape));
    }
    return ProxRegularSet(std::move(s), ms.reach());
}

LipschitzReport hausdorff_lipschitz_test(const MovingSet& ms, const Box& workspace, std::size_t pairs,
                                         std::size_t samples) {
    LipschitzReport rep;
    if (ms.is_static() || pairs == 0) return rep;
    const double dt = ms.horizon() / static_cast<double>(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
        const double t = dt * static_cast<double>(k);
        const double s = dt * static_cast<double>(k + 1);
        const double h = hausdorff(eval_moving(ms, t), eval_moving(ms, s), workspace, samples);
        const double ratio = h / (s - t);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.t = t;
            rep.s = s;
        }
        if (h > ms.lipschitz() * (s - t) + 1e-9) rep.ok = false;
    }
    return rep;
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::OutOfReach: return "OutOfReach";
        case ErrorCode::NonSmoothPoint: return "NonSmoothPoint";
        case ErrorCode::TimeOutOfHorizon: return "TimeOutOfHorizon";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorCode::DriftSingularity: return "DriftSingularity";
        case ErrorCode::DeclaredBoundViolated: return "DeclaredBoundViolated";
        case ErrorCode::MeshMismatch: return "MeshMismatch";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::ConstantMismatch: return "ConstantMismatch";
        case ErrorCode::SamplingStarved: return "SamplingStarved";
        case ErrorCode::EmptyAdmissibleSet: return "EmptyAdmissibleSet";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace msweep
