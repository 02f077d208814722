#include "msweep/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "msweep/error.hpp"

namespace msweep {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_affine(const AffineDrift& d) {
    for (double a : d.matrix)
        if (!std::isfinite(a)) fail(ErrorCode::InvalidArgument, "drift matrix must be finite");
    if (!finite(d.offset)) fail(ErrorCode::InvalidArgument, "drift offset must be finite");
}

}  // namespace

Vec2 eval_drift(const Drift& drift, Vec2 x) {
    return std::visit(Overloaded{
                          [&](const AffineDrift& a) {
                              return Vec2{a.matrix[0] * x.x + a.matrix[1] * x.y + a.offset.x,
                                          a.matrix[2] * x.x + a.matrix[3] * x.y + a.offset.y};
                          },
                          [&](const ParabolicDrift&) {
                              const double r = norm(x);
                              if (r < 1e-9) {
                                  std::ostringstream os;
                                  os.precision(17);
                                  os << "parabolic drift is singular at the origin; queried at (" << x.x << ", "
                                     << x.y << ")";
                                  fail(ErrorCode::DriftSingularity, os.str());
                              }
                              const double s = -1.0 / (2.0 * r);
                              return Vec2{s * (1.0 + x.x * x.x), s * (2.0 * x.x * x.y)};
                          },
                      },
                      drift);
}

Vec2 morse_kernel(const MorseParams& p, Vec2 d) {
    const double r2 = norm2(d);
    const double a2 = p.attraction_range * p.attraction_range;
    const double q2 = p.repulsion_range * p.repulsion_range;
    const double att = -p.attraction_strength / (2.0 * a2) * std::exp(-r2 / (2.0 * a2));
    const double rep = p.repulsion_strength / (2.0 * q2) * std::exp(-r2 / (2.0 * q2));
    return (att + rep) * d;
}

double congestion_bump(const CongestionParams& p, double r) {
    if (!(r < p.epsilon)) return 0.0;
    const double q = std::min(r / p.epsilon, 1.0 - 1e-12);
    return std::exp(1.0 / (q * q - 1.0)) / p.beta;
}

double congestion_saturation(const CongestionParams& p, double density) {
    return 1.0 - (2.0 / std::numbers::pi) * std::atan(p.kappa * density * density);
}

Vec2 eval_morse(const MorseParams& p, const ParticleCloud& cloud, Vec2 x) {
    Vec2 sum{};
    for (std::size_t j = 0; j < cloud.size(); ++j) sum += morse_kernel(p, x - cloud.at(j));
    return eval_drift(p.drift, x) + sum / static_cast<double>(cloud.size());
}

Vec2 eval_congestion(const CongestionParams& p, const ParticleCloud& cloud, Vec2 x) {
    const Vec2 w = eval_drift(p.drift, x);
    const double eps2 = p.epsilon * p.epsilon;
    double density = 0.0;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
        const double r2 = norm2(x - cloud.at(j));
        if (r2 < eps2) density += congestion_bump(p, std::sqrt(r2));
    }
    density /= static_cast<double>(cloud.size());
    return congestion_saturation(p, density) * w;
}

NonlocalField::NonlocalField(FieldParams params, double declared_L)
    : params_(std::move(params)), declared_L_(declared_L) {
    if (!(declared_L_ > 0.0) || !std::isfinite(declared_L_))
        fail(ErrorCode::InvalidArgument, "declared constant L must be positive and finite");
    std::visit(Overloaded{
                   [](const MorseParams& m) {
                       if (!(m.attraction_range > 0.0) || !(m.repulsion_range > 0.0) ||
                           !std::isfinite(m.attraction_strength) || !std::isfinite(m.repulsion_strength))
                           fail(ErrorCode::InvalidArgument, "Morse ranges must be positive");
                       check_affine(m.drift);
                   },
                   [](const CongestionParams& c) {
                       if (!(c.epsilon > 0.0) || !(c.beta > 0.0) || !(c.kappa >= 0.0))
                           fail(ErrorCode::InvalidArgument, "congestion needs epsilon > 0, beta > 0, kappa >= 0");
                       if (const auto* a = std::get_if<AffineDrift>(&c.drift)) check_affine(*a);
                   },
                   [](const CustomDriftParams& c) { check_affine(c.drift); },
               },
               params_);
}

std::string NonlocalField::kind() const {
    return std::visit(Overloaded{
                          [](const MorseParams&) { return std::string("morse"); },
                          [](const CongestionParams&) { return std::string("congestion"); },
                          [](const CustomDriftParams&) { return std::string("drift"); },
                      },
                      params_);
}

Vec2 NonlocalField::evaluate(const ParticleCloud& cloud, Vec2 x) const {
    return std::visit(Overloaded{
                          [&](const MorseParams& m) { return eval_morse(m, cloud, x); },
                          [&](const CongestionParams& c) { return eval_congestion(c, cloud, x); },
                          [&](const CustomDriftParams& c) { return eval_drift(c.drift, x); },
                      },
                      params_);
}

// =============================================================================
// Probing
// =============================================================================

namespace {

double interaction_scale(const FieldParams& params) {
    return std::visit(Overloaded{
                          [](const MorseParams& m) { return 2.0 * std::max(m.attraction_range, m.repulsion_range); },
                          [](const CongestionParams& c) { return 1.2 * c.epsilon; },
                          [](const CustomDriftParams&) { return 1.0; },
                      },
                      params);
}

std::string describe(const char* what, double value, double bound, const ProbeWitness& w) {
    std::ostringstream os;
    os.precision(17);
    os << what << " estimate " << value << " exceeds declared L = " << bound << " (x = (" << w.x.x << ", " << w.x.y
       << "), y = (" << w.y.x << ", " << w.y.y << "), cloud size " << w.cloud_size << ")";
    return os.str();
}

}  // namespace

ProbeResult probe_constants(const NonlocalField& field, const Box& ws, std::size_t samples, std::uint64_t seed,
                            bool enforce) {
    if (samples < 100) fail(ErrorCode::InvalidArgument, "probe needs at least 100 samples");
    std::mt19937_64 gen(seed);
    auto u01 = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    auto in_box = [&]() { return Vec2{ws.lo.x + (ws.hi.x - ws.lo.x) * u01(), ws.lo.y + (ws.hi.y - ws.lo.y) * u01()}; };
    auto clamp_box = [&](Vec2 p) {
        return Vec2{std::clamp(p.x, ws.lo.x, ws.hi.x), std::clamp(p.y, ws.lo.y, ws.hi.y)};
    };
    auto direction = [&]() {
        const double th = 2.0 * std::numbers::pi * u01();
        return Vec2{std::cos(th), std::sin(th)};
    };

    const double scale = interaction_scale(field.params());
    const double h = 1e-4 * scale;
    const std::size_t sizes[] = {1, 2, 4, 8};

    ProbeResult res;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t n = sizes[s % 4];
        std::vector<Vec2> pts(n);
        for (auto& p : pts) p = in_box();
        const std::size_t anchor = static_cast<std::size_t>(u01() * static_cast<double>(n)) % n;
        Vec2 x = in_box();
        if (gen() & 1U) {
            const double r = u01();
            x = clamp_box(pts[anchor] + (scale * r * r * r) * direction());
        }
        const ParticleCloud cloud = ParticleCloud::from_points(pts);
        try {
            const Vec2 vx = field.evaluate(cloud, x);
            const double sup = norm(vx);
            if (sup > res.sup_bound) {
                res.sup_bound = sup;
                res.sup_witness = {x, x, n};
            }

            const Vec2 y = x + h * direction();
            const double lx = norm(field.evaluate(cloud, y) - vx) / norm(y - x);
            if (lx > res.lip_x) {
                res.lip_x = lx;
                res.lip_x_witness = {x, y, n};
            }

            std::vector<Vec2> moved = pts;
            moved[anchor] += h * direction();
            const ParticleCloud other = ParticleCloud::from_points(moved);
            const double wd = w2(cloud, other).distance;
            if (wd > 0.0) {
                const double lw = norm(field.evaluate(other, x) - vx) / wd;
                if (lw > res.lip_w2) {
                    res.lip_w2 = lw;
                    res.lip_w2_witness = {x, moved[anchor], n};
                }
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DriftSingularity) throw;
        }
    }

    if (enforce) {
        const double L = field.declared_L();
        if (res.sup_bound > L)
            fail(ErrorCode::DeclaredBoundViolated, describe("sup |V|", res.sup_bound, L, res.sup_witness));
        if (res.lip_x > L)
            fail(ErrorCode::DeclaredBoundViolated, describe("Lipschitz-in-x", res.lip_x, L, res.lip_x_witness));
        if (res.lip_w2 > L)
            fail(ErrorCode::DeclaredBoundViolated, describe("W2-Lipschitz", res.lip_w2, L, res.lip_w2_witness));
    }
    return res;
}

}  // namespace msweep
