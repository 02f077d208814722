#pragma once

/// @file fields.hpp
/// @brief Nonlocal velocity fields V(rho)(x) and empirical probing of their constants.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "msweep/geometry.hpp"
#include "msweep/transport.hpp"
#include "msweep/vec2.hpp"

namespace msweep {

/// w(x) = A x + b, A row-major.
struct AffineDrift {
    std::array<double, 4> matrix{};
    Vec2 offset{};
    friend bool operator==(const AffineDrift&, const AffineDrift&) = default;
};

/// w(x) = -(1 / (2|x|)) (1 + x1^2, 2 x1 x2); field lines are parabolas x2 = c (1 + x1^2).
/// Singular at the origin.
struct ParabolicDrift {
    friend bool operator==(const ParabolicDrift&, const ParabolicDrift&) = default;
};

using Drift = std::variant<AffineDrift, ParabolicDrift>;

/// w(x) + (1/N) sum_j K(x - y_j) with
/// K(x) = -A_a x / (2 a^2) exp(-|x|^2 / (2 a^2)) + A_r x / (2 r^2) exp(-|x|^2 / (2 r^2)).
struct MorseParams {
    double attraction_strength = 4.0;
    double repulsion_strength = 7.0;
    double attraction_range = 0.7071067811865476;
    double repulsion_range = 0.5;
    AffineDrift drift{};
    friend bool operator==(const MorseParams&, const MorseParams&) = default;
};

/// w(x) psi((1/N) sum_j eta(|x - y_j|)) with eta a bump of radius epsilon
/// normalised by beta and psi(s) = 1 - (2/pi) arctan(kappa s^2).
struct CongestionParams {
    double epsilon = 0.3;
    double kappa = 1000.0;
    double beta = 0.466;
    Drift drift = ParabolicDrift{};
    friend bool operator==(const CongestionParams&, const CongestionParams&) = default;
};

/// Local drift only, no interaction.
struct CustomDriftParams {
    AffineDrift drift{};
    friend bool operator==(const CustomDriftParams&, const CustomDriftParams&) = default;
};

using FieldParams = std::variant<MorseParams, CongestionParams, CustomDriftParams>;

Vec2 eval_drift(const Drift& drift, Vec2 x);
Vec2 morse_kernel(const MorseParams& p, Vec2 d);
double congestion_bump(const CongestionParams& p, double r);
double congestion_saturation(const CongestionParams& p, double density);

Vec2 eval_morse(const MorseParams& p, const ParticleCloud& cloud, Vec2 x);
Vec2 eval_congestion(const CongestionParams& p, const ParticleCloud& cloud, Vec2 x);

class NonlocalField {
public:
    /// Throws InvalidArgument on non-positive ranges/normalisations or a
    /// non-positive declared constant.
    NonlocalField(FieldParams params, double declared_L);

    const FieldParams& params() const { return params_; }
    double declared_L() const { return declared_L_; }
    std::string kind() const;

    Vec2 evaluate(const ParticleCloud& cloud, Vec2 x) const;

    friend bool operator==(const NonlocalField&, const NonlocalField&) = default;

private:
    FieldParams params_;
    double declared_L_;
};

struct ProbeWitness {
    Vec2 x{};
    Vec2 y{};
    std::size_t cloud_size = 0;
};

struct ProbeResult {
    double sup_bound = 0.0;
    double lip_x = 0.0;
    double lip_w2 = 0.0;
    ProbeWitness sup_witness;
    ProbeWitness lip_x_witness;
    ProbeWitness lip_w2_witness;
};

/// Random-sample lower estimates of sup |V|, the Lipschitz constant in x and the
/// W2-Lipschitz constant over clouds and points in `workspace`. Deterministic in
/// `seed`. Throws InvalidArgument for samples < 100 and, when `enforce` is set,
/// DeclaredBoundViolated if an estimate exceeds the declared constant.
ProbeResult probe_constants(const NonlocalField& field, const Box& workspace, std::size_t samples,
                            std::uint64_t seed = 0x5eedULL, bool enforce = true);

}  // namespace msweep
