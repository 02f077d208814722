#pragma once

/// @file scenarios.hpp
/// @brief Scenario descriptions, presets, initial sampling, evacuation metrics
/// and the obstacle-placement search.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msweep/fields.hpp"
#include "msweep/geometry.hpp"
#include "msweep/sweeper.hpp"

namespace msweep {

enum class Validation {
    Strict,    ///< every standing assumption is checked before a run
    Advisory,  ///< step feasibility and field bounds are reported, not enforced
};

enum class InitialKind { Gaussian, Uniform, Points };

struct InitialSpec {
    InitialKind kind = InitialKind::Gaussian;
    Vec2 mean{};
    std::array<double, 4> covariance{1.0, 0.0, 0.0, 1.0};  ///< row-major, symmetric positive definite
    Box box{{0.0, 0.0}, {1.0, 1.0}};
    bool stratified = false;  ///< jittered grid instead of independent uniform draws
    std::vector<Vec2> points;
    friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

enum class RegionKind { HalfSpace, Box };

/// Open half-plane {<normal, x> > offset} or closed box.
struct RegionSpec {
    RegionKind kind = RegionKind::HalfSpace;
    Vec2 normal{1.0, 0.0};
    double offset = 0.0;
    Box box{};
    friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

struct Scenario {
    std::string name;
    FieldParams field = MorseParams{};
    double L = 1.0;
    std::vector<MovingPart> obstacles;
    std::optional<WallWithExit> wall;
    InitialSpec initial;
    std::size_t particles = 300;
    double tau = 0.01;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::size_t substeps = 1;
    Integrator integrator = Integrator::RK4;
    Box workspace{{-8.0, -8.0}, {8.0, 8.0}};
    std::optional<double> reach;      ///< empty: geometric reach
    std::optional<double> lipschitz;  ///< empty: kinematic speed bound
    Validation validation = Validation::Strict;
    RegionSpec region;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

NonlocalField make_field(const Scenario& s);
/// Obstacles followed by the wall, over [0, horizon].
MovingSet make_moving_set(const Scenario& s);
/// Strict scenarios project with ReachPolicy::Strict and require a feasible
/// step; advisory ones use ReachPolicy::UniqueNearest.
RunOptions make_run_options(const Scenario& s);

/// Draws `n` particles with a 64-bit Mersenne Twister seeded by `seed`.
/// Gaussian: Box-Muller with a Cholesky factor; uniform: independent draws or a
/// jittered grid. When `region` is given, draws outside it are redrawn and
/// SamplingStarved is thrown once more than 99% of the draws were rejected.
/// Explicit points are returned unchanged (and must lie in `region`).
ParticleCloud sample_initial(const InitialSpec& spec, std::size_t n, std::uint64_t seed,
                             const ProxRegularSet* region = nullptr);

/// Fraction of particles in the region.
double mass_in_region(const ParticleCloud& cloud, const RegionSpec& region);

std::vector<std::string> preset_names();
/// Throws InvalidArgument for an unknown name.
Scenario preset(std::string_view name);

/// Runs every load-time check; throws ValidationError naming the first failing
/// check (mesh, tau-feasibility, reach, hausdorff-lipschitz, field-probe).
void validate(const Scenario& s);

/// Samples the initial cloud and runs the scheme.
Trajectory simulate(const Scenario& s);

/// Largest of the declared L and every field magnitude met during the run.
double effective_L(const Trajectory& traj);

struct BraessResult {
    double none = 0.0;
    double stationary = 0.0;
    double moving = 0.0;
};

/// Mass in the dangerous region at the horizon for the three exit configurations.
BraessResult braess_suite(std::uint64_t seed, Integrator integrator = Integrator::RK4);

struct ObstacleParams {
    Vec2 center{};
    Vec2 axes{1.0, 1.0};
    double omega = 0.0;
    friend bool operator==(const ObstacleParams&, const ObstacleParams&) = default;
};

struct GridEvaluation {
    ObstacleParams params;
    bool admissible = false;
    double objective = 0.0;  ///< NaN when inadmissible
    double runtime = 0.0;    ///< seconds
};

struct OptimizeResult {
    ObstacleParams best;
    double best_objective = 0.0;
    std::vector<GridEvaluation> table;  ///< admissible points by objective, then the rest
};

/// Exhaustive search over the elliptic obstacle of `base` (which must have
/// exactly one ellipse-complement obstacle). A grid point is admissible when the
/// obstacle lies wholly inside or wholly outside the workspace and the initial
/// draw lies in C(0). Ties break lexicographically on (center, axes, omega).
/// Throws EmptyAdmissibleSet when no point is admissible.
OptimizeResult optimize_obstacle(const Scenario& base, const std::vector<ObstacleParams>& grid);

/// Grid file: one `cx cy a1 a2 omega` per line; `#` starts a comment.
std::vector<ObstacleParams> parse_grid(std::string_view text);

// Scenario text format.

/// Throws ParseError with line and column.
Scenario parse_scenario(std::string_view text);
std::string serialize(const Scenario& s);
/// Reads, parses and validates. Throws IoError, ParseError or ValidationError.
Scenario load_scenario(const std::string& path);

}  // namespace msweep
