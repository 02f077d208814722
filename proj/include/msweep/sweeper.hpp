#pragma once

/// @file sweeper.hpp
/// @brief Catching-up scheme for measure sweeping processes and its diagnostics.
///
/// The horizon [0, T] is split into 2N intervals of length tau. On each window
/// [2k tau, (2k+2) tau] the cloud is first transported for one interval by the
/// doubled field 2 V(rho_{2k tau}) with the measure argument frozen, and then
/// every particle is projected onto C((2k+2) tau).

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "msweep/error.hpp"
#include "msweep/fields.hpp"
#include "msweep/geometry.hpp"
#include "msweep/transport.hpp"

namespace msweep {

enum class Integrator { Euler, RK4 };

const char* to_string(Integrator integrator);

struct RunOptions {
    double tau = 0.01;
    double horizon = 1.0;
    std::size_t substeps = 1;
    Integrator integrator = Integrator::RK4;
    ReachPolicy policy = ReachPolicy::Strict;
    /// Refuse to start unless 2 tau (L + M) < r.
    bool require_feasible_step = true;
};

/// Constants of the standing assumptions: field bound L, Hausdorff speed M, reach r.
struct SchemeConstants {
    double L = 0.0;
    double M = 0.0;
    double r = 0.0;
};

class Trajectory {
public:
    Trajectory(NonlocalField field, MovingSet moving_set, RunOptions options);

    const NonlocalField& field() const { return field_; }
    const MovingSet& moving_set() const { return moving_set_; }
    const RunOptions& options() const { return options_; }
    SchemeConstants constants() const;

    double tau() const { return options_.tau; }
    /// Number of mesh times 0, tau, ..., T (= 2N + 1 once complete).
    std::size_t mesh_size() const { return clouds_.size(); }
    double time(std::size_t j) const { return static_cast<double>(j) * options_.tau; }
    /// Mesh index of `t`; throws MeshMismatch if t is not a mesh time.
    std::size_t index_of(double t) const;

    const ParticleCloud& cloud(std::size_t j) const { return clouds_.at(j); }
    /// Velocity of each particle on [t_j, t_{j+1}]; at the last mesh time the
    /// transport velocity 2 V(rho_T) that would apply next.
    const std::vector<Vec2>& velocities(std::size_t j) const { return velocities_.at(j); }
    /// mesh_size() once the run completed, one less for an aborted run.
    std::size_t velocity_count() const { return velocities_.size(); }

    /// Largest |V| evaluated while integrating (all integrator stages).
    double observed_field_sup() const { return observed_sup_; }

    /// Point on the continuous interpolant: the frozen-field flow inside
    /// transport intervals, straight lines inside projection intervals.
    CurveState state_at(double t) const;

    /// Appends the next mesh time; used by the scheme.
    void push(ParticleCloud cloud, std::vector<Vec2> velocity_from_previous);
    void set_final_velocity(std::vector<Vec2> v);
    void note_field_magnitude(double m) { observed_sup_ = std::max(observed_sup_, m); }

private:
    NonlocalField field_;
    MovingSet moving_set_;
    RunOptions options_;
    std::vector<ParticleCloud> clouds_;
    std::vector<std::vector<Vec2>> velocities_;
    double observed_sup_ = 0.0;
};

/// Thrown when the scheme aborts mid-run; carries the trajectory computed so far.
class RunAborted : public Error {
public:
    RunAborted(ErrorCode code, const std::string& message, std::shared_ptr<const Trajectory> partial)
        : Error(code, message), partial_(std::move(partial)) {}
    const std::shared_ptr<const Trajectory>& partial() const { return partial_; }

private:
    std::shared_ptr<const Trajectory> partial_;
};

/// Advances every particle over `dt` under x' = 2 V(frozen)(x). `max_speed`, if
/// given, receives the largest |V| seen at any stage.
ParticleCloud transport_substep(const ParticleCloud& cloud, const ParticleCloud& frozen, const NonlocalField& field,
                                double dt, std::size_t substeps, Integrator integrator = Integrator::RK4,
                                double* max_speed = nullptr);

/// Runs the catching-up scheme. Errors: MeshMismatch when T is not 2N tau,
/// PreconditionViolated for an initial cloud outside C(0) or an infeasible
/// step, RunAborted(OutOfReach) when a projection fails.
Trajectory run(const ParticleCloud& initial, const NonlocalField& field, const MovingSet& moving_set,
               const RunOptions& options);

// =============================================================================
// Diagnostics
// =============================================================================

struct ResidualEntry {
    std::size_t particle = 0;
    double residual = 0.0;
    bool boundary = false;  ///< boundary-adjacent (cone) or boundary-riding (no-flux)
    bool skipped = false;   ///< normal undefined (NonSmoothPoint)
};

/// Membership of v - V in -N_C at the projection interval starting at mesh
/// index j (odd). v is the window velocity (x_{j+1} - x_{j-1}) / (2 tau), V the
/// field that drove the particle, 2V = recorded velocity at j-1. Interior
/// particles (depth > 2 tau (L + M)) report |v - V|; boundary-adjacent ones the
/// tangential part plus the positive outward part of v - V.
std::vector<ResidualEntry> normal_cone_residual(const Trajectory& traj, std::size_t j, double L);

/// |xi + v . eta| for particles riding the boundary through window j (odd),
/// with (xi, eta) the unit space-time outward normal of graph C at
/// (t_{j+1}, x_{j+1}) from finite differences of the signed distance.
/// Particles not riding the boundary report 0 with boundary = false.
std::vector<ResidualEntry> noflux_residual(const Trajectory& traj, std::size_t j);

/// RHS(t) - r(t) at every mesh time, with r = W2^2(rho_t, rho~_t) / 2,
/// Delta the sampled Hausdorff distance of the two moving sets and
/// RHS = (r(0) + (6L + 2M) int_0^t Delta) exp((4L + (3L + M) / (2r)) t).
/// Throws ConstantMismatch unless both runs share tau, mesh, L, M and r.
std::vector<double> stability_gap(const Trajectory& a, const Trajectory& b, const Box& workspace,
                                  std::size_t hausdorff_samples = 4096);

enum CheckFlags : unsigned {
    kCheckSupport = 1U << 0,
    kCheckSpeed = 1U << 1,
    kCheckCone = 1U << 2,
    kCheckNoFlux = 1U << 3,
    kCheckStability = 1U << 4,
    kCheckAll = 0x1FU,
};

struct InvariantRow {
    double t = 0.0;
    std::string name;
    double value = 0.0;
    double bound = 0.0;  ///< NaN for report-only rows
    bool pass = true;
};

struct DiagnosticsOptions {
    unsigned checks = kCheckSupport | kCheckSpeed;
    /// L used in the bounds; defaults to the field's declared constant.
    double L = 0.0;
    const Trajectory* companion = nullptr;  ///< second run for the stability estimate
    Box workspace{{-8.0, -8.0}, {8.0, 8.0}};
    std::size_t hausdorff_samples = 4096;
};

/// Rows (t, invariant, value, bound, pass):
///  support       max distance to C(t); <= 1e-9 at even, <= 2 tau (L + M) at odd mesh times
///  speed         max recorded |v| per interval; <= 2 (L + M) + 1e-9
///  speed_limit_fraction  fraction of intervals within 2L + M (report only)
///  w2_lipschitz  W2(rho_j, rho_{j+1}) (identity-coupling upper bound unless that
///                exceeds the limit); <= 2 (L + M) tau + 1e-6, so all pairs hold
///                by the triangle inequality
///  cone          max normal-cone residual; <= sqrt(2) L^2 tau + 1e-6 (1 + 2(L + M))
///  noflux        max no-flux residual (report only)
///  stability     slack of the stability estimate; >= -1e-6
std::vector<InvariantRow> check_invariants(const Trajectory& traj, const DiagnosticsOptions& options);

}  // namespace msweep
