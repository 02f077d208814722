/* msweep C API: scenarios, runs, diagnostics and artifacts behind opaque handles.
 *
 * Every function returning msw_status reports failures through its return
 * value; msw_last_error() then holds a message for the calling thread.
 * Handles are not shared between threads unless only read.
 */
#ifndef MSWEEP_MSWEEP_H
#define MSWEEP_MSWEEP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MSW_API __declspec(dllexport)
#else
#define MSW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msw_status {
    MSW_OK = 0,
    MSW_INVALID_ARGUMENT,
    MSW_OUT_OF_REACH,
    MSW_NON_SMOOTH_POINT,
    MSW_TIME_OUT_OF_HORIZON,
    MSW_SIZE_MISMATCH,
    MSW_PARAMETER_OUT_OF_RANGE,
    MSW_DRIFT_SINGULARITY,
    MSW_DECLARED_BOUND_VIOLATED,
    MSW_MESH_MISMATCH,
    MSW_PRECONDITION_VIOLATED,
    MSW_CONSTANT_MISMATCH,
    MSW_SAMPLING_STARVED,
    MSW_EMPTY_ADMISSIBLE_SET,
    MSW_PARSE_ERROR,
    MSW_VALIDATION_ERROR,
    MSW_IO_ERROR,
    MSW_INTERNAL_ERROR
} msw_status;

typedef enum msw_integrator { MSW_EULER = 0, MSW_RK4 = 1 } msw_integrator;

/* Diagnostic selection bits for msw_check. */
enum {
    MSW_CHECK_SUPPORT = 1u << 0,
    MSW_CHECK_SPEED = 1u << 1,
    MSW_CHECK_CONE = 1u << 2,
    MSW_CHECK_NOFLUX = 1u << 3,
    MSW_CHECK_STABILITY = 1u << 4,
    MSW_CHECK_ALL = 0x1Fu
};

typedef struct msw_scenario msw_scenario;
typedef struct msw_trajectory msw_trajectory;
typedef struct msw_diagnostics msw_diagnostics;

typedef struct msw_scenario_info {
    double tau;
    double horizon;
    size_t particles;
    uint64_t seed;
    size_t substeps;
    msw_integrator integrator;
    double L;     /* declared field constant */
    double M;     /* boundary speed (declared or kinematic) */
    double reach; /* declared or geometric */
    int strict;   /* 1 for strict validation, 0 for advisory */
} msw_scenario_info;

typedef struct msw_diag_row {
    double t;
    const char* invariant; /* owned by the diagnostics handle */
    double value;
    double bound; /* NaN for report-only rows */
    int pass;
} msw_diag_row;

MSW_API const char* msw_version(void);
MSW_API const char* msw_status_name(msw_status status);
/* Message of the last failure on this thread; empty after success. */
MSW_API const char* msw_last_error(void);
MSW_API void msw_string_free(char* s);

/* ---- scenarios ---------------------------------------------------------- */

/* Reads, parses and validates a scenario file. */
MSW_API msw_status msw_scenario_load(const char* path, msw_scenario** out);
/* Parses scenario text without validating it. */
MSW_API msw_status msw_scenario_parse(const char* text, msw_scenario** out);
MSW_API msw_status msw_scenario_preset(const char* name, msw_scenario** out);
/* Newline-separated preset names; free with msw_string_free. */
MSW_API msw_status msw_preset_names(char** out);
MSW_API msw_status msw_scenario_validate(const msw_scenario* s);
MSW_API msw_status msw_scenario_info_get(const msw_scenario* s, msw_scenario_info* out);
MSW_API msw_status msw_scenario_set_tau(msw_scenario* s, double tau);
MSW_API msw_status msw_scenario_set_particles(msw_scenario* s, size_t n);
MSW_API msw_status msw_scenario_set_seed(msw_scenario* s, uint64_t seed);
MSW_API msw_status msw_scenario_set_substeps(msw_scenario* s, size_t substeps);
MSW_API msw_status msw_scenario_set_integrator(msw_scenario* s, msw_integrator integrator);
/* Scenario text; free with msw_string_free. */
MSW_API msw_status msw_scenario_to_string(const msw_scenario* s, char** out);
MSW_API msw_status msw_scenario_write(const msw_scenario* s, const char* path);
MSW_API int msw_scenario_equal(const msw_scenario* a, const msw_scenario* b);
MSW_API void msw_scenario_free(msw_scenario* s);

/* ---- runs --------------------------------------------------------------- */

/* Samples the initial cloud and runs the scheme. When the run aborts the
 * status is the failure and *out, if non-null, holds the partial trajectory. */
MSW_API msw_status msw_run(const msw_scenario* s, msw_trajectory** out);
MSW_API size_t msw_trajectory_mesh_size(const msw_trajectory* t);
MSW_API size_t msw_trajectory_particles(const msw_trajectory* t);
MSW_API double msw_trajectory_time(const msw_trajectory* t, size_t j);
/* Copies 2 * particles coordinates of mesh time j into xy. */
MSW_API msw_status msw_trajectory_positions(const msw_trajectory* t, size_t j, double* xy, size_t len);
MSW_API msw_status msw_trajectory_velocities(const msw_trajectory* t, size_t j, double* v, size_t len);
/* Largest of the declared L and every field magnitude met during the run. */
MSW_API double msw_trajectory_effective_l(const msw_trajectory* t);
/* Fraction of particles in the scenario's region at mesh time j. */
MSW_API msw_status msw_trajectory_mass_in_region(const msw_trajectory* t, size_t j, double* out);
MSW_API msw_status msw_trajectory_write_csv(const msw_trajectory* t, const char* path);
/* Writes frame_<j>.svg for every `every`-th mesh time and the last one. */
MSW_API msw_status msw_render_frames(const msw_trajectory* t, const char* dir, size_t every, size_t* written);
MSW_API void msw_trajectory_free(msw_trajectory* t);

/* ---- diagnostics -------------------------------------------------------- */

/* Evaluates the selected invariants. Strict scenarios use the declared L,
 * advisory ones the effective L. MSW_CHECK_STABILITY needs a companion. */
MSW_API msw_status msw_check(const msw_trajectory* t, const msw_trajectory* companion, unsigned checks,
                             msw_diagnostics** out);
MSW_API size_t msw_diagnostics_count(const msw_diagnostics* d);
MSW_API msw_status msw_diagnostics_row(const msw_diagnostics* d, size_t i, msw_diag_row* out);
/* Index of the first failing row, or msw_diagnostics_count() when all pass. */
MSW_API size_t msw_diagnostics_first_failure(const msw_diagnostics* d);
MSW_API msw_status msw_diagnostics_write_csv(const msw_diagnostics* d, const char* path);
MSW_API void msw_diagnostics_free(msw_diagnostics* d);

/* ---- experiments -------------------------------------------------------- */

/* Mass in the dangerous region at T for the no-obstacle, stationary and
 * moving exit configurations, in that order. */
MSW_API msw_status msw_braess_suite(uint64_t seed, msw_integrator integrator, double out[3]);
/* Grid search over the elliptic obstacle of `base`; writes the results table
 * (cx,cy,a1,a2,omega,admissible,objective,runtime_s) to csv_path. best[5]
 * receives cx, cy, a1, a2, omega of the winner. */
MSW_API msw_status msw_optimize(const msw_scenario* base, const char* grid_path, const char* csv_path,
                                double best[5], double* best_objective);
/* Exact W2 between two cloud CSV files (x1,x2 columns; trajectories use their last time). */
MSW_API msw_status msw_w2_csv(const char* a_path, const char* b_path, double* out);

#ifdef __cplusplus
}
#endif

#endif /* MSWEEP_MSWEEP_H */
