#ifndef HYSTERA_H
#define HYSTERA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HysteraStatus {
  HYSTERA_STATUS_OK = 0,
  HYSTERA_STATUS_NULL_POINTER = 1,
  HYSTERA_STATUS_INVALID_ARGUMENT = 2,
  HYSTERA_STATUS_DOMAIN = 3,
  HYSTERA_STATUS_NUMERIC = 4,
  HYSTERA_STATUS_INCONSISTENT = 5,
  HYSTERA_STATUS_DEGENERATE = 6,
  HYSTERA_STATUS_PRECONDITION = 7,
  HYSTERA_STATUS_CORRUPTED = 8,
  HYSTERA_STATUS_NON_CONTRACTION = 9,
  HYSTERA_STATUS_ABORTED = 10,
  HYSTERA_STATUS_CONFIG = 11,
  HYSTERA_STATUS_IO = 12,
  HYSTERA_STATUS_PANIC = 13,
} HysteraStatus;

/**
 * Capillary branch selector.
 */
typedef enum HysteraBranch {
  HYSTERA_BRANCH_IMBIBITION = 0,
  HYSTERA_BRANCH_DRAINAGE = 1,
} HysteraBranch;

/**
 * Opaque constitutive closure.
 */
typedef struct HysteraConstitutive HysteraConstitutive;

/**
 * Opaque simulation: grid, closure, initial state and, after a run, the trajectory.
 */
typedef struct HysteraSimulation HysteraSimulation;

/**
 * Constitutive parameters.
 */
typedef struct HysteraParams {
  double alpha_i;
  double alpha_d;
  double n_i;
  double n_d;
  double k0;
  double mu;
  double delta;
  double tau;
  size_t n_rho;
} HysteraParams;

/**
 * Time-stepping parameters.
 */
typedef struct HysteraStepperConfig {
  double dt;
  double t_final;
  double eps_fp;
  size_t max_iter;
  uint32_t max_halvings;
  double gravity_x;
  double gravity_y;
  /**
   * Nonzero to include the gravity flux.
   */
  int flux;
  /**
   * Nonzero to restart the whole run at the halved step.
   */
  int rebase_on_halving;
  /**
   * Nonzero to require initial data inside the hysteresis band.
   */
  int check_initial_band;
} HysteraStepperConfig;

/**
 * Tensor-product grid; `ny = 0` selects a line of `nx` nodes on `[0, lx]`.
 */
typedef struct HysteraGridSpec {
  double lx;
  double ly;
  size_t nx;
  size_t ny;
} HysteraGridSpec;

/**
 * Energy ledger of a completed run.
 */
typedef struct HysteraLedger {
  double a;
  double b;
  double m_inf;
} HysteraLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hystera_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hystera_version(void);

/**
 * Default constitutive parameters.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `HysteraParams`.
 */
enum HysteraStatus hystera_default_params(struct HysteraParams *out_params);

/**
 * Default stepper settings.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `HysteraStepperConfig`.
 */
enum HysteraStatus hystera_default_stepper_config(struct HysteraStepperConfig *out_config);

/**
 * Builds curves, play map and ρ tables.
 *
 * # Safety
 * `params` must be null or valid; `out_handle` must be null or writable.
 */
enum HysteraStatus hystera_constitutive_new(const struct HysteraParams *params,
                                            struct HysteraConstitutive **out_handle);

/**
 * Releases a closure; null is ignored.
 *
 * # Safety
 * `handle` must come from `hystera_constitutive_new` and not be used afterwards.
 */
void hystera_constitutive_free(struct HysteraConstitutive *handle);

/**
 * `p_c` on a branch at saturation `s`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_pc_eval(const struct HysteraConstitutive *handle,
                                   enum HysteraBranch branch,
                                   double s,
                                   double *out_p);

/**
 * Regularized play map `u = b_δ(p)`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_play_eval(const struct HysteraConstitutive *handle,
                                     double p,
                                     double *out_u);

/**
 * Pressure `p = b_δ⁻¹(u)`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_play_inverse(const struct HysteraConstitutive *handle,
                                        double u,
                                        double *out_p);

/**
 * Tabulated `ρ` on a branch.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_rho(const struct HysteraConstitutive *handle,
                               enum HysteraBranch branch,
                               double v,
                               double *out_u);

/**
 * Relaxation rate `Φ_τ(u, v)` at the closure's τ.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_phi(const struct HysteraConstitutive *handle,
                               double u,
                               double v,
                               double *out_rate);

/**
 * `(u, v)` at saturation `s` and band position `theta ∈ [0, 1]`
 * (0 on the imbibition curve, 1 on the drainage curve).
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_band_state(const struct HysteraConstitutive *handle,
                                      double s,
                                      double theta,
                                      double *out_u,
                                      double *out_v);

/**
 * Creates a simulation from a closure (copied), grid, stepper settings and
 * nodal initial data of length `n`.
 *
 * # Safety
 * `u0` and `v0` must hold `n` doubles; other pointers must be null or valid.
 */
enum HysteraStatus hystera_simulation_new(const struct HysteraConstitutive *cons,
                                          const struct HysteraGridSpec *grid,
                                          const struct HysteraStepperConfig *config,
                                          const double *u0,
                                          const double *v0,
                                          size_t n,
                                          struct HysteraSimulation **out_handle);

/**
 * Releases a simulation; null is ignored.
 *
 * # Safety
 * `handle` must come from `hystera_simulation_new` and not be used afterwards.
 */
void hystera_simulation_free(struct HysteraSimulation *handle);

/**
 * Marches to the final time, replacing any previous trajectory.
 *
 * # Safety
 * `handle` must be null or valid.
 */
enum HysteraStatus hystera_simulation_run(struct HysteraSimulation *handle);

/**
 * Number of grid nodes.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_simulation_nodes(const struct HysteraSimulation *handle, size_t *out_n);

/**
 * Number of stored time levels, including the initial one.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_simulation_levels(const struct HysteraSimulation *handle, size_t *out_n);

/**
 * Time and nodal fields at a stored level. Any of `u`, `v`, `s`, `p` may be
 * null; non-null buffers must hold `n` doubles, with `n` the node count.
 *
 * # Safety
 * Buffers must be null or hold `n` writable doubles.
 */
enum HysteraStatus hystera_simulation_state(const struct HysteraSimulation *handle,
                                            size_t level,
                                            size_t n,
                                            double *out_t,
                                            double *u,
                                            double *v,
                                            double *s,
                                            double *p);

/**
 * Energy ledger of the completed run.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum HysteraStatus hystera_simulation_ledger(const struct HysteraSimulation *handle,
                                             struct HysteraLedger *out_ledger);

/**
 * Runs a named preset with `key=value` configuration text, writing outputs to
 * `out_dir` (null keeps the configured directory). `out_passed` receives 1 if
 * every check passed and 0 otherwise.
 *
 * # Safety
 * Strings must be null or NUL-terminated; `out_passed` must be null or writable.
 */
enum HysteraStatus hystera_run_preset(const char *preset,
                                      const char *config_text,
                                      const char *out_dir,
                                      int *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYSTERA_H */
