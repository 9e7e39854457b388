#ifndef STARFLOW_H
#define STARFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum StarflowStatus {
  STARFLOW_STATUS_OK = 0,
  STARFLOW_STATUS_NULL_POINTER = 1,
  STARFLOW_STATUS_INVALID_ARGUMENT = 2,
  STARFLOW_STATUS_CONFIG = 3,
  STARFLOW_STATUS_NOT_STAR_SHAPED = 4,
  STARFLOW_STATUS_DEGENERATE = 5,
  STARFLOW_STATUS_INSUFFICIENT_DATA = 6,
  STARFLOW_STATUS_IO = 7,
  STARFLOW_STATUS_BUFFER_TOO_SMALL = 8,
  STARFLOW_STATUS_PANIC = 9,
} StarflowStatus;

/**
 * How a flow run ended.
 */
typedef enum StarflowTermination {
  STARFLOW_TERMINATION_REACHED_T_END = 0,
  STARFLOW_TERMINATION_BLOWUP_DETECTED = 1,
  STARFLOW_TERMINATION_STAR_SHAPE_LOST = 2,
  STARFLOW_TERMINATION_STEP_LIMIT = 3,
} StarflowTermination;

typedef enum StarflowMode {
  STARFLOW_MODE_FULL = 0,
  STARFLOW_MODE_CONVERGENCE = 1,
} StarflowMode;

/**
 * Opaque experiment report.
 */
typedef struct StarflowReport StarflowReport;

/**
 * Opaque flow run.
 */
typedef struct StarflowSeries StarflowSeries;

/**
 * Opaque sampled initial shape.
 */
typedef struct StarflowShape StarflowShape;

/**
 * Time-stepping parameters; obtain defaults from `starflow_flow_config_default`.
 */
typedef struct StarflowFlowConfig {
  double cfl_factor;
  double t_end;
  double blowup_threshold;
  double snapshot_interval;
  uint64_t max_steps;
} StarflowFlowConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none.
 */
const char *starflow_last_error(void);

struct StarflowFlowConfig starflow_flow_config_default(void);

/**
 * Samples a preset (`"round"`: `p1 = R0`; `"flower"`: `p1 = eps`, `p2 = k`;
 * `"ellipse"`: `p1 = a`, `p2 = b`) on `nodes` grid nodes in dimension `n`.
 *
 * # Safety
 * `preset` must be a nul-terminated string and `out` a valid pointer.
 */
enum StarflowStatus starflow_shape_new(const char *preset,
                                       double p1,
                                       double p2,
                                       uint32_t n,
                                       size_t nodes,
                                       struct StarflowShape **out);

/**
 * # Safety
 * `shape` must come from `starflow_shape_new` (or be null) and not be used afterwards.
 */
void starflow_shape_free(struct StarflowShape *shape);

/**
 * Number of grid nodes, 0 for a null handle.
 *
 * # Safety
 * `shape` must be a live handle or null.
 */
size_t starflow_shape_len(const struct StarflowShape *shape);

/**
 * Copies the node radii into `out`, which must hold `starflow_shape_len` values.
 *
 * # Safety
 * `out` must point to `capacity` writable doubles.
 */
enum StarflowStatus starflow_shape_radius(const struct StarflowShape *shape,
                                          double *out,
                                          size_t capacity);

/**
 * # Safety
 * Pointers must be valid.
 */
enum StarflowStatus starflow_shape_diameter(const struct StarflowShape *shape, double *out);

/**
 * Runs the flow from `shape`.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle owned by the caller.
 */
enum StarflowStatus starflow_flow_run(const struct StarflowShape *shape,
                                      const struct StarflowFlowConfig *config,
                                      struct StarflowSeries **out);

/**
 * # Safety
 * `series` must come from `starflow_flow_run` (or be null) and not be used afterwards.
 */
void starflow_series_free(struct StarflowSeries *series);

/**
 * # Safety
 * Pointers must be valid.
 */
enum StarflowStatus starflow_series_final_time(const struct StarflowSeries *series, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum StarflowStatus starflow_series_termination(const struct StarflowSeries *series,
                                                enum StarflowTermination *out);

/**
 * Number of recorded snapshots, 0 for a null handle.
 *
 * # Safety
 * `series` must be a live handle or null.
 */
size_t starflow_series_snapshot_count(const struct StarflowSeries *series);

/**
 * Extrapolated blow-up time of a run that ended in blow-up.
 *
 * # Safety
 * Pointers must be valid.
 */
enum StarflowStatus starflow_series_blowup_time(const struct StarflowSeries *series, double *out);

/**
 * Parses a TOML experiment and runs it.
 *
 * # Safety
 * `config_toml` must be a nul-terminated string and `out` a valid pointer.
 */
enum StarflowStatus starflow_experiment_run(const char *config_toml,
                                            enum StarflowMode mode,
                                            struct StarflowReport **out);

/**
 * # Safety
 * `report` must come from `starflow_experiment_run` (or be null) and not be used afterwards.
 */
void starflow_report_free(struct StarflowReport *report);

/**
 * Process exit code of the report: 0 all pass, 1 a verdict failed, 2 runtime error; -1 for null.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
int32_t starflow_report_exit_code(const struct StarflowReport *report);

/**
 * Writes the JSON report plus a nul terminator into `buf`. `needed` (optional) receives the
 * required size in bytes including the terminator, so a first call may pass a null buffer.
 *
 * # Safety
 * `buf` must point to `capacity` writable bytes or be null with `capacity == 0`.
 */
enum StarflowStatus starflow_report_json(const struct StarflowReport *report,
                                         char *buf,
                                         size_t capacity,
                                         size_t *needed);

/**
 * Writes `diagnostics.csv`, `snapshots.csv` and `report.json` into `dir`.
 *
 * # Safety
 * `report` must be a live handle and `dir` a nul-terminated string.
 */
enum StarflowStatus starflow_report_write(const struct StarflowReport *report, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STARFLOW_H */
