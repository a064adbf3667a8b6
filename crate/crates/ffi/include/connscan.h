#ifndef CONNSCAN_H
#define CONNSCAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Arrival value reported for unreachable targets.
 */
#define CS_INFINITY UINT32_MAX

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_UTF8 = 2,
  CS_STATUS_INVALID_ARGUMENT = 3,
  CS_STATUS_PARSE_ERROR = 4,
  CS_STATUS_IO_ERROR = 5,
  CS_STATUS_MISMATCH = 6,
  CS_STATUS_BUFFER_TOO_SMALL = 7,
  CS_STATUS_NOT_CONTRACTED = 8,
  CS_STATUS_PANIC = 9,
} CsStatus;

typedef enum CsGraphFormat {
  CS_GRAPH_FORMAT_TEXT = 0,
  CS_GRAPH_FORMAT_DOT = 1,
  CS_GRAPH_FORMAT_DOT_COMPACT = 2,
} CsGraphFormat;

typedef struct CsDecisionGraph CsDecisionGraph;

typedef struct CsOverlay CsOverlay;

typedef struct CsProfile CsProfile;

typedef struct CsTimetable CsTimetable;

/**
 * Parameters of a delay-robust query.
 */
typedef struct CsMeatParams {
  /**
   * Largest delay in seconds.
   */
  uint32_t max_delay;
  /**
   * Latest-arrival factor; 0 solves without a bound.
   */
  double alpha;
  double beta;
  /**
   * Display window in seconds; `CS_INFINITY` keeps the full graph.
   */
  uint32_t kappa;
  /**
   * Largest compact arc count; 0 means no budget.
   */
  uint32_t arc_budget;
} CsMeatParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *cs_last_error(void);

/**
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CsStatus cs_timetable_parse(const char *text, struct CsTimetable **out_tt);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CsStatus cs_timetable_load(const char *path, struct CsTimetable **out_tt);

/**
 * Merges footpath-connected stops so that delay-robust queries accept the result.
 *
 * # Safety
 * `tt` must be a live handle and `out` a writable pointer.
 */
enum CsStatus cs_timetable_contract(const struct CsTimetable *tt, struct CsTimetable **out_tt);

/**
 * # Safety
 * `tt` must be null or a handle not yet freed.
 */
void cs_timetable_free(struct CsTimetable *tt);

/**
 * # Safety
 * `tt` must be a live handle.
 */
size_t cs_timetable_num_stops(const struct CsTimetable *tt);

/**
 * # Safety
 * `tt` must be a live handle.
 */
size_t cs_timetable_num_connections(const struct CsTimetable *tt);

/**
 * # Safety
 * `tt` must be a live handle, `key` a NUL-terminated string, `out_id` writable.
 */
enum CsStatus cs_timetable_stop_id(const struct CsTimetable *tt, const char *key, uint32_t *out_id);

/**
 * Content hash as lowercase hex.
 *
 * # Safety
 * `tt` must be a live handle and `buf` hold `cap` bytes; `needed` may be null.
 */
enum CsStatus cs_timetable_hash(const struct CsTimetable *tt,
                                char *buf,
                                size_t cap,
                                size_t *needed);

/**
 * Earliest arrival at `t`; `CS_INFINITY` when unreachable.
 *
 * # Safety
 * `tt` must be a live handle and `out_arrival` writable.
 */
enum CsStatus cs_earliest_arrival(const struct CsTimetable *tt,
                                  uint32_t s,
                                  uint32_t tau,
                                  uint32_t t,
                                  uint32_t *out_arrival);

/**
 * Profile of every stop towards `t`.
 *
 * # Safety
 * `tt` must be a live handle and `out_profile` writable.
 */
enum CsStatus cs_profile_build(const struct CsTimetable *tt,
                               uint32_t t,
                               struct CsProfile **out_profile);

/**
 * Arrival at the profile's target when departing `s` at or after `tau`
 * with at least one connection.
 *
 * # Safety
 * `p` must be a live handle and `out_arrival` writable.
 */
enum CsStatus cs_profile_arrival(const struct CsProfile *p,
                                 uint32_t s,
                                 uint32_t tau,
                                 uint32_t *out_arrival);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void cs_profile_free(struct CsProfile *p);

/**
 * Partitions into `k` parts per level and customizes with `threads` workers
 * (0 picks the number of cores).
 *
 * # Safety
 * `tt` must be a live handle and `out_overlay` writable.
 */
enum CsStatus cs_overlay_build(const struct CsTimetable *tt,
                               uint32_t k,
                               uint32_t levels,
                               uint64_t seed,
                               uint32_t threads,
                               struct CsOverlay **out_overlay);

/**
 * # Safety
 * `tt` must be a live handle, `path` a NUL-terminated string, `out_overlay` writable.
 */
enum CsStatus cs_overlay_read(const struct CsTimetable *tt,
                              const char *path,
                              struct CsOverlay **out_overlay);

/**
 * # Safety
 * `ov` and `tt` must be live handles and `path` a NUL-terminated string.
 */
enum CsStatus cs_overlay_write(const struct CsOverlay *ov,
                               const struct CsTimetable *tt,
                               const char *path);

/**
 * Earliest arrival over the overlay's connection set. `out_scanned` may be null.
 *
 * # Safety
 * `ov` and `tt` must be live handles and `out_arrival` writable.
 */
enum CsStatus cs_overlay_earliest_arrival(const struct CsOverlay *ov,
                                          const struct CsTimetable *tt,
                                          uint32_t s,
                                          uint32_t tau,
                                          uint32_t t,
                                          uint32_t *out_arrival,
                                          size_t *out_scanned);

/**
 * # Safety
 * `ov` must be null or a handle not yet freed.
 */
void cs_overlay_free(struct CsOverlay *ov);

/**
 * Delay-robust decision graph from `s` at `tau` to `t`. Writes null to
 * `out_graph` when no safe journey exists. The timetable must be contracted.
 *
 * # Safety
 * `tt` must be a live handle, `params` readable and `out_graph` writable.
 */
enum CsStatus cs_meat_solve(const struct CsTimetable *tt,
                            uint32_t s,
                            uint32_t tau,
                            uint32_t t,
                            const struct CsMeatParams *params,
                            struct CsDecisionGraph **out_graph);

/**
 * # Safety
 * `g` must be a live handle.
 */
double cs_decision_graph_eat(const struct CsDecisionGraph *g);

/**
 * Earliest safe arrival for bounded solves, `CS_INFINITY` otherwise.
 *
 * # Safety
 * `g` must be a live handle.
 */
uint32_t cs_decision_graph_esat(const struct CsDecisionGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t cs_decision_graph_num_legs(const struct CsDecisionGraph *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
size_t cs_decision_graph_num_arcs(const struct CsDecisionGraph *g);

/**
 * Renders in one of the `CsGraphFormat` values.
 *
 * # Safety
 * `g` must be a live handle and `buf` hold `cap` bytes; `needed` may be null.
 */
enum CsStatus cs_decision_graph_render(const struct CsDecisionGraph *g,
                                       uint32_t format,
                                       char *buf,
                                       size_t cap,
                                       size_t *needed);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void cs_decision_graph_free(struct CsDecisionGraph *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONNSCAN_H */
