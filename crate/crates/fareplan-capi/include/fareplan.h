#ifndef FAREPLAN_H
#define FAREPLAN_H

/* Generated by cbindgen from fareplan-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a C API call.
 */
typedef enum FareplanStatus {
  FAREPLAN_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FAREPLAN_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  FAREPLAN_STATUS_INVALID_UTF8 = 2,
  /**
   * A document could not be parsed or failed validation.
   */
  FAREPLAN_STATUS_PARSE = 3,
  /**
   * Inputs violate a precondition.
   */
  FAREPLAN_STATUS_INVALID_INPUT = 4,
  /**
   * The LP subsolver reported an infeasible program.
   */
  FAREPLAN_STATUS_INFEASIBLE = 5,
  /**
   * The LP subsolver reported an unbounded program.
   */
  FAREPLAN_STATUS_UNBOUNDED = 6,
  /**
   * An internal invariant failed.
   */
  FAREPLAN_STATUS_INTERNAL = 7,
} FareplanStatus;

/**
 * Which weighted median to report when the optimum is an interval.
 */
typedef enum FareplanMedian {
  FAREPLAN_MEDIAN_LOWER = 0,
  FAREPLAN_MEDIAN_UPPER = 1,
} FareplanMedian;

/**
 * Which journey length an affine tariff prices.
 */
typedef enum FareplanMetric {
  FAREPLAN_METRIC_NETWORK = 0,
  FAREPLAN_METRIC_BEELINE = 1,
} FareplanMetric;

/**
 * How traversed zones are counted.
 */
typedef enum FareplanCounting {
  FAREPLAN_COUNTING_MULTIPLE = 0,
  FAREPLAN_COUNTING_SINGLE = 1,
} FareplanCounting;

/**
 * A parsed and validated instance. Opaque.
 */
typedef struct FareplanInstance FareplanInstance;

/**
 * An optimal zone tariff. Opaque.
 */
typedef struct FareplanZoneResult FareplanZoneResult;

/**
 * Zone tariff design problem configuration.
 */
typedef struct FareplanZoneConfig {
  enum FareplanCounting counting;
  /**
   * Require every zone to induce a connected subgraph.
   */
  bool connected;
  /**
   * Upper bound on the number of zones.
   */
  size_t max_zones;
  /**
   * Require monotonically increasing prices.
   */
  bool no_elongation;
  /**
   * Require the no-stopover price condition.
   */
  bool no_stopover;
} FareplanZoneConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *fareplan_last_error_message(void);

/**
 * Parses an instance document (see the project README for the schema).
 * On success writes a handle that must be released with
 * [`fareplan_instance_free`].
 *
 * # Safety
 * `text` must point to a NUL-terminated string; `out` must be a valid
 * pointer.
 */
enum FareplanStatus fareplan_instance_parse(const char *text, struct FareplanInstance **out);

/**
 * Releases an instance handle. Null is a no-op.
 *
 * # Safety
 * `instance` must come from [`fareplan_instance_parse`] and not be used
 * afterwards.
 */
void fareplan_instance_free(struct FareplanInstance *instance);

/**
 * Number of stations.
 *
 * # Safety
 * `instance` must be a live handle.
 */
size_t fareplan_instance_station_count(const struct FareplanInstance *instance);

/**
 * Number of OD pairs.
 *
 * # Safety
 * `instance` must be a live handle.
 */
size_t fareplan_instance_od_count(const struct FareplanInstance *instance);

/**
 * Name of the station at `index` in canonical order, or null when out
 * of range. The pointer stays valid while the instance lives.
 *
 * # Safety
 * `instance` must be a live handle.
 */
const char *fareplan_instance_station_name(const struct FareplanInstance *instance, size_t index);

/**
 * Optimal flat tariff: the picked weighted median of the reference
 * prices and the deviation objective.
 *
 * # Safety
 * All pointers must be valid; `instance` must be a live handle.
 */
enum FareplanStatus fareplan_flat_design(const struct FareplanInstance *instance,
                                         enum FareplanMedian median,
                                         double *out_price,
                                         double *out_objective);

/**
 * Optimal affine distance tariff over the chosen metric.
 *
 * # Safety
 * All pointers must be valid; `instance` must be a live handle.
 */
enum FareplanStatus fareplan_affine_design(const struct FareplanInstance *instance,
                                           enum FareplanMetric metric,
                                           double *out_rate,
                                           double *out_base,
                                           double *out_objective);

/**
 * Exact zone tariff design. On success writes a result handle that must
 * be released with [`fareplan_zone_result_free`].
 *
 * # Safety
 * All pointers must be valid; `instance` must be a live handle.
 */
enum FareplanStatus fareplan_zone_design(const struct FareplanInstance *instance,
                                         const struct FareplanZoneConfig *config,
                                         struct FareplanZoneResult **out);

/**
 * Releases a zone design result. Null is a no-op.
 *
 * # Safety
 * `result` must come from [`fareplan_zone_design`] and not be used
 * afterwards.
 */
void fareplan_zone_result_free(struct FareplanZoneResult *result);

/**
 * Deviation objective of the result.
 *
 * # Safety
 * `result` must be a live handle.
 */
double fareplan_zone_result_objective(const struct FareplanZoneResult *result);

/**
 * Number of nonempty zones the optimal partition uses.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t fareplan_zone_result_zone_count(const struct FareplanZoneResult *result);

/**
 * 1-based zone number of a station (canonical station order).
 *
 * # Safety
 * All pointers must be valid; `result` must be a live handle.
 */
enum FareplanStatus fareplan_zone_result_zone_of(const struct FareplanZoneResult *result,
                                                 size_t station,
                                                 size_t *out_zone);

/**
 * Length of the optimal price list.
 *
 * # Safety
 * `result` must be a live handle.
 */
size_t fareplan_zone_result_price_count(const struct FareplanZoneResult *result);

/**
 * Price for traversing `zones >= 1` zones (clamped to the list length).
 *
 * # Safety
 * `result` must be a live handle.
 */
double fareplan_zone_result_price(const struct FareplanZoneResult *result, size_t zones);

/**
 * Writes the zone design MILP in LP file format. The returned string
 * must be released with [`fareplan_string_free`].
 *
 * # Safety
 * All pointers must be valid; `instance` must be a live handle.
 */
enum FareplanStatus fareplan_export_milp(const struct FareplanInstance *instance,
                                         const struct FareplanZoneConfig *config,
                                         char **out_text);

/**
 * Releases a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `text` must come from this library and not be used afterwards.
 */
void fareplan_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAREPLAN_H */
