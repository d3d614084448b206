#ifndef NLSLAB_H
#define NLSLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlsStatus {
  NLS_STATUS_OK = 0,
  NLS_STATUS_NULL_POINTER = 1,
  NLS_STATUS_INVALID_ARGUMENT = 2,
  NLS_STATUS_BUDGET_EXCEEDED = 3,
  NLS_STATUS_CONSISTENCY = 4,
  NLS_STATUS_NON_FINITE = 5,
  NLS_STATUS_UNSUPPORTED = 6,
  NLS_STATUS_QUADRATURE = 7,
  NLS_STATUS_BUFFER_TOO_SMALL = 8,
  NLS_STATUS_INTERNAL = 9,
} NlsStatus;

/*
 Opaque I-energy evaluator bound to one lattice and one smoothing symbol.
 */
typedef struct NlsEvaluator NlsEvaluator;

/*
 Opaque truncated spectral field.
 */
typedef struct NlsField NlsField;

/*
 Opaque torus geometry.
 */
typedef struct NlsGeometry NlsGeometry;

typedef struct NlsEnergyReport {
  double mass;
  double energy;
  double e_i1;
  double correction;
  double e_i2;
} NlsEnergyReport;

typedef struct NlsCensusSummary {
  uint64_t total;
  uint64_t expected_total;
  uint64_t violations;
  double nonresonant_constant;
  bool passed;
} NlsCensusSummary;

typedef struct NlsBudget {
  double lambda_exponent;
  double lambda;
  double per_step_time;
  double step_count;
  double total_existence_exponent;
  double total_time;
  double zero_crossing;
  bool global;
} NlsBudget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *nlslab_last_error(void);

/*
 `dim` is 1 or 2; `gamma` points to `dim − 1` aspect ratios (may be null in 1d).

 # Safety
 `gamma` must point to `dim − 1` readable values when `dim == 2`; `out` must be writable.
 */
enum NlsStatus nlslab_geometry_new(size_t dim,
                                   const double *gamma,
                                   double lambda,
                                   struct NlsGeometry **out_geom);

/*
 # Safety
 `geom` must come from [`nlslab_geometry_new`] and not be used afterwards; null is ignored.
 */
void nlslab_geometry_free(struct NlsGeometry *geom);

/*
 Number of coefficients of a field with this cutoff: `(2K+1)^dim`.

 # Safety
 `geom` must be a live handle.
 */
size_t nlslab_field_len(const struct NlsGeometry *geom, size_t cutoff);

/*
 Field from `len` coefficients (real and imaginary parts) in row-major mode order with offset
 `K` on each axis.

 # Safety
 `re` and `im` must point to `len` readable values; `out_field` must be writable.
 */
enum NlsStatus nlslab_field_new(const struct NlsGeometry *geom,
                                size_t cutoff,
                                const double *re,
                                const double *im,
                                size_t len,
                                struct NlsField **out_field);

/*
 Copy the coefficients into caller buffers of length `len`.

 # Safety
 `re` and `im` must point to `len` writable values.
 */
enum NlsStatus nlslab_field_coefficients(const struct NlsField *field,
                                         double *re,
                                         double *im,
                                         size_t len);

/*
 # Safety
 `field` must come from this library and not be used afterwards; null is ignored.
 */
void nlslab_field_free(struct NlsField *field);

/*
 Evolve to `t_end` with step `dt`. `integrator`: 0 strang, 1 strang-phase, 2 rk4-galerkin.

 # Safety
 `field` must be a live handle and `out_field` writable.
 */
enum NlsStatus nlslab_field_evolve(const struct NlsField *field,
                                   uint32_t integrator,
                                   bool defocusing,
                                   double dt,
                                   double t_end,
                                   struct NlsField **out_field);

/*
 Evaluator for fields on the lattice of `field` with threshold `n`, regularity `s` and gap `gap`.

 # Safety
 `field` must be a live handle and `out_eval` writable.
 */
enum NlsStatus nlslab_evaluator_new(const struct NlsField *field,
                                    double n,
                                    double s,
                                    double gap,
                                    bool defocusing,
                                    struct NlsEvaluator **out_eval);

/*
 # Safety
 `eval` must come from [`nlslab_evaluator_new`] and not be used afterwards; null is ignored.
 */
void nlslab_evaluator_free(struct NlsEvaluator *eval);

/*
 Mass, energy and both I-energies of `field`.

 # Safety
 Both handles must be live and `out_report` writable.
 */
enum NlsStatus nlslab_energy_report(const struct NlsEvaluator *eval,
                                    const struct NlsField *field,
                                    struct NlsEnergyReport *out_report);

/*
 Classify a 1d sextuple (physical frequencies) and write its NUL-terminated verdict label.

 # Safety
 `k` must point to 6 values and `label` to `capacity` writable bytes.
 */
enum NlsStatus nlslab_classify6(const double *k,
                                double n,
                                double gap,
                                char *label,
                                size_t capacity);

/*
 Exhaustive census of `Γ_6 ∩ [−kmax, kmax]^6` (1d) or `Γ_4` (2d) on `geom`.

 # Safety
 `geom` must be live and `out_summary` writable.
 */
enum NlsStatus nlslab_census(const struct NlsGeometry *geom,
                             int64_t kmax,
                             double n,
                             double s,
                             double gap,
                             struct NlsCensusSummary *out_summary);

/*
 Scaling plan of the global iteration in dimension `d` at regularity `s` and threshold `n`.

 # Safety
 `out_budget` must be writable.
 */
enum NlsStatus nlslab_gwp_budget(size_t d,
                                 double s,
                                 double n,
                                 double epsilon,
                                 double delta,
                                 double slack,
                                 struct NlsBudget *out_budget);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLSLAB_H */
