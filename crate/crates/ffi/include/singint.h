#ifndef SINGINT_H
#define SINGINT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum SingintStatus {
  SINGINT_STATUS_OK = 0,
  SINGINT_STATUS_NULL_POINTER = 1,
  SINGINT_STATUS_INVALID_GEOMETRY = 2,
  SINGINT_STATUS_NOT_RECTIFIABLE = 3,
  SINGINT_STATUS_POINT_NOT_ON_CURVE = 4,
  SINGINT_STATUS_INVALID_PARAMETER = 5,
  SINGINT_STATUS_INVALID_RADIUS = 6,
  SINGINT_STATUS_SINGULAR_POINT = 7,
  SINGINT_STATUS_NON_CONVERGENCE = 8,
  SINGINT_STATUS_OVERFLOW = 9,
  SINGINT_STATUS_DIMENSION_MISMATCH = 10,
  SINGINT_STATUS_DEGENERATE_STENCIL = 11,
  SINGINT_STATUS_PARSE = 12,
  SINGINT_STATUS_IO = 13,
  SINGINT_STATUS_PANIC = 14,
} SingintStatus;

/**
 * Verdict of a grid supremum.
 */
typedef enum SingintVerdict {
  SINGINT_VERDICT_FINITE = 0,
  SINGINT_VERDICT_DIVERGING = 1,
  SINGINT_VERDICT_INCONCLUSIVE = 2,
} SingintVerdict;

/**
 * Opaque polyline curve.
 */
typedef struct SingintCurve SingintCurve;

/**
 * Opaque variable exponent bound to the curve it was built on.
 */
typedef struct SingintExponent SingintExponent;

/**
 * Opaque composite radial weight.
 */
typedef struct SingintWeight SingintWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none.
 */
const char *singint_last_error(void);

/**
 * Straight segment from `(ax, ay)` to `(bx, by)` with `nodes` nodes.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SingintStatus singint_curve_segment(double ax,
                                         double ay,
                                         double bx,
                                         double by,
                                         size_t nodes,
                                         struct SingintCurve **out);

/**
 * Circle of radius `r` around `(cx, cy)` with `nodes` nodes.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SingintStatus singint_curve_circle(double cx,
                                        double cy,
                                        double r,
                                        size_t nodes,
                                        struct SingintCurve **out);

/**
 * The curve `x + i x^alpha sin(1/x)` on `[0, 1]` at the given resolution.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SingintStatus singint_curve_spiral(double alpha, size_t resolution, struct SingintCurve **out);

/**
 * Polyline through `n` points given as coordinate arrays.
 *
 * # Safety
 * `xs` and `ys` must each point to `n` readable doubles; `out` must be a
 * valid pointer to writable storage for one handle.
 */
enum SingintStatus singint_curve_polyline(const double *xs,
                                          const double *ys,
                                          size_t n,
                                          bool closed,
                                          struct SingintCurve **out);

/**
 * Releases a curve; null is ignored.
 *
 * # Safety
 * `curve` must be null or a handle from a curve constructor not yet freed.
 */
void singint_curve_free(struct SingintCurve *curve);

/**
 * Arc length of the curve.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum SingintStatus singint_curve_length(const struct SingintCurve *curve, double *out);

/**
 * Number of curve nodes.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum SingintStatus singint_curve_node_count(const struct SingintCurve *curve, size_t *out);

/**
 * Grid estimate of the Carleson constant `sup |Γ(t,R)|/R`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum SingintStatus singint_curve_carleson(const struct SingintCurve *curve,
                                          size_t t_samples,
                                          size_t r_samples,
                                          double *out);

/**
 * Constant exponent `p > 1` on the nodes of `curve`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum SingintStatus singint_exponent_constant(const struct SingintCurve *curve,
                                             double p,
                                             struct SingintExponent **out);

/**
 * Radial exponent `base + amplitude / (2 - ln|τ - c|)`, clipped to
 * `[1.01, 100]`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum SingintStatus singint_exponent_radial(const struct SingintCurve *curve,
                                           double cx,
                                           double cy,
                                           double base,
                                           double amplitude,
                                           struct SingintExponent **out);

/**
 * Releases an exponent; null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from an exponent constructor not yet freed.
 */
void singint_exponent_free(struct SingintExponent *p);

/**
 * Creates the unit weight `w ≡ 1`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SingintStatus singint_weight_new(struct SingintWeight **out);

/**
 * Multiplies the weight by `|τ - a|^gamma`.
 *
 * # Safety
 * `w` must be a live weight handle.
 */
enum SingintStatus singint_weight_add_power(struct SingintWeight *w,
                                            double ax,
                                            double ay,
                                            double gamma);

/**
 * Multiplies the weight by `x^gamma exp(amp sin(freq ln x))` with
 * `x = |τ - a|`.
 *
 * # Safety
 * `w` must be a live weight handle.
 */
enum SingintStatus singint_weight_add_oscillating(struct SingintWeight *w,
                                                  double ax,
                                                  double ay,
                                                  double gamma,
                                                  double amp,
                                                  double freq);

/**
 * Number of factors of the weight.
 *
 * # Safety
 * `w` must be a live weight handle; `out` must be writable.
 */
enum SingintStatus singint_weight_factor_count(const struct SingintWeight *w, size_t *out);

/**
 * Releases a weight; null is ignored.
 *
 * # Safety
 * `w` must be null or a handle from [`singint_weight_new`] not yet freed.
 */
void singint_weight_free(struct SingintWeight *w);

/**
 * Matuszewska–Orlicz indices `(m, M)` of factor `k`, with dilations capped
 * at `cap`.
 *
 * # Safety
 * `w` must be a live weight handle; `m` and `big_m` must be writable.
 */
enum SingintStatus singint_mo_indices(const struct SingintWeight *w,
                                      size_t k,
                                      double cap,
                                      double *m,
                                      double *big_m);

/**
 * Luxemburg–Nakano norm of nodal values `re + i im` on `curve`; `im`
 * may be null for real data.
 *
 * # Safety
 * Handles must be live; `re` (and `im` unless null) must point to `n`
 * readable doubles; `out` must be writable.
 */
enum SingintStatus singint_luxemburg_norm(const struct SingintCurve *curve,
                                          const struct SingintWeight *w,
                                          const struct SingintExponent *p,
                                          const double *re,
                                          const double *im,
                                          size_t n,
                                          double *out);

/**
 * Grid supremum of the Muckenhoupt-type constant with the default grid
 * and the given seed.
 *
 * # Safety
 * Handles must be live; `estimate` and `verdict` must be writable.
 */
enum SingintStatus singint_ap_constant(const struct SingintCurve *curve,
                                       const struct SingintExponent *p,
                                       const struct SingintWeight *w,
                                       uint64_t seed,
                                       double *estimate,
                                       enum SingintVerdict *verdict);

/**
 * Lower bound on the norm of the Cauchy singular integral on
 * `L^{p(·)}(Γ, w)` from a discretization with `nodes` nodes: interleaved
 * on closed curves, graded toward the weight anchors on open ones.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum SingintStatus singint_opnorm(const struct SingintCurve *curve,
                                  const struct SingintWeight *w,
                                  const struct SingintExponent *p,
                                  size_t nodes,
                                  size_t trials,
                                  uint64_t seed,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGINT_H */
