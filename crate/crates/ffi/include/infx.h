#ifndef INFX_H
#define INFX_H

/* Generated by cbindgen from the infx-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every FFI entry point.
 */
typedef enum InfxStatus {
  INFX_STATUS_OK = 0,
  INFX_STATUS_NULL_ARGUMENT = 1,
  INFX_STATUS_INVALID_ARGUMENT = 2,
  INFX_STATUS_GRID_MISMATCH = 3,
  INFX_STATUS_NOT_INTERIOR = 4,
  INFX_STATUS_NO_ROOT = 5,
  INFX_STATUS_QUADRATURE_DIVERGED = 6,
  INFX_STATUS_IO = 7,
  INFX_STATUS_PANIC = 8,
} InfxStatus;

/**
 * Which equation a solve targets.
 */
typedef enum InfxSolveKind {
  /**
   * The unconstrained equation (infinity-harmonic, or the
   * variable-exponent equation when an exponent handle is supplied).
   */
  INFX_SOLVE_KIND_UNCONSTRAINED = 0,
  /**
   * Upper auxiliary equation: superharmonic with descending slope >= eps.
   */
  INFX_SOLVE_KIND_UPPER = 1,
  /**
   * Lower auxiliary equation, the mirror image.
   */
  INFX_SOLVE_KIND_LOWER = 2,
} InfxSolveKind;

/**
 * Opaque Dirichlet data handle.
 */
typedef struct InfxBoundary InfxBoundary;

/**
 * Opaque exponent-field handle.
 */
typedef struct InfxExponent InfxExponent;

/**
 * Opaque scalar-field handle.
 */
typedef struct InfxField InfxField;

/**
 * Opaque grid handle.
 */
typedef struct InfxGrid InfxGrid;

/**
 * Solver options; mirror of the library's solve configuration.
 */
typedef struct InfxSolveOptions {
  double epsilon;
  double tolerance;
  uint64_t max_iterations;
  double gradient_floor;
  double relaxation;
} InfxSolveOptions;

/**
 * Convergence statistics of one solve.
 */
typedef struct InfxSolveStats {
  uint64_t iterations;
  double final_residual;
  /**
   * 1 when the final sweep update fell below the tolerance.
   */
  uint8_t converged;
} InfxSolveStats;

/**
 * Constants entering the stability-bound evaluators.
 */
typedef struct InfxBoundParams {
  double c;
  double a;
  double f_sup;
  double f_lip;
  double kappa;
  double b;
  double scale;
  double two_exp_const;
} InfxBoundParams;

/**
 * Result of the exhaustive doubling-of-variables probe.
 */
typedef struct InfxDoublingResult {
  double j;
  double m_j;
  double sigma;
  uint64_t x_index;
  uint64_t y_index;
  double x0;
  double x1;
  double y0;
  double y1;
  double distance;
  double j_dist;
} InfxDoublingResult;

/**
 * Pointwise exponent callback for the 1D oracle: receives x and the opaque
 * user pointer, returns p(x) > 0.
 */
typedef double (*InfxExponentFn)(double x, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *infx_last_error_message(void);

/**
 * Uniform 1D grid on [lower, upper] with n >= 3 nodes.
 */
enum InfxStatus infx_grid_new_1d(double lower, double upper, uint64_t n, struct InfxGrid **out);

/**
 * Uniform 2D grid on the rectangle with n >= 3 nodes per axis.
 */
enum InfxStatus infx_grid_new_2d(double lower_x,
                                 double lower_y,
                                 double upper_x,
                                 double upper_y,
                                 uint64_t n,
                                 struct InfxGrid **out);

/**
 * # Safety
 * `grid` must be a pointer returned by a grid constructor, not yet freed.
 */
void infx_grid_free(struct InfxGrid *grid);

enum InfxStatus infx_grid_node_count(const struct InfxGrid *grid, uint64_t *out);

enum InfxStatus infx_grid_boundary_count(const struct InfxGrid *grid, uint64_t *out);

enum InfxStatus infx_grid_diameter(const struct InfxGrid *grid, double *out);

enum InfxStatus infx_grid_spacing(const struct InfxGrid *grid, double *out_hx, double *out_hy);

enum InfxStatus infx_grid_node_coords(const struct InfxGrid *grid,
                                      uint64_t node,
                                      double *out_x,
                                      double *out_y);

/**
 * Dirichlet data from one value per boundary node, in ascending node-index
 * order; `len` must equal the grid's boundary count.
 */
enum InfxStatus infx_boundary_from_values(const struct InfxGrid *grid,
                                          const double *values,
                                          uint64_t len,
                                          struct InfxBoundary **out);

enum InfxStatus infx_boundary_constant(const struct InfxGrid *grid,
                                       double value,
                                       struct InfxBoundary **out);

/**
 * # Safety
 * `boundary` must come from a boundary constructor, not yet freed.
 */
void infx_boundary_free(struct InfxBoundary *boundary);

/**
 * Exhaustive Lipschitz constant over boundary node pairs.
 */
enum InfxStatus infx_boundary_lipschitz(const struct InfxBoundary *boundary, double *out);

enum InfxStatus infx_exponent_constant(const struct InfxGrid *grid,
                                       double p0,
                                       struct InfxExponent **out);

/**
 * p(x) = p0 * exp(delta_x x + delta_y y); grad ln p is exactly the delta
 * vector.
 */
enum InfxStatus infx_exponent_exponential(const struct InfxGrid *grid,
                                          double p0,
                                          double delta_x,
                                          double delta_y,
                                          struct InfxExponent **out);

/**
 * Tabulated exponent: `p` has one entry per node, `grad_ln_p` two entries
 * (x then y component) per node.
 */
enum InfxStatus infx_exponent_tabulated(const struct InfxGrid *grid,
                                        const double *p,
                                        const double *grad_ln_p,
                                        struct InfxExponent **out);

/**
 * # Safety
 * `exponent` must come from an exponent constructor, not yet freed.
 */
void infx_exponent_free(struct InfxExponent *exponent);

enum InfxStatus infx_exponent_sup_grad_ln_p(const struct InfxExponent *exponent, double *out);

/**
 * Recommended options for a grid/boundary pair: scale-free tolerance,
 * gradient floor = grid spacing, no relaxation, eps = 0.
 */
enum InfxStatus infx_solve_options_default(const struct InfxGrid *grid,
                                           const struct InfxBoundary *boundary,
                                           struct InfxSolveOptions *out);

/**
 * Solves one Dirichlet problem. `exponent` may be null for the constant
 * case; `out_stats` may be null.
 */
enum InfxStatus infx_solve(const struct InfxGrid *grid,
                           const struct InfxBoundary *boundary,
                           const struct InfxExponent *exponent,
                           enum InfxSolveKind kind,
                           const struct InfxSolveOptions *options,
                           struct InfxField **out_field,
                           struct InfxSolveStats *out_stats);

/**
 * Solves lower, middle and upper in lockstep; the returned fields satisfy
 * lower <= middle <= upper at every node exactly. `out_stats` (nullable)
 * receives the middle solve's statistics.
 */
enum InfxStatus infx_solve_sandwich(const struct InfxGrid *grid,
                                    const struct InfxBoundary *boundary,
                                    const struct InfxExponent *exponent,
                                    const struct InfxSolveOptions *options,
                                    struct InfxField **out_lower,
                                    struct InfxField **out_middle,
                                    struct InfxField **out_upper,
                                    struct InfxSolveStats *out_stats);

enum InfxStatus infx_field_len(const struct InfxField *field, uint64_t *out);

/**
 * Copies all node values into `buffer`, which must hold `len` doubles
 * (= the grid node count).
 */
enum InfxStatus infx_field_copy_values(const struct InfxField *field, double *buffer, uint64_t len);

enum InfxStatus infx_field_value_at(const struct InfxField *field, uint64_t node, double *out);

/**
 * Sup-norm distance between two fields on the same grid.
 */
enum InfxStatus infx_field_sup_diff(const struct InfxField *a,
                                    const struct InfxField *b,
                                    double *out);

/**
 * Sup over interior nodes of the pointwise operator residual
 * |Delta_inf u + drift|, measuring how well a field solves the equation.
 */
enum InfxStatus infx_field_operator_residual(const struct InfxField *field,
                                             const struct InfxExponent *exponent,
                                             double *out);

/**
 * # Safety
 * `field` must come from a solve or transform call, not yet freed.
 */
void infx_field_free(struct InfxField *field);

/**
 * g(t) = ln(1 + A (exp(alpha t) - 1)) / alpha for t >= 0.
 */
enum InfxStatus infx_g_eval(double t, double a, double alpha, double *out);

enum InfxStatus infx_g_derivatives(double t,
                                   double a,
                                   double alpha,
                                   double *out_first,
                                   double *out_second);

/**
 * Applies g nodewise to a nonnegative field.
 */
enum InfxStatus infx_g_apply(const struct InfxField *field,
                             double a,
                             double alpha,
                             struct InfxField **out);

/**
 * Strict-supersolution margin mu = alpha (A-1) A^-1 exp(-alpha v_sup) eps^4.
 */
enum InfxStatus infx_mu_strict(double a, double alpha, double epsilon, double v_sup, double *out);

/**
 * The normalized margin with alpha = 1 / v_sup:
 * mu = (A-1) eps^4 / (A e v_sup).
 */
enum InfxStatus infx_mu_strict_normalized(double a, double epsilon, double v_sup, double *out);

/**
 * Two-exponent margin; also reports the implied alpha = (1 + grad) / eps.
 */
enum InfxStatus infx_mu_strict_two_exponent(double a,
                                            double epsilon,
                                            double v_sup,
                                            double grad_ln_p_sup,
                                            double *out_mu,
                                            double *out_alpha);

/**
 * Checks max over interior nodes of the discrete infinity-Laplacian
 * against -mu + slack; writes the max and whether the check passed.
 */
enum InfxStatus infx_strict_supersolution_check(const struct InfxField *field,
                                                double mu,
                                                double slack,
                                                double *out_max,
                                                uint8_t *out_passed);

/**
 * Default bound constants (all 1, kappa 2).
 */
enum InfxStatus infx_bound_params_default(struct InfxBoundParams *out);

enum InfxStatus infx_doubling_bound(double epsilon,
                                    double c,
                                    double u2plus_sup,
                                    double grad_ln_p_sup,
                                    double *out);

/**
 * Near-optimal epsilon and its majorant for the one-exponent bound.
 */
enum InfxStatus infx_choose_epsilon_one_exp(double grad_ln_p_sup,
                                            double a,
                                            double c,
                                            double *out_epsilon,
                                            double *out_majorant);

enum InfxStatus infx_one_exponent_bound(double grad_ln_p_sup,
                                        const struct InfxBoundParams *params,
                                        double *out);

enum InfxStatus infx_two_exponent_bound(double delta_grad,
                                        const struct InfxBoundParams *params,
                                        double *out);

/**
 * Root of exp(K / eps) delta = eps^(kappa + 2) with
 * K = (1 + grad_ln_p2) v2_sup.
 */
enum InfxStatus infx_choose_epsilon_two_exp(double delta_grad,
                                            double grad_ln_p2_sup,
                                            double v2_sup,
                                            double kappa,
                                            double *out);

/**
 * Exhaustive doubling probe over all node pairs of the shared grid.
 */
enum InfxStatus infx_doubling_probe(const struct InfxField *u1,
                                    const struct InfxField *w2,
                                    double j,
                                    struct InfxDoublingResult *out);

/**
 * Exact 1D solution via the first integral. `p` is evaluated through the
 * callback; `out_values` (nullable) must hold `n` doubles; `out_c` and
 * `out_sign` (nullable) receive the stream-line constant and the sign of
 * the derivative.
 */
enum InfxStatus infx_oracle1d_solve(InfxExponentFn p,
                                    void *user,
                                    double a,
                                    double b,
                                    double fa,
                                    double fb,
                                    uint64_t n,
                                    double quad_tol,
                                    double *out_c,
                                    int32_t *out_sign,
                                    double *out_values);

/**
 * Exact sup distance between the 1D solutions for two exponents with the
 * same boundary values.
 */
enum InfxStatus infx_oracle1d_stability(InfxExponentFn p1,
                                        void *user1,
                                        InfxExponentFn p2,
                                        void *user2,
                                        double a,
                                        double b,
                                        double fa,
                                        double fb,
                                        uint64_t samples,
                                        double quad_tol,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFX_H */
