#ifndef ROBUST_LA_H
#define ROBUST_LA_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Outcome of an FFI call.
 */
typedef enum RlaStatus {
  RLA_STATUS_OK = 0,
  RLA_STATUS_NULL_POINTER = 1,
  /**
   * Malformed JSON, bad dimensions or parameters, non-UTF-8 strings.
   */
  RLA_STATUS_INVALID_INPUT = 2,
  /**
   * Method not available for the set, or too many vertices.
   */
  RLA_STATUS_UNSUPPORTED = 3,
  /**
   * The (robust) problem has no feasible stress field.
   */
  RLA_STATUS_INFEASIBLE = 4,
  /**
   * The load factor is unbounded.
   */
  RLA_STATUS_UNBOUNDED = 5,
  /**
   * Iteration limit or numerical breakdown.
   */
  RLA_STATUS_SOLVER_FAILURE = 6,
  RLA_STATUS_PANIC = 7,
} RlaStatus;

/**
 * Reformulation of robust strength constraints.
 */
typedef enum RlaMethod {
  RLA_METHOD_HOMOTHETIC = 0,
  RLA_METHOD_VERTEX_EXACT = 1,
  RLA_METHOD_BERTSIMAS_SIM = 2,
  RLA_METHOD_ROOS = 3,
} RlaMethod;

/**
 * An adjustable robust solution with its affine decision rule.
 */
typedef struct RlaAarc RlaAarc;

/**
 * A limit analysis problem.
 */
typedef struct RlaProblem RlaProblem;

/**
 * Solver settings; pass `NULL` wherever accepted for the defaults.
 */
typedef struct RlaSettings {
  double tol;
  size_t max_iter;
} RlaSettings;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or `NULL`. Valid until the
 * next failing call on the same thread.
 */
const char *rla_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rla_version(void);

struct RlaSettings rla_settings_default(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rla_string_free(char *s);

/**
 * Parses a problem from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RlaStatus rla_problem_from_json(const char *json, struct RlaProblem **out_problem);

/**
 * Bending benchmark with `n` fibers, degradation `eta` and budget `gamma`.
 *
 * # Safety
 * `out_problem` must be a valid pointer.
 */
enum RlaStatus rla_problem_bending(size_t n,
                                   double eta,
                                   double gamma,
                                   bool zero_average,
                                   struct RlaProblem **out_problem);

/**
 * Default truss benchmark with load amplitude `alpha`.
 *
 * # Safety
 * `settings` may be `NULL`; `out_problem` must be a valid pointer.
 */
enum RlaStatus rla_problem_truss(double alpha,
                                 const struct RlaSettings *settings_ptr,
                                 struct RlaProblem **out_problem);

/**
 * # Safety
 * `problem` must come from this library and not have been freed.
 */
void rla_problem_free(struct RlaProblem *problem);

/**
 * JSON form of a problem, or `NULL` on failure.
 *
 * # Safety
 * `problem` must be a valid handle.
 */
char *rla_problem_to_json(const struct RlaProblem *problem);

/**
 * Number of stress unknowns, 0 for `NULL`.
 *
 * # Safety
 * `problem` must be a valid handle or `NULL`.
 */
size_t rla_problem_num_stresses(const struct RlaProblem *problem);

/**
 * Dimension of the uncertainty set, 0 without one or for `NULL`.
 *
 * # Safety
 * `problem` must be a valid handle or `NULL`.
 */
size_t rla_problem_set_dim(const struct RlaProblem *problem);

/**
 * Nominal load factor.
 *
 * # Safety
 * `problem` must be a valid handle, `settings` valid or `NULL`, `out_lambda` valid.
 */
enum RlaStatus rla_solve_nominal(const struct RlaProblem *problem,
                                 const struct RlaSettings *settings_ptr,
                                 double *out_lambda);

/**
 * Static robust load factor.
 *
 * # Safety
 * As for [`rla_solve_nominal`].
 */
enum RlaStatus rla_solve_static_rc(const struct RlaProblem *problem,
                                   enum RlaMethod method,
                                   const struct RlaSettings *settings_ptr,
                                   double *out_lambda);

/**
 * Load factor at the realization `zeta` (length `rla_problem_set_dim`).
 * An infeasible realization succeeds with `-INFINITY`.
 *
 * # Safety
 * `zeta` must point to `len` doubles; other pointers as for [`rla_solve_nominal`].
 */
enum RlaStatus rla_evaluate_at(const struct RlaProblem *problem,
                               const double *zeta,
                               size_t len,
                               const struct RlaSettings *settings_ptr,
                               double *out_lambda);

/**
 * Minimum load factor over the vertices of the set, with the lowest
 * minimizing vertex index.
 *
 * # Safety
 * `out_argmin` may be `NULL`; other pointers as for [`rla_solve_nominal`].
 */
enum RlaStatus rla_vertex_oracle(const struct RlaProblem *problem,
                                 const struct RlaSettings *settings_ptr,
                                 double *out_min,
                                 size_t *out_argmin);

/**
 * Minimum load factor over `count` seeded samples of the set.
 *
 * # Safety
 * As for [`rla_solve_nominal`].
 */
enum RlaStatus rla_sampling_oracle(const struct RlaProblem *problem,
                                   uint64_t seed,
                                   size_t count,
                                   const struct RlaSettings *settings_ptr,
                                   double *out_min);

/**
 * Affinely adjustable robust solution.
 *
 * # Safety
 * `out_solution` must be a valid pointer; other pointers as for [`rla_solve_nominal`].
 */
enum RlaStatus rla_solve_aarc(const struct RlaProblem *problem,
                              enum RlaMethod method,
                              const struct RlaSettings *settings_ptr,
                              struct RlaAarc **out_solution);

/**
 * # Safety
 * `solution` must come from this library and not have been freed.
 */
void rla_aarc_free(struct RlaAarc *solution);

/**
 * Guaranteed load factor `λ̄`, NaN for `NULL`.
 *
 * # Safety
 * `solution` must be a valid handle or `NULL`.
 */
double rla_aarc_lambda(const struct RlaAarc *solution);

/**
 * Number of stress unknowns of the rule, 0 for `NULL`.
 *
 * # Safety
 * `solution` must be a valid handle or `NULL`.
 */
size_t rla_aarc_num_stresses(const struct RlaAarc *solution);

/**
 * Number of uncertain parameters of the rule, 0 for `NULL`.
 *
 * # Safety
 * `solution` must be a valid handle or `NULL`.
 */
size_t rla_aarc_set_dim(const struct RlaAarc *solution);

/**
 * Evaluates the decision rule at `zeta`: the stresses go to `out_sigma`
 * (length `rla_aarc_num_stresses`) and the load factor to `out_lambda`.
 * Either output may be `NULL`.
 *
 * # Safety
 * `zeta` must point to `zeta_len` doubles and `out_sigma` to `sigma_len`.
 */
enum RlaStatus rla_aarc_rule_at(const struct RlaAarc *solution,
                                const double *zeta,
                                size_t zeta_len,
                                double *out_sigma,
                                size_t sigma_len,
                                double *out_lambda);

/**
 * JSON form of the solution and its rule, or `NULL` on failure.
 *
 * # Safety
 * `solution` must be a valid handle.
 */
char *rla_aarc_to_json(const struct RlaAarc *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBUST_LA_H */
