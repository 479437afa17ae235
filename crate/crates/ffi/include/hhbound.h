#ifndef HHBOUND_H
#define HHBOUND_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum HhStatus {
  HH_STATUS_OK = 0,
  HH_STATUS_NULL_POINTER = 1,
  HH_STATUS_INVALID_ARGUMENT = 2,
  HH_STATUS_OUTSIDE_DOMAIN = 3,
  HH_STATUS_NO_CONVERGENCE = 4,
  HH_STATUS_PRECONDITION = 5,
  HH_STATUS_IO = 6,
  HH_STATUS_PANIC = 7,
} HhStatus;

typedef enum HhTheorem {
  HH_THEOREM_T13 = 0,
  HH_THEOREM_T14 = 1,
  HH_THEOREM_C11 = 2,
  HH_THEOREM_C12 = 3,
  HH_THEOREM_T21 = 4,
  HH_THEOREM_T22 = 5,
  HH_THEOREM_C21 = 6,
  HH_THEOREM_C22 = 7,
} HhTheorem;

// Opaque registry function.
typedef struct HhFunction HhFunction;

// Interval, evaluation point and class parameters of one case.
typedef struct HhCase {
  double a;
  double b;
  double x;
  double q;
  double alpha;
  double m;
} HhCase;

typedef struct HhWitness {
  bool present;
  double x;
  double y;
  double t;
  double gap;
} HhWitness;

typedef struct HhReport {
  // False when the convexity hypothesis was rejected; the other fields
  // are then zero except the witness.
  bool hypothesis_holds;
  double lhs;
  double lhs_error_estimate;
  double rhs;
  double slack;
  double tightness;
  bool holds;
  struct HhWitness witness;
} HhReport;

typedef struct HhSuiteSummary {
  size_t reports;
  size_t violations;
  size_t hypothesis_rejections;
  size_t errors;
} HhSuiteSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *hh_last_error_message(void);

// Parses a `name:p1:p2` family spec into a new handle.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum HhStatus hh_function_parse(const char *spec, struct HhFunction **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `f` must come from [`hh_function_parse`] and not be freed twice.
void hh_function_free(struct HhFunction *f);

// # Safety
// `f` must be a live handle; `out` must be writable.
enum HhStatus hh_function_eval(const struct HhFunction *f, double t, double *out);

// # Safety
// `out` must be writable.
enum HhStatus hh_constant_m(double a, double b, double x, double alpha, double *out);

// # Safety
// `out` must be writable.
enum HhStatus hh_constant_a(double a, double b, double x, double alpha, double *out);

// `∫ₐᵇ f` by adaptive Simpson. `error_estimate` may be NULL.
//
// # Safety
// `f` must be a live handle; `value` must be writable.
enum HhStatus hh_integrate(const struct HhFunction *f,
                           double a,
                           double b,
                           double abs_tol,
                           double rel_tol,
                           double *value,
                           double *error_estimate);

// # Safety
// `g` must be a live handle; `out` must be writable.
enum HhStatus hh_sup_norm(const struct HhFunction *g, double a, double b, double *out);

// Checks the hypothesis of `theorem` for `|f'|^q` and, when it holds,
// compares the quadrature left-hand side with the bound. The domain of
// `f` is taken as `[0, b/m]`.
//
// # Safety
// `f` and `g` must be live handles; `case` must point to an [`HhCase`];
// `out` must be writable.
enum HhStatus hh_verify(const struct HhFunction *f,
                        const struct HhFunction *g,
                        const struct HhCase *case_,
                        enum HhTheorem theorem,
                        struct HhReport *out);

// Grid check of `(α, m)`-convexity of `f` on `[0, b_star]`. `holds` is
// written and, on failure, the worst counterexample goes to `witness`
// (which may be NULL).
//
// # Safety
// `f` must be a live handle; `holds` must be writable.
enum HhStatus hh_check_convexity(const struct HhFunction *f,
                                 double b_star,
                                 double alpha,
                                 double m,
                                 size_t nx,
                                 size_t ny,
                                 size_t nt,
                                 bool *holds,
                                 struct HhWitness *witness_out);

// Runs a suite given as JSON and writes `report.csv` and `report.json`.
// `out_dir` overrides the configured directory when not NULL.
//
// # Safety
// `config_json` must be a NUL-terminated string, `out_dir` NULL or one;
// `summary` must be writable.
enum HhStatus hh_run_suite_json(const char *config_json,
                                const char *out_dir,
                                struct HhSuiteSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HHBOUND_H */
