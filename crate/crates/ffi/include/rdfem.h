#ifndef RDFEM_H
#define RDFEM_H

#include <stdbool.h>
#include <stddef.h>

// Result code of every fallible call.
typedef enum RdfemStatus {
  RDFEM_STATUS_OK = 0,
  RDFEM_STATUS_NULL_POINTER = 1,
  RDFEM_STATUS_INVALID_ARGUMENT = 2,
  RDFEM_STATUS_UNKNOWN_PROBLEM = 3,
  RDFEM_STATUS_SOLVER_FAILURE = 4,
  RDFEM_STATUS_IO = 5,
  RDFEM_STATUS_PARSE = 6,
  RDFEM_STATUS_OUT_OF_RANGE = 7,
  RDFEM_STATUS_PANIC = 8,
} RdfemStatus;

typedef enum RdfemScheme {
  RDFEM_SCHEME_CFEM = 0,
  RDFEM_SCHEME_NCFEM = 1,
  RDFEM_SCHEME_DG = 2,
} RdfemScheme;

// Finite element function at the final time of a run.
typedef struct RdfemField RdfemField;

// Structured simplicial mesh of the unit square or cube.
typedef struct RdfemMesh RdfemMesh;

// Benchmark problem with its run parameters.
typedef struct RdfemProblem RdfemProblem;

// Convergence tables of a study, one per scheme.
typedef struct RdfemStudy RdfemStudy;

// One row of a convergence table. `rate` is NaN for the coarsest grid.
typedef struct RdfemReportRow {
  size_t n;
  double h;
  double error;
  double rate;
} RdfemReportRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *rdfem_last_error(void);

// Library version as a static NUL-terminated string.
const char *rdfem_version(void);

// # Safety
// `out` must be a valid pointer.
enum RdfemStatus rdfem_mesh_create(size_t dim, size_t n, struct RdfemMesh **out);

// # Safety
// `mesh` must come from [`rdfem_mesh_create`] (or be NULL) and not be used afterwards.
void rdfem_mesh_free(struct RdfemMesh *mesh);

// # Safety
// `mesh` must be a live handle; output pointers may be NULL to skip a count.
enum RdfemStatus rdfem_mesh_counts(const struct RdfemMesh *mesh,
                                   size_t *cells,
                                   size_t *vertices,
                                   size_t *facets);

// Largest cell diameter.
//
// # Safety
// `mesh` must be a live handle and `out` valid.
enum RdfemStatus rdfem_mesh_h(const struct RdfemMesh *mesh, double *out);

// Looks up a built-in problem by name.
//
// # Safety
// `name` must be a NUL-terminated string and `out` valid.
enum RdfemStatus rdfem_problem_lookup(const char *name, struct RdfemProblem **out);

// # Safety
// `problem` must come from [`rdfem_problem_lookup`] (or be NULL) and not be used afterwards.
void rdfem_problem_free(struct RdfemProblem *problem);

// Restricts the problem to a single scheme.
//
// # Safety
// `problem` must be a live handle.
enum RdfemStatus rdfem_problem_set_scheme(struct RdfemProblem *problem, enum RdfemScheme scheme);

// # Safety
// `problem` must be a live handle.
enum RdfemStatus rdfem_problem_set_gamma(struct RdfemProblem *problem, double gamma);

// Uses a fixed time step.
//
// # Safety
// `problem` must be a live handle.
enum RdfemStatus rdfem_problem_set_dt(struct RdfemProblem *problem, double dt);

// # Safety
// `problem` must be a live handle.
enum RdfemStatus rdfem_problem_set_final_time(struct RdfemProblem *problem, double t);

// Replaces the grid list of a study.
//
// # Safety
// `problem` must be a live handle and `grids` point to `len` values.
enum RdfemStatus rdfem_problem_set_grids(struct RdfemProblem *problem,
                                         const size_t *grids,
                                         size_t len);

// Reference resolution for problems without a closed-form solution.
//
// # Safety
// `problem` must be a live handle.
enum RdfemStatus rdfem_problem_set_n_ref(struct RdfemProblem *problem, size_t n_ref);

// Runs the convergence study with default solver settings.
//
// # Safety
// `problem` must be a live handle and `out` valid.
enum RdfemStatus rdfem_study_run(const struct RdfemProblem *problem, struct RdfemStudy **out);

// # Safety
// `study` must come from [`rdfem_study_run`] (or be NULL) and not be used afterwards.
void rdfem_study_free(struct RdfemStudy *study);

// Number of tables (one per scheme).
//
// # Safety
// `study` must be a live handle and `out` valid.
enum RdfemStatus rdfem_study_table_count(const struct RdfemStudy *study, size_t *out);

// # Safety
// `study` must be a live handle and output pointers valid.
enum RdfemStatus rdfem_study_table_info(const struct RdfemStudy *study,
                                        size_t table,
                                        enum RdfemScheme *scheme,
                                        size_t *rows,
                                        bool *stable);

// # Safety
// `study` must be a live handle and `out` valid.
enum RdfemStatus rdfem_study_row(const struct RdfemStudy *study,
                                 size_t table,
                                 size_t row,
                                 struct RdfemReportRow *out);

// Writes one table as CSV (`grid,h,error,rate`).
//
// # Safety
// `study` must be a live handle and `path` a NUL-terminated string.
enum RdfemStatus rdfem_study_write_csv(const struct RdfemStudy *study,
                                       size_t table,
                                       const char *path);

// Solves the problem's first scheme on grid `n`. `error` receives the
// computation-norm error, or NaN when the problem has no closed-form solution.
//
// # Safety
// `problem` must be a live handle; `out` must be valid; `error` may be NULL.
enum RdfemStatus rdfem_solve(const struct RdfemProblem *problem,
                             size_t n,
                             struct RdfemField **out,
                             double *error);

// # Safety
// `field` must come from [`rdfem_solve`] (or be NULL) and not be used afterwards.
void rdfem_field_free(struct RdfemField *field);

// # Safety
// `field` must be a live handle and `out` valid.
enum RdfemStatus rdfem_field_dof_count(const struct RdfemField *field, size_t *out);

// Copies the coefficient vector into `buf`, which must hold `len` ≥ dof count values.
//
// # Safety
// `field` must be a live handle and `buf` point to `len` writable values.
enum RdfemStatus rdfem_field_dofs(const struct RdfemField *field, double *buf, size_t len);

// Evaluates the field at `x` (`dim` coordinates).
//
// # Safety
// `field` must be a live handle, `x` point to `dim` values and `out` be valid.
enum RdfemStatus rdfem_field_eval(const struct RdfemField *field,
                                  const double *x,
                                  size_t dim,
                                  double *out);

// # Safety
// `field` must be a live handle and `path` a NUL-terminated string.
enum RdfemStatus rdfem_field_write_vtk(const struct RdfemField *field, const char *path);

// `log(e1/e2)/log(h1/h2)`
//
// # Safety
// `out` must be valid.
enum RdfemStatus rdfem_convergence_rate(double e1, double e2, double h1, double h2, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDFEM_H */
