//! C ABI for `rdfem`.
//!
//! Objects are exposed as opaque handles created by `*_create`/`*_lookup`/
//! `*_run` functions and released with the matching `*_free`. Every fallible
//! function returns an [`RdfemStatus`]; on failure the message is available
//! from [`rdfem_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rdfem::analysis::convergence_rate;
use rdfem::harness::{lookup, run_study, solve, write_csv, write_vtk, SchemeStudy, StudyOptions};
use rdfem::mesh::build_unit_mesh;
use rdfem::solver::SolverConfig;
use rdfem::{DiscreteField, DtPolicy, Error, ErrorMode, Mesh, ProblemSpec, Scheme};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdfemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    SolverFailure = 4,
    Io = 5,
    Parse = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdfemScheme {
    Cfem = 0,
    Ncfem = 1,
    Dg = 2,
}

impl From<RdfemScheme> for Scheme {
    fn from(s: RdfemScheme) -> Self {
        match s {
            RdfemScheme::Cfem => Scheme::Cfem,
            RdfemScheme::Ncfem => Scheme::Ncfem,
            RdfemScheme::Dg => Scheme::Dg,
        }
    }
}

impl From<Scheme> for RdfemScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Cfem => RdfemScheme::Cfem,
            Scheme::Ncfem => RdfemScheme::Ncfem,
            Scheme::Dg => RdfemScheme::Dg,
        }
    }
}

/// One row of a convergence table. `rate` is NaN for the coarsest grid.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdfemReportRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    pub rate: f64,
}

/// Structured simplicial mesh of the unit square or cube.
pub struct RdfemMesh(Mesh);

/// Benchmark problem with its run parameters.
pub struct RdfemProblem {
    spec: ProblemSpec,
    n_ref: Option<usize>,
}

/// Convergence tables of a study, one per scheme.
pub struct RdfemStudy(Vec<SchemeStudy>);

/// Finite element function at the final time of a run.
pub struct RdfemField(DiscreteField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RdfemStatus {
    match e {
        Error::InvalidArgument(_) | Error::UnsupportedDegree { .. } | Error::OutsideDomain { .. } => {
            RdfemStatus::InvalidArgument
        }
        Error::NonHomogeneousBoundary { .. } => RdfemStatus::InvalidArgument,
        Error::UnknownProblem(_) => RdfemStatus::UnknownProblem,
        Error::SingularSystem(_) | Error::NewtonDiverged { .. } => RdfemStatus::SolverFailure,
        Error::Step { source, .. } | Error::Grid { source, .. } => status_of(source),
        Error::Parse { .. } => RdfemStatus::Parse,
        Error::Io { .. } => RdfemStatus::Io,
    }
}

enum Failure {
    Status(RdfemStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RdfemStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RdfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RdfemStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RdfemStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(RdfemStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rdfem_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rdfem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdfem_mesh_create(dim: usize, n: usize, out: *mut *mut RdfemMesh) -> RdfemStatus {
    guard(|| {
        let mesh = build_unit_mesh(dim, n)?;
        write_out(out, Box::into_raw(Box::new(RdfemMesh(mesh))), "out")
    })
}

/// # Safety
/// `mesh` must come from [`rdfem_mesh_create`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdfem_mesh_free(mesh: *mut RdfemMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle; output pointers may be NULL to skip a count.
#[no_mangle]
pub unsafe extern "C" fn rdfem_mesh_counts(
    mesh: *const RdfemMesh,
    cells: *mut usize,
    vertices: *mut usize,
    facets: *mut usize,
) -> RdfemStatus {
    guard(|| {
        let m = &deref(mesh, "mesh")?.0;
        for (out, v) in [(cells, m.n_cells()), (vertices, m.n_vertices()), (facets, m.n_facets())] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}

/// Largest cell diameter.
///
/// # Safety
/// `mesh` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_mesh_h(mesh: *const RdfemMesh, out: *mut f64) -> RdfemStatus {
    guard(|| write_out(out, deref(mesh, "mesh")?.0.h(), "out"))
}

/// Looks up a built-in problem by name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_lookup(name: *const c_char, out: *mut *mut RdfemProblem) -> RdfemStatus {
    guard(|| {
        let spec = lookup(c_str(name, "name")?)?;
        write_out(out, Box::into_raw(Box::new(RdfemProblem { spec, n_ref: None })), "out")
    })
}

/// # Safety
/// `problem` must come from [`rdfem_problem_lookup`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_free(problem: *mut RdfemProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Restricts the problem to a single scheme.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_scheme(problem: *mut RdfemProblem, scheme: RdfemScheme) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        p.spec = p.spec.with_scheme(scheme.into());
        Ok(())
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_gamma(problem: *mut RdfemProblem, gamma: f64) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        let mut spec = p.spec.clone();
        spec.gamma = gamma;
        spec.validate()?;
        p.spec = spec;
        Ok(())
    })
}

/// Uses a fixed time step.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_dt(problem: *mut RdfemProblem, dt: f64) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        let mut spec = p.spec.clone();
        spec.dt = DtPolicy::Fixed(dt);
        spec.validate()?;
        p.spec = spec;
        Ok(())
    })
}

/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_final_time(problem: *mut RdfemProblem, t: f64) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        let mut spec = p.spec.clone();
        spec.final_time = t;
        spec.validate()?;
        p.spec = spec;
        Ok(())
    })
}

/// Replaces the grid list of a study.
///
/// # Safety
/// `problem` must be a live handle and `grids` point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_grids(problem: *mut RdfemProblem, grids: *const usize, len: usize) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        if grids.is_null() {
            return Err(null("grids"));
        }
        let mut spec = p.spec.clone();
        spec.grids = std::slice::from_raw_parts(grids, len).to_vec();
        spec.validate()?;
        p.spec = spec;
        Ok(())
    })
}

/// Reference resolution for problems without a closed-form solution.
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rdfem_problem_set_n_ref(problem: *mut RdfemProblem, n_ref: usize) -> RdfemStatus {
    guard(|| {
        let p = deref_mut(problem, "problem")?;
        if !matches!(p.spec.mode, ErrorMode::Reference { .. }) {
            return Err(Failure::Status(
                RdfemStatus::InvalidArgument,
                format!("{} has a closed-form solution", p.spec.name),
            ));
        }
        p.n_ref = Some(n_ref);
        Ok(())
    })
}

/// Runs the convergence study with default solver settings.
///
/// # Safety
/// `problem` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_run(problem: *const RdfemProblem, out: *mut *mut RdfemStudy) -> RdfemStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let opts = StudyOptions {
            solver: SolverConfig::default(),
            grids: None,
            n_ref: p.n_ref,
        };
        let s = run_study(&p.spec, &opts)?;
        write_out(out, Box::into_raw(Box::new(RdfemStudy(s))), "out")
    })
}

/// # Safety
/// `study` must come from [`rdfem_study_run`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_free(study: *mut RdfemStudy) {
    if !study.is_null() {
        drop(Box::from_raw(study));
    }
}

unsafe fn scheme_study<'a>(study: *const RdfemStudy, index: usize) -> Result<&'a SchemeStudy, Failure> {
    let s = &deref(study, "study")?.0;
    s.get(index).ok_or_else(|| {
        Failure::Status(
            RdfemStatus::OutOfRange,
            format!("scheme index {index} out of range ({} tables)", s.len()),
        )
    })
}

/// Number of tables (one per scheme).
///
/// # Safety
/// `study` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_table_count(study: *const RdfemStudy, out: *mut usize) -> RdfemStatus {
    guard(|| write_out(out, deref(study, "study")?.0.len(), "out"))
}

/// # Safety
/// `study` must be a live handle and output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_table_info(
    study: *const RdfemStudy,
    table: usize,
    scheme: *mut RdfemScheme,
    rows: *mut usize,
    stable: *mut bool,
) -> RdfemStatus {
    guard(|| {
        let s = scheme_study(study, table)?;
        write_out(scheme, s.report.scheme.into(), "scheme")?;
        write_out(rows, s.report.rows.len(), "rows")?;
        write_out(stable, s.stability_holds(), "stable")
    })
}

/// # Safety
/// `study` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_row(
    study: *const RdfemStudy,
    table: usize,
    row: usize,
    out: *mut RdfemReportRow,
) -> RdfemStatus {
    guard(|| {
        let s = scheme_study(study, table)?;
        let r = s
            .report
            .rows
            .get(row)
            .ok_or_else(|| Failure::Status(RdfemStatus::OutOfRange, format!("row {row} out of range")))?;
        write_out(
            out,
            RdfemReportRow {
                n: r.n,
                h: r.h,
                error: r.error,
                rate: r.rate.unwrap_or(f64::NAN),
            },
            "out",
        )
    })
}

/// Writes one table as CSV (`grid,h,error,rate`).
///
/// # Safety
/// `study` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rdfem_study_write_csv(study: *const RdfemStudy, table: usize, path: *const c_char) -> RdfemStatus {
    guard(|| {
        let s = scheme_study(study, table)?;
        write_csv(&s.report, Path::new(c_str(path, "path")?))?;
        Ok(())
    })
}

/// Solves the problem's first scheme on grid `n`. `error` receives the
/// computation-norm error, or NaN when the problem has no closed-form solution.
///
/// # Safety
/// `problem` must be a live handle; `out` must be valid; `error` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rdfem_solve(
    problem: *const RdfemProblem,
    n: usize,
    out: *mut *mut RdfemField,
    error: *mut f64,
) -> RdfemStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = solve(&p.spec, n, &SolverConfig::default())?;
        if !error.is_null() {
            error.write(r.error.unwrap_or(f64::NAN));
        }
        out.write(Box::into_raw(Box::new(RdfemField(r.field))));
        Ok(())
    })
}

/// # Safety
/// `field` must come from [`rdfem_solve`] (or be NULL) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdfem_field_free(field: *mut RdfemField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_field_dof_count(field: *const RdfemField, out: *mut usize) -> RdfemStatus {
    guard(|| write_out(out, deref(field, "field")?.0.coeffs().len(), "out"))
}

/// Copies the coefficient vector into `buf`, which must hold `len` ≥ dof count values.
///
/// # Safety
/// `field` must be a live handle and `buf` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rdfem_field_dofs(field: *const RdfemField, buf: *mut f64, len: usize) -> RdfemStatus {
    guard(|| {
        let c = deref(field, "field")?.0.coeffs();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < c.len() {
            return Err(Failure::Status(
                RdfemStatus::OutOfRange,
                format!("buffer holds {len} values, field has {}", c.len()),
            ));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), buf, c.len());
        Ok(())
    })
}

/// Evaluates the field at `x` (`dim` coordinates).
///
/// # Safety
/// `field` must be a live handle, `x` point to `dim` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_field_eval(field: *const RdfemField, x: *const f64, dim: usize, out: *mut f64) -> RdfemStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if x.is_null() {
            return Err(null("x"));
        }
        if dim != f.space().dim() {
            return Err(Failure::Status(
                RdfemStatus::InvalidArgument,
                format!("point has {dim} coordinates, mesh is {}D", f.space().dim()),
            ));
        }
        let v = f.eval(std::slice::from_raw_parts(x, dim))?;
        write_out(out, v, "out")
    })
}

/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rdfem_field_write_vtk(field: *const RdfemField, path: *const c_char) -> RdfemStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        write_vtk(f, "u", Path::new(c_str(path, "path")?))?;
        Ok(())
    })
}

/// `log(e1/e2)/log(h1/h2)`
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rdfem_convergence_rate(e1: f64, e2: f64, h1: f64, h2: f64, out: *mut f64) -> RdfemStatus {
    guard(|| write_out(out, convergence_rate(e1, e2, h1, h2)?, "out"))
}
