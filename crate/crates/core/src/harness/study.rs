//! Convergence studies and single runs.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::reference::{build_reference, ReferenceErrorObserver, ReferenceSolution};
use crate::analysis::{ConvergenceReport, ExactErrorObserver, StabilityCheck, StabilityObserver};
use crate::error::{Error, Result};
use crate::mesh::build_unit_mesh;
use crate::problem::{ErrorMode, ProblemSpec};
use crate::solver::{run_time_integration, SolverConfig, StepObserver};
use crate::spaces::{build_space, DiscreteField, Scheme};

/// Environment variable capping the number of grids solved concurrently.
pub const THREADS_ENV: &str = "RDFEM_THREADS";

#[derive(Debug, Clone, Default)]
pub struct StudyOptions {
    pub solver: SolverConfig,
    /// Overrides the problem's grid list.
    pub grids: Option<Vec<usize>>,
    /// Reference resolution; defaults to four times the finest grid.
    pub n_ref: Option<usize>,
}

/// Outcome of one grid in a study.
#[derive(Debug, Clone)]
pub struct GridRun {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub error: f64,
    pub stability: StabilityCheck,
    pub newton_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SchemeStudy {
    pub report: ConvergenceReport,
    pub runs: Vec<GridRun>,
    /// Resolution and wall time of the reference run, in reference mode.
    pub reference: Option<(usize, f64)>,
}

impl SchemeStudy {
    pub fn stability_holds(&self) -> bool {
        self.runs.iter().all(|r| r.stability.holds())
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn check_grids(grids: &[usize]) -> Result<()> {
    if grids.is_empty() {
        return Err(Error::invalid("a study needs at least one grid"));
    }
    if grids.contains(&0) || grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("grids must be positive and strictly increasing, got {grids:?}")));
    }
    Ok(())
}

/// Runs the convergence study of `problem` for each of its schemes.
pub fn run_study(problem: &ProblemSpec, opts: &StudyOptions) -> Result<Vec<SchemeStudy>> {
    problem.validate()?;
    opts.solver.validate()?;
    let grids = opts.grids.clone().unwrap_or_else(|| problem.grids.clone());
    check_grids(&grids)?;
    let run = || -> Result<Vec<SchemeStudy>> {
        problem
            .schemes
            .iter()
            .map(|&s| study_scheme(&problem.with_scheme(s), &grids, opts))
            .collect()
    };
    match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn study_scheme(problem: &ProblemSpec, grids: &[usize], opts: &StudyOptions) -> Result<SchemeStudy> {
    let scheme = problem.scheme();
    let reference = match problem.mode {
        ErrorMode::Exact => None,
        ErrorMode::Reference { n_ref } => {
            let finest = *grids.last().expect("grids checked non-empty");
            let n_ref = opts.n_ref.or(n_ref).unwrap_or(4 * finest);
            if grids.iter().any(|&n| n_ref <= n || n_ref % n != 0) {
                return Err(Error::invalid(format!(
                    "reference grid {n_ref} must be a proper multiple of every grid in {grids:?}"
                )));
            }
            let start = Instant::now();
            let r = build_reference(problem, n_ref, &opts.solver)?;
            Some((r, start.elapsed().as_secs_f64()))
        }
    };
    let runs: Vec<GridRun> = grids
        .par_iter()
        .map(|&n| {
            run_grid(problem, n, reference.as_ref().map(|(r, _)| r), &opts.solver)
                .map_err(|e| Error::Grid { grid: n, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let data: Vec<(usize, f64, f64)> = runs.iter().map(|r| (r.n, r.h, r.error)).collect();
    Ok(SchemeStudy {
        report: ConvergenceReport::from_errors(&problem.name, scheme, problem.dim, &data)?,
        runs,
        reference: reference.map(|(r, t)| (r.n_ref, t)),
    })
}

fn run_grid(problem: &ProblemSpec, n: usize, reference: Option<&ReferenceSolution>, cfg: &SolverConfig) -> Result<GridRun> {
    let start = Instant::now();
    let mesh = Arc::new(build_unit_mesh(problem.dim, n)?);
    let h = mesh.h();
    let space = Arc::new(build_space(mesh, problem.scheme().space_kind()));
    let mut stability = StabilityObserver::new(problem)?;
    let (summary, error) = match reference {
        None => {
            let mut err = ExactErrorObserver::new(problem);
            let s = run_time_integration(problem, space, cfg, &mut [&mut err, &mut stability])?;
            (s, err.finalize()?)
        }
        Some(r) => {
            let mut err = ReferenceErrorObserver::new(r, problem);
            let s = run_time_integration(problem, space, cfg, &mut [&mut err, &mut stability])?;
            (s, err.finalize()?)
        }
    };
    Ok(GridRun {
        n,
        h,
        dt: summary.dt,
        steps: summary.records.len(),
        error,
        stability: stability.result(),
        newton_iterations: summary.records.iter().map(|r| r.newton_iterations).sum(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Result of a single run.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub scheme: Scheme,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub field: DiscreteField,
    /// Computation-norm error; only available for problems with a closed-form solution.
    pub error: Option<f64>,
    pub stability: StabilityCheck,
}

/// Solves `problem` (its first scheme) on grid `n` up to the final time.
pub fn solve(problem: &ProblemSpec, n: usize, cfg: &SolverConfig) -> Result<SolveOutcome> {
    problem.validate()?;
    cfg.validate()?;
    let mesh = Arc::new(build_unit_mesh(problem.dim, n)?);
    let space = Arc::new(build_space(mesh, problem.scheme().space_kind()));
    let mut stability = StabilityObserver::new(problem)?;
    let exact_mode = matches!(problem.mode, ErrorMode::Exact);
    let mut err = ExactErrorObserver::new(problem);
    let summary = {
        let mut obs: Vec<&mut dyn StepObserver> = vec![&mut stability];
        if exact_mode {
            obs.push(&mut err);
        }
        run_time_integration(problem, space, cfg, &mut obs)?
    };
    Ok(SolveOutcome {
        scheme: problem.scheme(),
        n,
        dt: summary.dt,
        steps: summary.records.len(),
        field: summary.final_state.current,
        error: if exact_mode { Some(err.finalize()?) } else { None },
        stability: stability.result(),
    })
}
