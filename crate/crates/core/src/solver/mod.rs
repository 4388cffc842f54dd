//! Sparse linear algebra, Newton iteration and backward-Euler time stepping.

pub mod linear;
pub mod sparse;
pub mod stepping;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use linear::{linear_solve, CholeskyFactor, Preconditioner};
pub use sparse::CsrMatrix;
pub use stepping::{
    backward_euler_step, newton_solve, run_time_integration, NewtonStats, ReactionTerm, RunSummary, StepContext,
    StepObserver, StepRecord, StepSystem, TimeState,
};

/// Preconditioner used by the conjugate gradient solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    /// Inverse diagonal.
    Jacobi,
    /// Sparse Cholesky factor of `M/Δt + νK̂`, computed once per run and
    /// reused for every Newton system of that run.
    Cholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub newton_abs_tol: f64,
    pub newton_rel_tol: f64,
    pub newton_max_iter: usize,
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    pub linear_rel_tol: f64,
    /// Defaults to ten times the system size.
    pub linear_max_iter: Option<usize>,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_abs_tol: 1e-10,
            newton_rel_tol: 1e-8,
            newton_max_iter: 50,
            backtrack_factor: 0.5,
            max_halvings: 20,
            linear_rel_tol: 1e-10,
            linear_max_iter: None,
            preconditioner: PreconditionerKind::Cholesky,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_abs_tol", self.newton_abs_tol),
            ("newton_rel_tol", self.newton_rel_tol),
            ("linear_rel_tol", self.linear_rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::invalid("backtrack_factor must lie in (0, 1)"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::invalid("newton_max_iter must be at least 1"));
        }
        Ok(())
    }
}
