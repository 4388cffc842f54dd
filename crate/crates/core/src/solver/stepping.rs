//! Newton iteration and the backward-Euler time loop
//!
//! ```text
//! (M/Δt)(u^k − u^{k−1}) + νK̂u^k + r(u^k) = b^k,   b^k_i = ∫ f^k χ_i,
//! ```
//!
//! solved on the free dofs, with `K̂ = K` (conforming, Crouzeix–Raviart) or
//! `K̂ = K + F_dg` (interior penalty).

use std::sync::Arc;

use super::linear::{norm, solve_with, CholeskyFactor, Preconditioner};
use super::sparse::CsrMatrix;
use super::{PreconditionerKind, SolverConfig};
use crate::assembly::{apply_dirichlet, assemble_load, AssembledForms, ConstrainedSystem, DofReduction, LoadOptions};
use crate::error::{Error, Result};
use crate::nonlinear::{ReactionOperator, ReactionSpec};
use crate::problem::ProblemSpec;
use crate::projections::set_initial;
use crate::spaces::{DiscreteField, FeSpace, Scheme};

/// Nonlinear part of a Newton system, acting on free coefficients.
pub trait ReactionTerm {
    fn residual(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> CsrMatrix;

    /// `a0 + r'(x)`.
    fn jacobian_plus(&self, a0: &CsrMatrix, x: &[f64]) -> CsrMatrix {
        a0.add(&self.jacobian(x), 1.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonStats {
    pub iterations: usize,
    /// Euclidean residual norm before each iteration and after the last.
    pub residuals: Vec<f64>,
}

impl NewtonStats {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Solves `A0 x + r(x) = rhs` by damped Newton starting from `guess`.
///
/// Each linear system `(A0 + r'(x)) δ = −R` is solved by conjugate gradients
/// preconditioned with `pc` (typically a factorization of `A0`), falling back
/// to a direct solve. Steps are halved until the residual norm decreases.
pub fn newton_solve(
    a0: &CsrMatrix,
    rhs: &[f64],
    reaction: &dyn ReactionTerm,
    guess: &[f64],
    pc: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, NewtonStats)> {
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = a0.mul_vec(x);
        let rr = reaction.residual(x);
        for i in 0..r.len() {
            r[i] += rr[i] - rhs[i];
        }
        r
    };
    let mut x = guess.to_vec();
    let mut r = residual(&x);
    let mut rn = norm(&r);
    let target = cfg.newton_abs_tol.max(cfg.newton_rel_tol * rn);
    let mut stats = NewtonStats {
        iterations: 0,
        residuals: vec![rn],
    };
    while rn > target {
        if stats.iterations >= cfg.newton_max_iter {
            return Err(Error::NewtonDiverged {
                iterations: stats.iterations,
                residual: rn,
            });
        }
        let jac = reaction.jacobian_plus(a0, &x);
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = solve_with(&jac, &neg, None, pc, cfg)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
            let rt = residual(&trial);
            let rtn = norm(&rt);
            if rtn < rn {
                accepted = Some((trial, rt, rtn));
                break;
            }
            lambda *= cfg.backtrack_factor;
        }
        stats.iterations += 1;
        match accepted {
            Some((xt, rt, rtn)) => {
                x = xt;
                r = rt;
                rn = rtn;
                stats.residuals.push(rn);
            }
            None => {
                return Err(Error::NewtonDiverged {
                    iterations: stats.iterations,
                    residual: rn,
                })
            }
        }
    }
    Ok((x, stats))
}

/// Everything about one run that stays fixed across time steps.
pub struct StepSystem {
    space: Arc<FeSpace>,
    scheme: Scheme,
    nu: f64,
    dt: f64,
    forms: AssembledForms,
    system: ConstrainedSystem,
    reaction: ReactionOperator,
    /// `M/Δt + νK̂` on the free dofs.
    a0: CsrMatrix,
    mass_dt: CsrMatrix,
    pc: Preconditioner,
    jac_slots: Vec<usize>,
}

impl std::fmt::Debug for StepSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepSystem")
            .field("scheme", &self.scheme)
            .field("nu", &self.nu)
            .field("dt", &self.dt)
            .field("free_dofs", &self.system.reduction.n_free())
            .finish()
    }
}

struct FreeReaction<'a> {
    sys: &'a StepSystem,
}

impl ReactionTerm for FreeReaction<'_> {
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let red = &self.sys.system.reduction;
        let full = red.extend(x);
        red.restrict(&self.sys.reaction.residual(&self.sys.space, &full))
    }

    fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        let red = &self.sys.system.reduction;
        let full = red.extend(x);
        red.restrict_matrix(&self.sys.reaction.jacobian(&self.sys.space, &full))
    }

    fn jacobian_plus(&self, a0: &CsrMatrix, x: &[f64]) -> CsrMatrix {
        let full = self.sys.system.reduction.extend(x);
        let mut jac = a0.clone();
        self.sys
            .reaction
            .add_jacobian_to(&self.sys.space, &full, &self.sys.jac_slots, jac.values_mut());
        jac
    }
}

/// Index into `a0`'s values for every local (cell, i, j) pair; the reaction
/// couples only dofs sharing a cell, and the mass matrix already does.
fn jacobian_slots(space: &FeSpace, red: &DofReduction, a0: &CsrMatrix) -> Result<Vec<usize>> {
    let nl = space.local_count();
    let mut slots = Vec::with_capacity(space.mesh().n_cells() * nl * nl);
    for c in 0..space.mesh().n_cells() {
        let dofs = space.cell_dofs(c);
        for &di in dofs {
            for &dj in dofs {
                let slot = match (red.free_index(di), red.free_index(dj)) {
                    (Some(i), Some(j)) => a0
                        .position(i, j)
                        .ok_or_else(|| Error::invalid("reaction pattern is not contained in the mass pattern"))?,
                    _ => usize::MAX,
                };
                slots.push(slot);
            }
        }
    }
    Ok(slots)
}

impl StepSystem {
    pub fn new(
        space: Arc<FeSpace>,
        scheme: Scheme,
        gamma: Option<f64>,
        nu: f64,
        reaction: &ReactionSpec,
        dt: f64,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        if scheme.space_kind() != space.kind() {
            return Err(Error::invalid(format!("scheme {scheme} does not match the space {:?}", space.kind())));
        }
        if !(nu > 0.0) {
            return Err(Error::invalid(format!("diffusion coefficient must be positive, got {nu}")));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        cfg.validate()?;
        let forms = AssembledForms::assemble(&space, gamma)?;
        let system = apply_dirichlet(&forms, scheme);
        let mass_dt = system.mass.scaled(1.0 / dt);
        let a0 = mass_dt.add(&system.diffusion, nu);
        let pc = match cfg.preconditioner {
            PreconditionerKind::Jacobi => Preconditioner::jacobi(&a0),
            PreconditionerKind::Cholesky => Preconditioner::Cholesky(Arc::new(CholeskyFactor::new(&a0)?)),
        };
        let reaction = ReactionOperator::new(&space, reaction)?;
        let jac_slots = jacobian_slots(&space, &system.reduction, &a0)?;
        Ok(StepSystem {
            space,
            scheme,
            nu,
            dt,
            forms,
            system,
            reaction,
            a0,
            mass_dt,
            pc,
            jac_slots,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn forms(&self) -> &AssembledForms {
        &self.forms
    }

    pub fn constrained(&self) -> &ConstrainedSystem {
        &self.system
    }

    /// Solves one step for `u^k` given `u^{k−1}` and the full load vector.
    pub fn solve_step(&self, previous: &[f64], load: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, NewtonStats)> {
        let red = &self.system.reduction;
        let prev = red.restrict(previous);
        let mut rhs = self.mass_dt.mul_vec(&prev);
        for (r, b) in rhs.iter_mut().zip(red.restrict(load)) {
            *r += b;
        }
        let (x, stats) = newton_solve(&self.a0, &rhs, &FreeReaction { sys: self }, &prev, &self.pc, cfg)?;
        Ok((red.extend(&x), stats))
    }
}

/// State after step `k`.
#[derive(Debug, Clone)]
pub struct TimeState {
    pub step: usize,
    pub time: f64,
    pub current: DiscreteField,
    pub previous: DiscreteField,
    pub newton: NewtonStats,
}

impl TimeState {
    /// State at `t = 0` holding the initial field.
    pub fn initial(u0: DiscreteField) -> Self {
        TimeState {
            step: 0,
            time: 0.0,
            previous: u0.clone(),
            current: u0,
            newton: NewtonStats::default(),
        }
    }
}

/// Advances `state` by one backward-Euler step. `load` must already hold
/// `∫ f^k χ_i` for the new step.
pub fn backward_euler_step(state: &TimeState, system: &StepSystem, cfg: &SolverConfig, load: &[f64]) -> Result<TimeState> {
    let step = state.step + 1;
    let (coeffs, newton) = system
        .solve_step(state.current.coeffs(), load, cfg)
        .map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })?;
    Ok(TimeState {
        step,
        time: step as f64 * system.dt(),
        current: DiscreteField::new(Arc::clone(system.space()), coeffs)?,
        previous: state.current.clone(),
        newton,
    })
}

/// Information handed to observers along with each state.
pub struct StepContext<'a> {
    pub system: &'a StepSystem,
    pub problem: &'a ProblemSpec,
    /// Full load vector of the step just taken (zero for the initial call).
    pub load: &'a [f64],
}

/// Receives the initial state and every subsequent step of a run.
pub trait StepObserver {
    fn initial(&mut self, _state: &TimeState, _ctx: &StepContext<'_>) -> Result<()> {
        Ok(())
    }

    fn step(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: TimeState,
    pub records: Vec<StepRecord>,
    pub dt: f64,
}

/// Runs `N = round(T/Δt)` steps of `problem` on `space` from the scheme's
/// initial projection, notifying `observers` after every step.
pub fn run_time_integration(
    problem: &ProblemSpec,
    space: Arc<FeSpace>,
    cfg: &SolverConfig,
    observers: &mut [&mut dyn StepObserver],
) -> Result<RunSummary> {
    let scheme = problem.scheme();
    let (dt, n_steps) = problem.time_steps(space.mesh().h())?;
    let system = StepSystem::new(
        Arc::clone(&space),
        scheme,
        (scheme == Scheme::Dg).then_some(problem.gamma),
        problem.nu,
        &problem.reaction,
        dt,
        cfg,
    )?;
    let u0 = set_initial(&space, scheme, problem.reaction.p, &problem.initial_data(), cfg)?;
    let forcing = problem.forcing()?;
    let mut state = TimeState::initial(u0);
    let zero = vec![0.0; space.dof_count()];
    {
        let ctx = StepContext {
            system: &system,
            problem,
            load: &zero,
        };
        for o in observers.iter_mut() {
            o.initial(&state, &ctx)?;
        }
    }
    let mut records = Vec::with_capacity(n_steps);
    let opts = LoadOptions::default();
    for k in 1..=n_steps {
        let (t0, t1) = ((k - 1) as f64 * dt, k as f64 * dt);
        let load = assemble_load(&space, |x, t| forcing(x, t), t0, t1, opts)?;
        state = backward_euler_step(&state, &system, cfg, &load)?;
        records.push(StepRecord {
            step: k,
            time: state.time,
            newton_iterations: state.newton.iterations,
            residual: state.newton.final_residual(),
        });
        let ctx = StepContext {
            system: &system,
            problem,
            load: &load,
        };
        for o in observers.iter_mut() {
            o.step(&state, &ctx)?;
        }
    }
    Ok(RunSummary {
        final_state: state,
        records,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;
    use crate::spaces::{build_space, SpaceKind};

    struct Cubic;

    impl ReactionTerm for Cubic {
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            x.iter().map(|v| v * v * v).collect()
        }

        fn jacobian(&self, x: &[f64]) -> CsrMatrix {
            CsrMatrix::from_triplets(x.len(), &x.iter().enumerate().map(|(i, v)| (i, i, 3.0 * v * v)).collect::<Vec<_>>())
        }
    }

    #[test]
    fn scalar_newton() {
        // u + u³ = 2 from u = 0
        let a0 = CsrMatrix::identity(1);
        let cfg = SolverConfig::default();
        let (x, stats) = newton_solve(&a0, &[2.0], &Cubic, &[0.0], &Preconditioner::Identity, &cfg).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12, "{x:?}");
        let r = &stats.residuals;
        let n = r.len();
        assert!(r[n - 1] <= 0.5 * r[n - 2]);
    }

    #[test]
    fn linear_case_takes_one_iteration() {
        let mesh = Arc::new(build_unit_square_mesh(6).unwrap());
        let space = Arc::new(build_space(mesh, SpaceKind::P1Conforming));
        let spec = ReactionSpec::damped(1.0, 2.0).unwrap();
        let cfg = SolverConfig::default();
        let sys = StepSystem::new(Arc::clone(&space), Scheme::Cfem, None, 0.7, &spec, 0.05, &cfg).unwrap();
        let prev = space.interpolate(|x| (x[0] * x[1] * (1.0 - x[0]) * (1.0 - x[1])).sqrt());
        let mut prev_c = prev.into_coeffs();
        for d in space.boundary_dofs() {
            prev_c[d] = 0.0;
        }
        let load = assemble_load(&space, |x, t| x[0] + t, 0.0, 0.05, LoadOptions::default()).unwrap();
        let (u, stats) = sys.solve_step(&prev_c, &load, &cfg).unwrap();
        assert_eq!(stats.iterations, 1);
        // Independent linear solve of ((1/Δt + α)M + νK) u = (M/Δt) u_prev + b.
        let c = sys.constrained();
        let red = &c.reduction;
        let a = c.mass.scaled(1.0 / 0.05 + 1.0).add(&c.diffusion, 0.7);
        let mut rhs = c.mass.scaled(1.0 / 0.05).mul_vec(&red.restrict(&prev_c));
        for (r, b) in rhs.iter_mut().zip(red.restrict(&load)) {
            *r += b;
        }
        let x = crate::solver::linear::direct_solve(&a, &rhs).unwrap();
        for (a, b) in red.restrict(&u).iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let mesh = Arc::new(build_unit_square_mesh(4).unwrap());
        let space = Arc::new(build_space(mesh, SpaceKind::Discontinuous));
        let spec = ReactionSpec::damped(1.0, 4.0).unwrap();
        let cfg = SolverConfig::default();
        let sys = StepSystem::new(Arc::clone(&space), Scheme::Dg, Some(10.0), 1.0, &spec, 0.01, &cfg).unwrap();
        let mut state = TimeState::initial(DiscreteField::zeros(Arc::clone(&space)));
        let load = vec![0.0; space.dof_count()];
        for _ in 0..3 {
            state = backward_euler_step(&state, &sys, &cfg, &load).unwrap();
            assert!(state.current.coeffs().iter().all(|&v| v == 0.0));
            assert_eq!(state.newton.iterations, 0);
        }
        assert_eq!(state.step, 3);
        assert!((state.time - 0.03).abs() < 1e-15);
    }

    #[test]
    fn scheme_space_mismatch_rejected() {
        let mesh = Arc::new(build_unit_square_mesh(2).unwrap());
        let space = Arc::new(build_space(mesh, SpaceKind::P1Conforming));
        let spec = ReactionSpec::damped(1.0, 4.0).unwrap();
        assert!(StepSystem::new(space, Scheme::Dg, Some(10.0), 1.0, &spec, 0.01, &SolverConfig::default()).is_err());
    }

    #[test]
    fn scattered_jacobian_matches_triplet_assembly() {
        let spec = ReactionSpec::new(1.0, 4.0, vec![crate::nonlinear::Pumping { beta: 0.5, q: 3.0 }]).unwrap();
        let cfg = SolverConfig::default();
        for (kind, scheme, gamma) in [
            (SpaceKind::P1Conforming, Scheme::Cfem, None),
            (SpaceKind::CrouzeixRaviart, Scheme::Ncfem, None),
            (SpaceKind::Discontinuous, Scheme::Dg, Some(10.0)),
        ] {
            let mesh = Arc::new(build_unit_square_mesh(4).unwrap());
            let space = Arc::new(build_space(mesh, kind));
            let sys = StepSystem::new(Arc::clone(&space), scheme, gamma, 0.3, &spec, 0.1, &cfg).unwrap();
            let x: Vec<f64> = (0..sys.constrained().reduction.n_free()).map(|i| (i as f64 * 0.37).sin()).collect();
            let term = FreeReaction { sys: &sys };
            let fast = term.jacobian_plus(&sys.a0, &x);
            let slow = sys.a0.add(&term.jacobian(&x), 1.0);
            assert!(fast.max_abs_diff(&slow) < 1e-14, "{scheme}");
        }
    }
}
