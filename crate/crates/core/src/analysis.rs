//! Error norms, space–time computation norms, free energy, the discrete
//! stability bound and convergence rates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_stiffness, reference_scale, AssembledForms};
use crate::error::{Error, Result};
use crate::nonlinear::{ReactionOperator, ReactionSpec};
use crate::problem::{ProblemSpec, SolutionBundle};
use crate::quadrature::{facet_rule, simplex_rule};
use crate::solver::linear::CholeskyFactor;
use crate::solver::{StepContext, StepObserver, TimeState};
use crate::spaces::{facet_traces, DiscreteField, Scheme};

/// Quadrature degree for standalone error evaluations.
pub const DEFAULT_ERROR_DEGREE: usize = 8;

/// Error quadrature degree for runs with reaction exponent `p`.
pub fn error_degree(p: f64) -> usize {
    crate::quadrature::reaction_degree(p) + 2
}

fn sq_l2_error(field: &DiscreteField, exact: &dyn Fn(&[f64]) -> f64, degree: usize) -> Result<f64> {
    let space = field.space();
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = simplex_rule(dim, degree)?;
    let scale = reference_scale(dim);
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c) * scale;
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let e = field.value_in_cell(c, bary) - exact(&x[..dim]);
            s += area * w * e * e;
        }
    }
    Ok(s)
}

fn sq_h1_error(field: &DiscreteField, grad: &dyn Fn(&[f64]) -> [f64; 3], degree: usize) -> Result<f64> {
    let space = field.space();
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = simplex_rule(dim, degree)?;
    let scale = reference_scale(dim);
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c) * scale;
        let gh = field.gradient_in_cell(c);
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let g = grad(&x[..dim]);
            let e: f64 = (0..dim).map(|a| (gh[a] - g[a]).powi(2)).sum();
            s += area * w * e;
        }
    }
    Ok(s)
}

/// `‖u_h − u‖_{L²}`
pub fn l2_error(field: &DiscreteField, exact: impl Fn(&[f64]) -> f64) -> Result<f64> {
    Ok(sq_l2_error(field, &exact, DEFAULT_ERROR_DEGREE)?.sqrt())
}

/// `‖∇_h u_h − ∇u‖_{L²}` with the broken gradient.
pub fn broken_h1_seminorm_error(field: &DiscreteField, exact_gradient: impl Fn(&[f64]) -> [f64; 3]) -> Result<f64> {
    Ok(sq_h1_error(field, &exact_gradient, DEFAULT_ERROR_DEGREE)?.sqrt())
}

/// `Σ_E (γ/h_E) ∫_E |⟦u_h⟧|²` over all facets (boundary facets included).
pub fn dg_jump_seminorm_sq(field: &DiscreteField, gamma: f64) -> Result<f64> {
    let mesh = field.space().mesh();
    let rule = facet_rule(mesh.dim() - 1, 2)?;
    let mut s = 0.0;
    for f in 0..mesh.n_facets() {
        let tr = facet_traces(field, f, &rule);
        let pen = gamma / mesh.facet(f).diameter;
        for q in 0..tr.weights.len() {
            let j = tr.jump(q);
            s += pen * tr.weights[q] * (j[0] * j[0] + j[1] * j[1] + j[2] * j[2]);
        }
    }
    Ok(s)
}

pub fn dg_jump_seminorm(field: &DiscreteField, gamma: f64) -> Result<f64> {
    Ok(dg_jump_seminorm_sq(field, gamma)?.sqrt())
}

/// `⫼v⫼²_DG = ‖∇_h v‖² + Σ_E (γ/h_E)‖⟦v⟧‖²`
pub fn dg_norm_sq(field: &DiscreteField, stiffness_quad: f64, gamma: f64) -> Result<f64> {
    Ok(stiffness_quad + dg_jump_seminorm_sq(field, gamma)?)
}

/// Which computation norm a report uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `(‖e(T)‖² + ν Σ Δt ‖∇e^k‖²)^{1/2}`
    Conforming,
    /// Same with the broken gradient.
    CrouzeixRaviart,
    /// Same with the broken gradient plus penalized jumps.
    Dg,
}

impl NormKind {
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Cfem => NormKind::Conforming,
            Scheme::Ncfem => NormKind::CrouzeixRaviart,
            Scheme::Dg => NormKind::Dg,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Conforming => "L2(T)+nu*sum dt H1",
            NormKind::CrouzeixRaviart => "L2(T)+nu*sum dt broken-H1",
            NormKind::Dg => "L2(T)+nu*sum dt DG",
        })
    }
}

/// Per-step error contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepError {
    pub step: usize,
    pub time: f64,
    /// `‖∇_h(u(t_k) − u_h^k)‖²`
    pub gradient_sq: f64,
    /// `Σ_E (γ/h_E)‖⟦u_h^k⟧‖²` (DG only)
    pub jump_sq: f64,
}

/// Running sums for the space–time computation norm.
#[derive(Debug, Clone)]
pub struct ErrorAccumulator {
    nu: f64,
    gradient_sum: f64,
    jump_sum: f64,
    records: Vec<StepError>,
}

impl ErrorAccumulator {
    pub fn new(nu: f64) -> Self {
        ErrorAccumulator {
            nu,
            gradient_sum: 0.0,
            jump_sum: 0.0,
            records: Vec::new(),
        }
    }

    pub fn add(&mut self, rec: StepError, dt: f64) {
        self.gradient_sum += self.nu * dt * rec.gradient_sq;
        self.jump_sum += self.nu * dt * rec.jump_sq;
        self.records.push(rec);
    }

    pub fn records(&self) -> &[StepError] {
        &self.records
    }

    /// Total norm given the squared final-time L² error.
    pub fn finalize(self, final_l2_sq: f64) -> f64 {
        (final_l2_sq + self.gradient_sum + self.jump_sum).sqrt()
    }
}

/// Computation-norm error of a trajectory `(t_k, u_h^k)`, `k = 1..N`, against
/// a smooth solution. `gamma` adds DG jump terms.
pub fn space_time_error(
    trajectory: &[(f64, DiscreteField)],
    exact: &dyn Fn(&[f64], f64) -> f64,
    exact_gradient: &dyn Fn(&[f64], f64) -> [f64; 3],
    nu: f64,
    dt: f64,
    gamma: Option<f64>,
    degree: usize,
) -> Result<f64> {
    let (t_final, last) = trajectory.last().ok_or_else(|| Error::invalid("empty trajectory"))?;
    let mut acc = ErrorAccumulator::new(nu);
    for (k, (t, u)) in trajectory.iter().enumerate() {
        let gradient_sq = sq_h1_error(u, &|x| exact_gradient(x, *t), degree)?;
        let jump_sq = match gamma {
            Some(g) => dg_jump_seminorm_sq(u, g)?,
            None => 0.0,
        };
        acc.add(
            StepError {
                step: k + 1,
                time: *t,
                gradient_sq,
                jump_sq,
            },
            dt,
        );
    }
    let l2 = sq_l2_error(last, &|x| exact(x, *t_final), degree)?;
    Ok(acc.finalize(l2))
}

/// Observer accumulating the computation-norm error against the problem's
/// manufactured solution.
pub struct ExactErrorObserver {
    exact: SolutionBundle,
    gamma: Option<f64>,
    degree: usize,
    acc: ErrorAccumulator,
    last: Option<(f64, DiscreteField)>,
}

impl ExactErrorObserver {
    pub fn new(problem: &ProblemSpec) -> Self {
        let scheme = problem.scheme();
        ExactErrorObserver {
            exact: problem.exact(),
            gamma: (scheme == Scheme::Dg).then_some(problem.gamma),
            degree: error_degree(problem.reaction.p),
            acc: ErrorAccumulator::new(problem.nu),
            last: None,
        }
    }

    pub fn finalize(self) -> Result<f64> {
        let (t, u) = self.last.ok_or_else(|| Error::invalid("no time step was observed"))?;
        let exact = &self.exact.u;
        let l2 = sq_l2_error(&u, &|x| exact(x, t), self.degree)?;
        Ok(self.acc.finalize(l2))
    }
}

impl StepObserver for ExactErrorObserver {
    fn step(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        let t = state.time;
        let grad = self
            .exact
            .grad
            .as_ref()
            .ok_or_else(|| Error::invalid("error norms need the solution gradient"))?;
        let gradient_sq = sq_h1_error(&state.current, &|x| grad(x, t), self.degree)?;
        let jump_sq = match self.gamma {
            Some(g) => dg_jump_seminorm_sq(&state.current, g)?,
            None => 0.0,
        };
        self.acc.add(
            StepError {
                step: state.step,
                time: t,
                gradient_sq,
                jump_sq,
            },
            ctx.system.dt(),
        );
        self.last = Some((t, state.current.clone()));
        Ok(())
    }
}

/// Ginzburg–Landau free energy
/// `∫ (ν/2)|∇_h u|² + (α/p)|u|^p − Σ(β/q)|u|^q`.
///
/// With `dg_gamma = Some(γ)` the gradient term is `(ν/2)·a_DG(u, u)` instead,
/// which is the energy the interior-penalty scheme dissipates.
pub fn free_energy(field: &DiscreteField, nu: f64, reaction: &ReactionSpec, dg_gamma: Option<f64>) -> Result<f64> {
    let space = field.space();
    let k = match dg_gamma {
        Some(_) => AssembledForms::assemble(space, dg_gamma)?.diffusion(),
        None => assemble_stiffness(space),
    };
    free_energy_with(field, nu, &k, &ReactionOperator::new(space, reaction)?)
}

fn free_energy_with(
    field: &DiscreteField,
    nu: f64,
    diffusion: &crate::solver::CsrMatrix,
    reaction: &ReactionOperator,
) -> Result<f64> {
    let c = field.coeffs();
    Ok(0.5 * nu * diffusion.quad_form(c, c) + reaction.energy(field.space(), c))
}

/// Observer recording the free energy of the initial field and every step.
pub struct EnergyObserver {
    reaction: Option<ReactionOperator>,
    values: Vec<f64>,
}

impl EnergyObserver {
    pub fn new() -> Self {
        EnergyObserver {
            reaction: None,
            values: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest increase `E[u^k] − E[u^{k−1}]` over the run (≤ 0 when dissipative).
    pub fn max_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    fn record(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        if self.reaction.is_none() {
            self.reaction = Some(ReactionOperator::new(ctx.system.space(), &ctx.problem.reaction)?);
        }
        let op = self.reaction.as_ref().expect("reaction operator initialized");
        let e = free_energy_with(&state.current, ctx.system.nu(), &ctx.system.forms().diffusion(), op)?;
        self.values.push(e);
        Ok(())
    }
}

impl Default for EnergyObserver {
    fn default() -> Self {
        Self::new()
    }
}

impl StepObserver for EnergyObserver {
    fn initial(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        self.record(state, ctx)
    }

    fn step(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        self.record(state, ctx)
    }
}

/// `r = log(e1/e2)/log(h1/h2)`
pub fn convergence_rate(e1: f64, e2: f64, h1: f64, h2: f64) -> Result<f64> {
    if !(e1 > 0.0 && e2 > 0.0 && h1 > 0.0 && h2 > 0.0) {
        return Err(Error::invalid(format!(
            "convergence rate needs positive errors and mesh sizes, got ({e1}, {e2}, {h1}, {h2})"
        )));
    }
    if h1 == h2 {
        return Err(Error::invalid("convergence rate needs two different mesh sizes"));
    }
    Ok((e1 / e2).ln() / (h1 / h2).ln())
}

/// `C* = Σ_ℓ |β_ℓ|·((p−q_ℓ)/p)·(2M|β_ℓ|q_ℓ/(αp))^{q_ℓ/(p−q_ℓ)}`
pub fn stability_constant(spec: &ReactionSpec) -> Result<f64> {
    let m = spec.m() as f64;
    let (alpha, p) = (spec.alpha, spec.p);
    let mut c = 0.0;
    for t in &spec.pumping {
        if t.q == p {
            return Err(Error::invalid("stability constant undefined for q = p"));
        }
        let b = t.beta.abs();
        c += b * ((p - t.q) / p) * (2.0 * m * b * t.q / (alpha * p)).powf(t.q / (p - t.q));
    }
    Ok(c)
}

/// Both sides of the discrete stability bound
/// `ν Σ Δt a_h(u^k,u^k) ≤ (1/ν) Σ Δt ‖f^k‖²_* + ‖u^0‖² + 2C*|Ω|T`,
/// where `‖f^k‖_*` is the dual norm of the load vector with respect to `a_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl StabilityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Observer tracking both sides of the stability bound.
pub struct StabilityObserver {
    factor: Option<Arc<CholeskyFactor>>,
    lhs: f64,
    forcing: f64,
    initial: f64,
    time: f64,
    c_star: f64,
    nu: f64,
}

impl StabilityObserver {
    pub fn new(problem: &ProblemSpec) -> Result<Self> {
        Ok(StabilityObserver {
            factor: None,
            lhs: 0.0,
            forcing: 0.0,
            initial: 0.0,
            time: 0.0,
            c_star: stability_constant(&problem.reaction)?,
            nu: problem.nu,
        })
    }

    pub fn result(&self) -> StabilityCheck {
        StabilityCheck {
            lhs: self.lhs,
            rhs: self.forcing / self.nu + self.initial + 2.0 * self.c_star * self.time,
        }
    }
}

impl StepObserver for StabilityObserver {
    fn initial(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        let c = state.current.coeffs();
        self.initial = ctx.system.forms().mass.quad_form(c, c);
        self.factor = Some(Arc::new(CholeskyFactor::new(&ctx.system.constrained().diffusion)?));
        Ok(())
    }

    fn step(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        let dt = ctx.system.dt();
        let sys = ctx.system.constrained();
        let u = sys.reduction.restrict(state.current.coeffs());
        self.lhs += self.nu * dt * sys.diffusion.quad_form(&u, &u);
        let b = sys.reduction.restrict(ctx.load);
        let mut y = b.clone();
        self.factor.as_ref().expect("initial() runs first").solve_in_place(&mut y);
        let dual_sq: f64 = b.iter().zip(&y).map(|(a, c)| a * c).sum();
        self.forcing += dt * dual_sq;
        // |Ω| = 1 on the unit domain.
        self.time = state.time * ctx.system.space().mesh().total_measure();
        Ok(())
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Grid label such as `16x16` or `5x5x5`.
    pub grid: String,
    pub n: usize,
    pub h: f64,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Errors and observed rates of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub scheme: Scheme,
    pub norm: NormKind,
    pub rows: Vec<ReportRow>,
}

pub fn grid_label(dim: usize, n: usize) -> String {
    vec![n.to_string(); dim].join("x")
}

impl ConvergenceReport {
    /// Builds rows from `(n, h, error)` triples ordered by decreasing `h`.
    pub fn from_errors(problem: &str, scheme: Scheme, dim: usize, data: &[(usize, f64, f64)]) -> Result<Self> {
        let mut rows: Vec<ReportRow> = Vec::with_capacity(data.len());
        for (i, &(n, h, error)) in data.iter().enumerate() {
            let rate = if i == 0 {
                None
            } else {
                let prev = &rows[i - 1];
                if !(h < prev.h) {
                    return Err(Error::invalid("report rows must have decreasing mesh size"));
                }
                Some(convergence_rate(prev.error, error, prev.h, h)?)
            };
            rows.push(ReportRow {
                grid: grid_label(dim, n),
                n,
                h,
                error,
                rate,
            });
        }
        Ok(ConvergenceReport {
            problem: problem.to_string(),
            scheme,
            norm: NormKind::for_scheme(scheme),
            rows,
        })
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;
    use crate::nonlinear::Pumping;
    use crate::spaces::{build_space, FeSpace, SpaceKind};
    use std::f64::consts::PI;

    fn space(n: usize, kind: SpaceKind) -> Arc<FeSpace> {
        Arc::new(build_space(Arc::new(build_unit_square_mesh(n).unwrap()), kind))
    }

    #[test]
    fn l2_norm_of_bump() {
        let s = space(8, SpaceKind::P1Conforming);
        let zero = DiscreteField::zeros(s);
        let e = l2_error(&zero, |x| (PI * x[0]).sin() * (PI * x[1]).sin()).unwrap();
        assert!((e - 0.5).abs() < 1e-10, "{e}");
    }

    #[test]
    fn errors_vanish_in_the_space() {
        let s = space(4, SpaceKind::CrouzeixRaviart);
        let g = |x: &[f64]| 1.0 + x[0] - 3.0 * x[1];
        let f = s.interpolate(g);
        assert!(l2_error(&f, g).unwrap() < 1e-12);
        assert!(broken_h1_seminorm_error(&f, |_| [1.0, -3.0, 0.0]).unwrap() < 1e-12);
        let zero = DiscreteField::zeros(Arc::clone(&s));
        assert!((broken_h1_seminorm_error(&zero, |_| [1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn l2_error_is_symmetric() {
        let s = space(4, SpaceKind::Discontinuous);
        let a = s.interpolate(|x| x[0] * x[1]);
        let b = s.interpolate(|x| (x[0] - x[1]).sin());
        let e1 = l2_error(&a, |x| b.eval(x).unwrap()).unwrap();
        let e2 = l2_error(&b, |x| a.eval(x).unwrap()).unwrap();
        // Point evaluation is exact at interior quadrature points.
        assert!((e1 - e2).abs() < 1e-14);
    }

    #[test]
    fn gradient_error_halves() {
        let g = |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin();
        let gg = |x: &[f64]| [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos(), 0.0];
        let e1 = broken_h1_seminorm_error(&space(8, SpaceKind::P1Conforming).interpolate(g), gg).unwrap();
        let e2 = broken_h1_seminorm_error(&space(16, SpaceKind::P1Conforming).interpolate(g), gg).unwrap();
        assert!((e1 / e2 - 2.0).abs() < 0.1);
    }

    #[test]
    fn jump_seminorm() {
        let dg = space(3, SpaceKind::Discontinuous);
        let cont = dg.interpolate(|x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]));
        assert!(dg_jump_seminorm(&cont, 10.0).unwrap() < 1e-12);
        // Indicator of cell 0 of the 1×1 mesh: its 3 edges carry a unit jump.
        let one = space(1, SpaceKind::Discontinuous);
        let mut c = vec![0.0; one.dof_count()];
        c[..3].fill(1.0);
        let f = DiscreteField::new(Arc::clone(&one), c).unwrap();
        // Σ_E (γ/h_E)|E| = γ·3 (every edge has |E| = h_E).
        let s = dg_jump_seminorm_sq(&f, 10.0).unwrap();
        assert!((s - 30.0).abs() < 1e-12, "{s}");
        assert!((dg_jump_seminorm_sq(&f, 20.0).unwrap() - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn rates() {
        assert!((convergence_rate(0.08, 0.04, 0.2, 0.1).unwrap() - 1.0).abs() < 1e-12);
        let r = convergence_rate(4.3238e-2, 2.2165e-2, 1.77e-1, 8.84e-2).unwrap();
        assert!((r - 0.96).abs() < 0.005, "{r}");
        let r = convergence_rate(1.0407, 0.58507, 3.54e-1, 1.77e-1).unwrap();
        assert!((r - 0.83).abs() < 0.005, "{r}");
        assert!(convergence_rate(0.0, 1.0, 0.2, 0.1).is_err());
        assert!(convergence_rate(1.0, 1.0, 0.2, 0.2).is_err());
    }

    #[test]
    fn c_star() {
        assert_eq!(stability_constant(&ReactionSpec::damped(1.0, 4.0).unwrap()).unwrap(), 0.0);
        let one = ReactionSpec::new(1.0, 4.0, vec![Pumping { beta: 1.0, q: 2.0 }]).unwrap();
        assert!((stability_constant(&one).unwrap() - 0.5).abs() < 1e-15);
        let two = ReactionSpec::new(1.0, 4.0, vec![Pumping { beta: 2.0, q: 2.0 }]).unwrap();
        assert!((stability_constant(&two).unwrap() - 2.0).abs() < 1e-14);
        let bad = ReactionSpec {
            alpha: 1.0,
            p: 4.0,
            pumping: vec![Pumping { beta: 1.0, q: 4.0 }],
        };
        assert!(stability_constant(&bad).is_err());
    }

    #[test]
    fn free_energy_values() {
        let dg = space(4, SpaceKind::Discontinuous);
        let spec = ReactionSpec::damped(2.0, 4.0).unwrap();
        assert_eq!(free_energy(&DiscreteField::zeros(Arc::clone(&dg)), 1.0, &spec, None).unwrap(), 0.0);
        let c = 0.6;
        let f = DiscreteField::new(Arc::clone(&dg), vec![c; dg.dof_count()]).unwrap();
        let e = free_energy(&f, 1.0, &spec, None).unwrap();
        assert!((e - 2.0 / 4.0 * c.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn exact_trajectory_has_zero_error() {
        let s = space(4, SpaceKind::P1Conforming);
        let u = |x: &[f64], t: f64| t * (1.0 + 2.0 * x[0] - x[1]);
        let g = |_: &[f64], t: f64| [2.0 * t, -t, 0.0];
        let traj: Vec<(f64, DiscreteField)> = (1..=5)
            .map(|k| {
                let t = 0.1 * k as f64;
                (t, s.interpolate(|x| u(x, t)))
            })
            .collect();
        let e = space_time_error(&traj, &u, &g, 1.0, 0.1, None, 4).unwrap();
        assert!(e < 1e-14, "{e}");
    }

    #[test]
    fn report_rows() {
        let r = ConvergenceReport::from_errors("x", Scheme::Cfem, 2, &[(4, 0.4, 0.1), (8, 0.2, 0.05)]).unwrap();
        assert_eq!(r.rows[0].rate, None);
        assert_eq!(r.rows[0].grid, "4x4");
        assert!((r.rows[1].rate.unwrap() - 1.0).abs() < 1e-12);
        assert!(ConvergenceReport::from_errors("x", Scheme::Cfem, 2, &[(4, 0.2, 0.1), (8, 0.4, 0.05)]).is_err());
        assert_eq!(grid_label(3, 5), "5x5x5");
    }
}
