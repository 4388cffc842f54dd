//! Problem descriptions: coefficients, time stepping, and manufactured
//! solutions from which forcing terms are synthesized.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinear::ReactionSpec;
use crate::projections::InitialData;
use crate::spaces::Scheme;

pub type ScalarFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64], f64) -> [f64; 3] + Send + Sync>;

/// Time factor of a separable manufactured solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    /// `e^{−rate·t}`
    Exponential { rate: f64 },
    /// `c0 + c1·t + c2·t²`
    Quadratic { c0: f64, c1: f64, c2: f64 },
    /// `cos t + shift`
    CosineShift { shift: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Exponential { rate } => (-rate * t).exp(),
            TimeProfile::Quadratic { c0, c1, c2 } => c0 + t * (c1 + t * c2),
            TimeProfile::CosineShift { shift } => t.cos() + shift,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Exponential { rate } => -rate * (-rate * t).exp(),
            TimeProfile::Quadratic { c1, c2, .. } => c1 + 2.0 * c2 * t,
            TimeProfile::CosineShift { .. } => -t.sin(),
        }
    }
}

/// `sin(kπx)`, `cos(kπx)` or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trig {
    One,
    Sin { k: f64 },
    Cos { k: f64 },
}

impl Trig {
    /// Value and first two derivatives.
    fn eval(self, x: f64) -> [f64; 3] {
        match self {
            Trig::One => [1.0, 0.0, 0.0],
            Trig::Sin { k } => {
                let w = k * PI;
                let (s, c) = (w * x).sin_cos();
                [s, w * c, -w * w * s]
            }
            Trig::Cos { k } => {
                let w = k * PI;
                let (s, c) = (w * x).sin_cos();
                [c, -w * s, -w * w * c]
            }
        }
    }
}

/// One-dimensional factor `trig(x)·poly(x)`; `poly` holds ascending coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisFactor {
    pub trig: Trig,
    #[serde(default = "unit_poly")]
    pub poly: Vec<f64>,
}

fn unit_poly() -> Vec<f64> {
    vec![1.0]
}

impl AxisFactor {
    pub fn new(trig: Trig, poly: Vec<f64>) -> Self {
        AxisFactor { trig, poly }
    }

    fn poly_eval(&self, x: f64) -> [f64; 3] {
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for &c in self.poly.iter().rev() {
            ddp = ddp * x + 2.0 * dp;
            dp = dp * x + p;
            p = p * x + c;
        }
        [p, dp, ddp]
    }

    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let [s, ds, dds] = self.trig.eval(x);
        let [p, dp, ddp] = self.poly_eval(x);
        [s * p, ds * p + s * dp, dds * p + 2.0 * ds * dp + s * ddp]
    }
}

/// Separable manufactured solution `u(x, t) = T(t)·Π_a g_a(x_a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedSolution {
    pub time: TimeProfile,
    pub axes: Vec<AxisFactor>,
}

impl ManufacturedSolution {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    fn factors(&self, x: &[f64]) -> ([[f64; 3]; 3], usize) {
        let mut f = [[1.0, 0.0, 0.0]; 3];
        let d = self.axes.len().min(3);
        for a in 0..d {
            f[a] = self.axes[a].eval(x[a]);
        }
        (f, d)
    }

    /// `Π_a g_a(x_a)`
    pub fn spatial(&self, x: &[f64]) -> f64 {
        let (f, d) = self.factors(x);
        f[..d].iter().map(|f| f[0]).product()
    }

    /// `(Π_a g_a, Σ_a g_a''·Π_{b≠a} g_b)` from one factor evaluation.
    fn spatial_and_laplacian(&self, x: &[f64]) -> (f64, f64) {
        let (f, d) = self.factors(x);
        let mut lap = 0.0;
        for a in 0..d {
            let mut prod = f[a][2];
            for (b, fb) in f[..d].iter().enumerate() {
                if b != a {
                    prod *= fb[0];
                }
            }
            lap += prod;
        }
        (f[..d].iter().map(|f| f[0]).product(), lap)
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.time.value(t) * self.spatial(x)
    }

    pub fn time_derivative(&self, x: &[f64], t: f64) -> f64 {
        self.time.derivative(t) * self.spatial(x)
    }

    pub fn gradient(&self, x: &[f64], t: f64) -> [f64; 3] {
        let (f, d) = self.factors(x);
        let tv = self.time.value(t);
        let mut g = [0.0; 3];
        for a in 0..d {
            let mut prod = tv * f[a][1];
            for (b, fb) in f[..d].iter().enumerate() {
                if b != a {
                    prod *= fb[0];
                }
            }
            g[a] = prod;
        }
        g
    }

    pub fn laplacian(&self, x: &[f64], t: f64) -> f64 {
        self.time.value(t) * self.spatial_and_laplacian(x).1
    }

    /// Forcing that makes this the exact solution, evaluating the spatial
    /// factors once per point.
    pub fn forcing(&self, nu: f64, reaction: Option<&ReactionSpec>) -> ScalarFn {
        let m = self.clone();
        let reaction = reaction.cloned();
        Arc::new(move |x, t| {
            let (s, lap) = m.spatial_and_laplacian(x);
            let tv = m.time.value(t);
            let mut f = m.time.derivative(t) * s - nu * tv * lap;
            if let Some(r) = &reaction {
                f += r.value(tv * s);
            }
            f
        })
    }
}

/// Closed-form handles of an exact solution. Only `u` is mandatory;
/// forcing synthesis needs `∂ₜu` and `Δu`, error norms need `∇u`.
#[derive(Clone)]
pub struct SolutionBundle {
    pub u: ScalarFn,
    pub dt: Option<ScalarFn>,
    pub grad: Option<VectorFn>,
    pub laplacian: Option<ScalarFn>,
}

impl std::fmt::Debug for SolutionBundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolutionBundle")
            .field("dt", &self.dt.is_some())
            .field("grad", &self.grad.is_some())
            .field("laplacian", &self.laplacian.is_some())
            .finish()
    }
}

impl From<ManufacturedSolution> for SolutionBundle {
    fn from(m: ManufacturedSolution) -> Self {
        let m = Arc::new(m);
        let (a, b, c, d) = (Arc::clone(&m), Arc::clone(&m), Arc::clone(&m), m);
        SolutionBundle {
            u: Arc::new(move |x, t| a.value(x, t)),
            dt: Some(Arc::new(move |x, t| b.time_derivative(x, t))),
            grad: Some(Arc::new(move |x, t| c.gradient(x, t))),
            laplacian: Some(Arc::new(move |x, t| d.laplacian(x, t))),
        }
    }
}

/// `f = ∂ₜu − νΔu + α|u|^{p−2}u − Σβ_ℓ|u|^{q_ℓ−2}u`, the reaction part
/// omitted when `reaction` is `None`.
pub fn synthesize_forcing(bundle: &SolutionBundle, nu: f64, reaction: Option<&ReactionSpec>) -> Result<ScalarFn> {
    let dt = bundle
        .dt
        .clone()
        .ok_or_else(|| Error::invalid("forcing synthesis needs the time derivative of the solution"))?;
    let lap = bundle
        .laplacian
        .clone()
        .ok_or_else(|| Error::invalid("forcing synthesis needs the Laplacian of the solution"))?;
    let u = Arc::clone(&bundle.u);
    let reaction = reaction.cloned();
    Ok(Arc::new(move |x, t| {
        let mut f = dt(x, t) - nu * lap(x, t);
        if let Some(r) = &reaction {
            f += r.value(u(x, t));
        }
        f
    }))
}

/// How the time step is chosen for a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed(f64),
    /// `Δt ≈ c·h`, shortened so that it divides `T`.
    Proportional(f64),
}

/// What the discrete solution is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorMode {
    Exact,
    /// Fine-mesh solution of the same scheme; `n_ref` defaults to four times
    /// the finest study grid.
    Reference { n_ref: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Schemes compared by a study; single runs use the first.
    pub schemes: Vec<Scheme>,
    pub dim: usize,
    pub nu: f64,
    pub reaction: ReactionSpec,
    /// Reaction law used when synthesizing the forcing; may differ from
    /// `reaction` when a pumped problem reuses a damped problem's data.
    pub forcing_reaction: ReactionSpec,
    pub gamma: f64,
    pub final_time: f64,
    pub dt: DtPolicy,
    pub solution: ManufacturedSolution,
    pub mode: ErrorMode,
    #[serde(default)]
    pub grids: Vec<usize>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::invalid(format!("problem `{}` lists no scheme", self.name)));
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::invalid(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.solution.dim() != self.dim {
            return Err(Error::invalid("solution dimension does not match the problem dimension"));
        }
        if !(self.nu > 0.0) {
            return Err(Error::invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.final_time > 0.0) {
            return Err(Error::invalid(format!("final time must be positive, got {}", self.final_time)));
        }
        match self.dt {
            DtPolicy::Fixed(v) | DtPolicy::Proportional(v) if !(v > 0.0) => {
                return Err(Error::invalid(format!("time step parameter must be positive, got {v}")));
            }
            _ => {}
        }
        self.reaction.validate()?;
        self.forcing_reaction.validate()
    }

    pub fn scheme(&self) -> Scheme {
        self.schemes[0]
    }

    /// Copy restricted to a single scheme.
    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        ProblemSpec {
            schemes: vec![scheme],
            ..self.clone()
        }
    }

    /// `(Δt, N)` for a mesh of size `h`, with `N·Δt = T`.
    pub fn time_steps(&self, h: f64) -> Result<(f64, usize)> {
        let t = self.final_time;
        match self.dt {
            DtPolicy::Fixed(dt) => {
                let n = (t / dt).round();
                if n < 1.0 || (n * dt - t).abs() > 1e-9 * t {
                    return Err(Error::invalid(format!("time step {dt} does not divide the final time {t}")));
                }
                Ok((dt, n as usize))
            }
            DtPolicy::Proportional(c) => {
                let n = (t / (c * h)).ceil().max(1.0);
                Ok((t / n, n as usize))
            }
        }
    }

    pub fn exact(&self) -> SolutionBundle {
        SolutionBundle::from(self.solution.clone())
    }

    pub fn forcing(&self) -> Result<ScalarFn> {
        Ok(self.solution.forcing(self.nu, Some(&self.forcing_reaction)))
    }

    /// `u(·, 0)` and its gradient.
    pub fn initial_data(&self) -> InitialData {
        let (a, b) = (self.solution.clone(), self.solution.clone());
        InitialData {
            value: Arc::new(move |x| a.value(x, 0.0)),
            gradient: Some(Arc::new(move |x| b.gradient(x, 0.0))),
        }
    }
}
