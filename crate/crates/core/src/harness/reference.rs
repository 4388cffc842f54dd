//! Fine-mesh reference solutions for problems without a closed-form solution.

use std::sync::Arc;

use crate::analysis::{dg_jump_seminorm_sq, ErrorAccumulator, StepError};
use crate::assembly::reference_scale;
use crate::error::{Error, Result};
use crate::mesh::{build_unit_mesh, Mesh};
use crate::problem::ProblemSpec;
use crate::quadrature::{simplex_rule, QuadRule};
use crate::solver::{run_time_integration, SolverConfig, StepContext, StepObserver, TimeState};
use crate::spaces::{build_space, DiscreteField, FeSpace, Scheme};

/// Coefficients of a fine-mesh run at every time step.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub n_ref: usize,
    pub scheme: Scheme,
    pub dt: f64,
    space: Arc<FeSpace>,
    /// `snapshots[k−1]` holds `u_ref^k`.
    snapshots: Vec<Vec<f64>>,
}

struct SnapshotObserver {
    snapshots: Vec<Vec<f64>>,
}

impl StepObserver for SnapshotObserver {
    fn step(&mut self, state: &TimeState, _ctx: &StepContext<'_>) -> Result<()> {
        self.snapshots.push(state.current.coeffs().to_vec());
        Ok(())
    }
}

/// Runs `problem` (its first scheme) on the `n_ref` grid and keeps every step.
pub fn build_reference(problem: &ProblemSpec, n_ref: usize, cfg: &SolverConfig) -> Result<ReferenceSolution> {
    let mesh = Arc::new(build_unit_mesh(problem.dim, n_ref)?);
    let scheme = problem.scheme();
    let space = Arc::new(build_space(mesh, scheme.space_kind()));
    let mut obs = SnapshotObserver { snapshots: Vec::new() };
    let summary = run_time_integration(problem, Arc::clone(&space), cfg, &mut [&mut obs])?;
    Ok(ReferenceSolution {
        n_ref,
        scheme,
        dt: summary.dt,
        space,
        snapshots: obs.snapshots,
    })
}

impl ReferenceSolution {
    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn steps(&self) -> usize {
        self.snapshots.len()
    }

    /// Reference field after step `k` (1-based).
    pub fn field(&self, k: usize) -> Result<DiscreteField> {
        let c = self
            .snapshots
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::invalid(format!("reference has no step {k}")))?;
        DiscreteField::new(Arc::clone(&self.space), c.clone())
    }
}

/// Fine-cell to coarse-cell correspondence for nested structured meshes,
/// with coarse barycentric coordinates of the fine quadrature points.
#[derive(Debug, Clone)]
pub struct NestedMap {
    coarse_of: Vec<usize>,
    rule: QuadRule,
    /// `coarse_bary[f·nq + q]`
    coarse_bary: Vec<[f64; 4]>,
}

impl NestedMap {
    pub fn new(fine: &Mesh, coarse: &Mesh) -> Result<Self> {
        let (nf, nc) = (fine.resolution(), coarse.resolution());
        if fine.dim() != coarse.dim() {
            return Err(Error::invalid("reference and coarse meshes differ in dimension"));
        }
        if nf <= nc || nf % nc != 0 {
            return Err(Error::invalid(format!(
                "reference grid {nf} must be a proper multiple of the coarse grid {nc}"
            )));
        }
        let dim = fine.dim();
        let rule = simplex_rule(dim, 2)?;
        let mut coarse_of = Vec::with_capacity(fine.n_cells());
        let mut coarse_bary = Vec::with_capacity(fine.n_cells() * rule.len());
        for f in 0..fine.n_cells() {
            let (c, _) = coarse.locate(&fine.cell_centroid(f)[..dim])?;
            for &v in fine.cell_vertices(f) {
                let lam = coarse.barycentric(c, fine.vertex(v));
                if lam[..=dim].iter().any(|&l| l < -1e-10) {
                    return Err(Error::invalid(format!(
                        "grids {nf} and {nc} are not nested: fine cell {f} is not inside one coarse cell"
                    )));
                }
            }
            coarse_of.push(c);
            for (bary, _) in rule.iter() {
                let x = fine.point_in_cell(f, bary);
                coarse_bary.push(coarse.barycentric(c, &x[..dim]));
            }
        }
        Ok(NestedMap {
            coarse_of,
            rule,
            coarse_bary,
        })
    }

    /// `‖u_f − u_c‖²_{L²}` and `‖∇_h u_f − ∇_h u_c‖²_{L²}`, integrated exactly
    /// over the fine cells (both fields are affine there).
    pub fn squared_differences(&self, fine: &DiscreteField, coarse: &DiscreteField) -> (f64, f64) {
        let mesh = fine.space().mesh();
        let dim = mesh.dim();
        let nq = self.rule.len();
        let scale = reference_scale(dim);
        let (mut l2, mut h1) = (0.0, 0.0);
        for f in 0..mesh.n_cells() {
            let c = self.coarse_of[f];
            let area = mesh.cell_measure(f);
            let (gf, gc) = (fine.gradient_in_cell(f), coarse.gradient_in_cell(c));
            h1 += area * (0..dim).map(|a| (gf[a] - gc[a]).powi(2)).sum::<f64>();
            for (q, (bary, w)) in self.rule.iter().enumerate() {
                let e = fine.value_in_cell(f, bary) - coarse.value_in_cell(c, &self.coarse_bary[f * nq + q]);
                l2 += area * scale * w * e * e;
            }
        }
        (l2, h1)
    }
}

/// Observer accumulating the computation-norm error of a coarse run against
/// a reference solution. DG jump terms use the coarse field's jumps.
pub struct ReferenceErrorObserver<'a> {
    reference: &'a ReferenceSolution,
    map: Option<NestedMap>,
    gamma: Option<f64>,
    acc: ErrorAccumulator,
    final_l2: Option<f64>,
}

impl<'a> ReferenceErrorObserver<'a> {
    pub fn new(reference: &'a ReferenceSolution, problem: &ProblemSpec) -> Self {
        ReferenceErrorObserver {
            reference,
            map: None,
            gamma: (problem.scheme() == Scheme::Dg).then_some(problem.gamma),
            acc: ErrorAccumulator::new(problem.nu),
            final_l2: None,
        }
    }

    pub fn finalize(self) -> Result<f64> {
        let l2 = self
            .final_l2
            .ok_or_else(|| Error::invalid("the coarse run did not reach the reference's final step"))?;
        Ok(self.acc.finalize(l2))
    }
}

impl StepObserver for ReferenceErrorObserver<'_> {
    fn initial(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        if ctx.system.scheme() != self.reference.scheme {
            return Err(Error::invalid("reference solution uses a different scheme"));
        }
        if (ctx.system.dt() - self.reference.dt).abs() > 1e-12 * self.reference.dt {
            return Err(Error::invalid("reference solution uses a different time step"));
        }
        self.map = Some(NestedMap::new(self.reference.space.mesh(), state.current.space().mesh())?);
        Ok(())
    }

    fn step(&mut self, state: &TimeState, ctx: &StepContext<'_>) -> Result<()> {
        let map = self.map.as_ref().expect("initial() runs first");
        let fine = self.reference.field(state.step)?;
        let (l2, h1) = map.squared_differences(&fine, &state.current);
        let jump_sq = match self.gamma {
            Some(g) => dg_jump_seminorm_sq(&state.current, g)?,
            None => 0.0,
        };
        self.acc.add(
            StepError {
                step: state.step,
                time: state.time,
                gradient_sq: h1,
                jump_sq,
            },
            ctx.system.dt(),
        );
        if state.step == self.reference.steps() {
            self.final_l2 = Some(l2);
        }
        Ok(())
    }
}
