//! Global mass, stiffness, interior-penalty and load assembly, and the
//! reduction to free degrees of freedom.

use crate::error::{Error, Result};
use crate::quadrature::{facet_rule, interval_average_nodes, simplex_rule, DEFAULT_TIME_DEGREE};
use crate::solver::sparse::{CsrMatrix, TripletBuilder};
use crate::spaces::{facet_to_cell_bary, FeSpace, Scheme, SpaceKind};

/// Default spatial quadrature degree for load vectors.
pub const LOAD_DEGREE: usize = 4;

/// Ratio of a cell's measure to the reference simplex measure is `|K|·d!`.
pub(crate) fn reference_scale(dim: usize) -> f64 {
    if dim == 2 {
        2.0
    } else {
        6.0
    }
}

/// Mass matrix `M_ij = ∫ χ_i χ_j`, integrated exactly.
pub fn assemble_mass(space: &FeSpace) -> CsrMatrix {
    let mesh = space.mesh();
    let nl = space.local_count();
    let d = space.dim() as f64;
    let denom = (d + 1.0) * (d + 2.0);
    let mut tb = TripletBuilder::with_capacity(space.dof_count(), mesh.n_cells() * nl * nl);
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c);
        let dofs = space.cell_dofs(c);
        for i in 0..nl {
            for j in 0..nl {
                let delta = if i == j { 1.0 } else { 0.0 };
                // ∫λ_iλ_j = |K|(1+δ_ij)/((d+1)(d+2)), ∫λ_i = |K|/(d+1)
                let ll = (1.0 + delta) / denom;
                let v = match space.kind() {
                    SpaceKind::CrouzeixRaviart => 1.0 - 2.0 * d / (d + 1.0) + d * d * ll,
                    _ => ll,
                };
                tb.push(dofs[i], dofs[j], area * v);
            }
        }
    }
    tb.build()
}

/// Broken stiffness matrix `K_ij = Σ_K ∫_K ∇χ_i·∇χ_j`.
pub fn assemble_stiffness(space: &FeSpace) -> CsrMatrix {
    let mesh = space.mesh();
    let nl = space.local_count();
    let mut tb = TripletBuilder::with_capacity(space.dof_count(), mesh.n_cells() * nl * nl);
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c);
        let g = space.basis_gradients(c);
        let dofs = space.cell_dofs(c);
        for i in 0..nl {
            for j in 0..nl {
                tb.push(dofs[i], dofs[j], area * dot3(&g[i], &g[j]));
            }
        }
    }
    tb.build()
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Interior-penalty facet terms
/// `−∫{{∇u}}·⟦v⟧ − ∫{{∇v}}·⟦u⟧ + ∫(γ/h_E)⟦u⟧·⟦v⟧` summed over all facets,
/// with zero exterior trace on boundary facets.
pub fn assemble_dg_facets(space: &FeSpace, gamma: f64) -> Result<CsrMatrix> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("penalty parameter must be positive, got {gamma}")));
    }
    if space.kind() != SpaceKind::Discontinuous {
        return Err(Error::invalid("interior-penalty terms require the discontinuous space"));
    }
    let mesh = space.mesh();
    let dim = space.dim();
    let nl = space.local_count();
    let rule = facet_rule(dim - 1, 2)?;
    let mut tb = TripletBuilder::with_capacity(space.dof_count(), mesh.n_facets() * 4 * nl * nl);
    let mut dofs = [0usize; 8];
    // Per local function: side sign σ, normal derivative weight w·∇φ·n, and
    // values at the facet quadrature points.
    let mut sigma = [0.0f64; 8];
    let mut dn = [0.0f64; 8];
    let mut vals = vec![[0.0f64; 8]; rule.len()];
    for facet in mesh.facets() {
        let n = facet.normal;
        let sides: Vec<(usize, f64)> = match facet.minus_cell() {
            Some(m) => vec![(facet.plus_cell(), 1.0), (m, -1.0)],
            None => vec![(facet.plus_cell(), 1.0)],
        };
        let avg_w = if sides.len() == 2 { 0.5 } else { 1.0 };
        let nloc = sides.len() * nl;
        for (s, &(cell, sign)) in sides.iter().enumerate() {
            let g = space.basis_gradients(cell);
            let cd = space.cell_dofs(cell);
            for i in 0..nl {
                let k = s * nl + i;
                dofs[k] = cd[i];
                sigma[k] = sign;
                dn[k] = avg_w * dot3(&g[i], &n);
            }
            for (q, (mu, _)) in rule.iter().enumerate() {
                let lam = facet_to_cell_bary(mesh, facet, cell, mu);
                let phi = space.basis_values(&lam);
                for i in 0..nl {
                    vals[q][s * nl + i] = phi[i];
                }
            }
        }
        let pen = gamma / facet.diameter;
        for i in 0..nloc {
            for j in 0..nloc {
                let mut v = 0.0;
                for (q, &w) in rule.weights().iter().enumerate() {
                    let wq = w * facet.measure;
                    let (pi, pj) = (vals[q][i], vals[q][j]);
                    v += wq * (-dn[j] * sigma[i] * pi - dn[i] * sigma[j] * pj + pen * sigma[i] * sigma[j] * pi * pj);
                }
                tb.push(dofs[i], dofs[j], v);
            }
        }
    }
    Ok(tb.build())
}

/// Quadrature settings for load vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub space_degree: usize,
    pub time_degree: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            space_degree: LOAD_DEGREE,
            time_degree: DEFAULT_TIME_DEGREE,
        }
    }
}

/// `b_i = ∫ f^k χ_i` where `f^k` is the mean of `f(x, ·)` over `[t0, t1]`.
pub fn assemble_load<F>(space: &FeSpace, forcing: F, t0: f64, t1: f64, opts: LoadOptions) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> f64,
{
    let times = interval_average_nodes(t0, t1, opts.time_degree)?;
    let mesh = space.mesh();
    let dim = space.dim();
    let nl = space.local_count();
    let rule = simplex_rule(dim, opts.space_degree)?;
    let scale = reference_scale(dim);
    let mut b = vec![0.0; space.dof_count()];
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c) * scale;
        let dofs = space.cell_dofs(c);
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let fbar: f64 = times.iter().map(|&(t, wt)| wt * forcing(&x[..dim], t)).sum();
            if fbar == 0.0 {
                continue;
            }
            let phi = space.basis_values(bary);
            for i in 0..nl {
                b[dofs[i]] += area * w * fbar * phi[i];
            }
        }
    }
    Ok(b)
}

/// Mass, broken stiffness and (for DG) facet matrices of one space.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    pub dg_facets: Option<CsrMatrix>,
    /// Dofs eliminated by the Dirichlet condition (empty for DG).
    pub dirichlet: Vec<usize>,
}

impl AssembledForms {
    /// Assembles all forms; `gamma` is required for the discontinuous space.
    pub fn assemble(space: &FeSpace, gamma: Option<f64>) -> Result<Self> {
        let dg_facets = match space.kind() {
            SpaceKind::Discontinuous => {
                let g = gamma.ok_or_else(|| Error::invalid("the DG scheme needs a penalty parameter"))?;
                Some(assemble_dg_facets(space, g)?)
            }
            _ => None,
        };
        Ok(AssembledForms {
            mass: assemble_mass(space),
            stiffness: assemble_stiffness(space),
            dg_facets,
            dirichlet: space.boundary_dofs(),
        })
    }

    /// The diffusion operator `K̂`: `K` or `K + F_dg`.
    pub fn diffusion(&self) -> CsrMatrix {
        match &self.dg_facets {
            Some(f) => self.stiffness.add(f, 1.0),
            None => self.stiffness.clone(),
        }
    }
}

/// Index bookkeeping between all dofs and the free (unconstrained) ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DofReduction {
    n_total: usize,
    free: Vec<usize>,
    map: Vec<usize>,
}

impl DofReduction {
    pub fn new(n_total: usize, constrained: &[usize]) -> Self {
        let mut fixed = vec![false; n_total];
        for &d in constrained {
            fixed[d] = true;
        }
        let free: Vec<usize> = (0..n_total).filter(|&d| !fixed[d]).collect();
        let mut map = vec![usize::MAX; n_total];
        for (k, &d) in free.iter().enumerate() {
            map[d] = k;
        }
        DofReduction { n_total, free, map }
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Position of dof `d` among the free dofs.
    pub fn free_index(&self, d: usize) -> Option<usize> {
        Some(self.map[d]).filter(|&k| k != usize::MAX)
    }

    pub fn restrict_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        a.principal_submatrix(&self.free, &self.map)
    }

    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| v[d]).collect()
    }

    /// Full vector with zeros at constrained dofs.
    pub fn extend(&self, v: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_total];
        for (k, &d) in self.free.iter().enumerate() {
            full[d] = v[k];
        }
        full
    }
}

/// The free-dof system: mass and diffusion operator restricted to free dofs.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub reduction: DofReduction,
    pub mass: CsrMatrix,
    pub diffusion: CsrMatrix,
}

/// Eliminates homogeneous Dirichlet dofs (P1 vertices, CR boundary facets);
/// DG keeps every dof since its boundary condition is weak.
pub fn apply_dirichlet(forms: &AssembledForms, scheme: Scheme) -> ConstrainedSystem {
    let constrained: &[usize] = match scheme {
        Scheme::Dg => &[],
        _ => &forms.dirichlet,
    };
    let reduction = DofReduction::new(forms.mass.dim(), constrained);
    ConstrainedSystem {
        mass: reduction.restrict_matrix(&forms.mass),
        diffusion: reduction.restrict_matrix(&forms.diffusion()),
        reduction,
    }
}
