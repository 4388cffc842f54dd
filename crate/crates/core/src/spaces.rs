//! Piecewise-linear finite element spaces: conforming P1, Crouzeix–Raviart
//! and discontinuous P1, plus fields living in them and their facet traces.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Facet, Mesh};
use crate::quadrature::QuadRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Continuous P1 with vertex dofs.
    P1Conforming,
    /// Nonconforming P1 with facet-midpoint dofs.
    CrouzeixRaviart,
    /// Discontinuous P1 with a vertex-Lagrange basis per cell.
    Discontinuous,
}

/// The three spatial discretizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Cfem,
    Ncfem,
    Dg,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Cfem, Scheme::Ncfem, Scheme::Dg];

    pub fn space_kind(self) -> SpaceKind {
        match self {
            Scheme::Cfem => SpaceKind::P1Conforming,
            Scheme::Ncfem => SpaceKind::CrouzeixRaviart,
            Scheme::Dg => SpaceKind::Discontinuous,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cfem => "cfem",
            Scheme::Ncfem => "ncfem",
            Scheme::Dg => "dg",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cfem" | "p1" | "conforming" => Ok(Scheme::Cfem),
            "ncfem" | "cr" | "crouzeix-raviart" => Ok(Scheme::Ncfem),
            "dg" | "sipg" => Ok(Scheme::Dg),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Degree-of-freedom layout of one discrete space on a mesh.
#[derive(Debug, Clone)]
pub struct FeSpace {
    kind: SpaceKind,
    mesh: Arc<Mesh>,
    dof_count: usize,
    cell_dofs: Vec<[usize; 4]>,
    boundary: Vec<bool>,
}

/// Local basis values and gradients on one cell.
#[derive(Debug, Clone, Copy)]
pub struct BasisEval {
    pub values: [f64; 4],
    pub gradients: [[f64; 3]; 4],
}

pub fn build_space(mesh: Arc<Mesh>, kind: SpaceKind) -> FeSpace {
    let nl = mesh.dim() + 1;
    let n_cells = mesh.n_cells();
    let mut cell_dofs = vec![[usize::MAX; 4]; n_cells];
    let (dof_count, boundary) = match kind {
        SpaceKind::P1Conforming => {
            for (c, dofs) in cell_dofs.iter_mut().enumerate() {
                dofs[..nl].copy_from_slice(mesh.cell_vertices(c));
            }
            (mesh.n_vertices(), mesh.boundary_vertices())
        }
        SpaceKind::CrouzeixRaviart => {
            for (c, dofs) in cell_dofs.iter_mut().enumerate() {
                dofs[..nl].copy_from_slice(mesh.cell_facets(c));
            }
            let boundary = mesh.facets().iter().map(Facet::is_boundary).collect();
            (mesh.n_facets(), boundary)
        }
        SpaceKind::Discontinuous => {
            for (c, dofs) in cell_dofs.iter_mut().enumerate() {
                for (i, d) in dofs[..nl].iter_mut().enumerate() {
                    *d = c * nl + i;
                }
            }
            (n_cells * nl, vec![false; n_cells * nl])
        }
    };
    FeSpace {
        kind,
        mesh,
        dof_count,
        cell_dofs,
        boundary,
    }
}

impl FeSpace {
    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Number of local basis functions per cell (`dim + 1`).
    pub fn local_count(&self) -> usize {
        self.mesh.dim() + 1
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c][..self.local_count()]
    }

    /// Dofs constrained by the homogeneous Dirichlet condition. Empty for DG,
    /// where the boundary condition is imposed weakly.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        (0..self.dof_count).filter(|&d| self.boundary[d]).collect()
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.boundary[d]
    }

    /// Local basis values at barycentric coordinates `bary`.
    pub fn basis_values(&self, bary: &[f64]) -> [f64; 4] {
        let nl = self.local_count();
        let mut v = [0.0; 4];
        match self.kind {
            SpaceKind::P1Conforming | SpaceKind::Discontinuous => v[..nl].copy_from_slice(&bary[..nl]),
            SpaceKind::CrouzeixRaviart => {
                let d = self.dim() as f64;
                for i in 0..nl {
                    v[i] = 1.0 - d * bary[i];
                }
            }
        }
        v
    }

    /// Constant local basis gradients on cell `c`.
    pub fn basis_gradients(&self, c: usize) -> [[f64; 3]; 4] {
        let grads = self.mesh.barycentric_gradients(c);
        let mut g = [[0.0; 3]; 4];
        let scale = match self.kind {
            SpaceKind::CrouzeixRaviart => -(self.dim() as f64),
            _ => 1.0,
        };
        for (i, gi) in grads.iter().enumerate() {
            g[i] = gi.map(|x| scale * x);
        }
        g
    }

    /// Basis values and gradients at reference coordinates `ref_point`
    /// (`dim` entries, the reference simplex being the unit corner simplex).
    pub fn eval_basis(&self, cell: usize, ref_point: &[f64]) -> BasisEval {
        let mut bary = [0.0; 4];
        let dim = self.dim();
        bary[0] = 1.0 - ref_point[..dim].iter().sum::<f64>();
        bary[1..=dim].copy_from_slice(&ref_point[..dim]);
        BasisEval {
            values: self.basis_values(&bary),
            gradients: self.basis_gradients(cell),
        }
    }

    /// Barycentric coordinates (in cell `c`) of local dof `i`'s node.
    fn dof_node(&self, i: usize) -> [f64; 4] {
        let nl = self.local_count();
        let mut b = [0.0; 4];
        match self.kind {
            SpaceKind::P1Conforming | SpaceKind::Discontinuous => b[i] = 1.0,
            SpaceKind::CrouzeixRaviart => {
                let w = 1.0 / self.dim() as f64;
                for (j, bj) in b[..nl].iter_mut().enumerate() {
                    if j != i {
                        *bj = w;
                    }
                }
            }
        }
        b
    }

    /// Nodal interpolant: vertex values (P1C, DG) or facet-midpoint values (CR).
    /// Reproduces affine functions exactly in all three spaces; boundary dofs
    /// are not zeroed.
    pub fn interpolate(self: &Arc<Self>, g: impl Fn(&[f64]) -> f64) -> DiscreteField {
        let mut coeffs = vec![0.0; self.dof_count];
        let mut seen = vec![false; self.dof_count];
        for c in 0..self.mesh.n_cells() {
            for (i, &d) in self.cell_dofs(c).iter().enumerate() {
                if !seen[d] {
                    seen[d] = true;
                    let x = self.mesh.point_in_cell(c, &self.dof_node(i));
                    coeffs[d] = g(&x[..self.dim()]);
                }
            }
        }
        DiscreteField {
            space: Arc::clone(self),
            coeffs,
        }
    }
}

/// A finite element function: a space plus its coefficient vector.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dof_count() {
            return Err(Error::invalid(format!(
                "coefficient vector has length {} but the space has {} dofs",
                coeffs.len(),
                space.dof_count()
            )));
        }
        Ok(DiscreteField { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.dof_count();
        DiscreteField {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value on cell `c` at barycentric coordinates `bary`.
    pub fn value_in_cell(&self, c: usize, bary: &[f64]) -> f64 {
        let phi = self.space.basis_values(bary);
        self.space
            .cell_dofs(c)
            .iter()
            .zip(phi)
            .map(|(&d, p)| self.coeffs[d] * p)
            .sum()
    }

    /// Constant gradient of the field on cell `c`.
    pub fn gradient_in_cell(&self, c: usize) -> [f64; 3] {
        let grads = self.space.basis_gradients(c);
        let mut g = [0.0; 3];
        for (i, &d) in self.space.cell_dofs(c).iter().enumerate() {
            for a in 0..3 {
                g[a] += self.coeffs[d] * grads[i][a];
            }
        }
        g
    }

    /// Point evaluation; on inter-cell boundaries the lowest-index cell wins.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let (c, bary) = self.space.mesh().locate(x)?;
        Ok(self.value_in_cell(c, &bary))
    }
}

/// One-sided values of a field at facet quadrature points, with the jump and
/// average conventions `⟦w⟧ = w₊n₊ + w₋n₋`, `{{w}} = (w₊ + w₋)/2`; on the
/// boundary the exterior trace is zero, so `⟦w⟧ = w₊n₊` and `{{w}} = w₊`.
#[derive(Debug, Clone)]
pub struct FacetTrace {
    pub normal: [f64; 3],
    pub points: Vec<[f64; 3]>,
    /// Physical weights (facet measure already included).
    pub weights: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Option<Vec<f64>>,
    pub grad_plus: [f64; 3],
    pub grad_minus: Option<[f64; 3]>,
}

impl FacetTrace {
    pub fn jump(&self, q: usize) -> [f64; 3] {
        let diff = self.plus[q] - self.minus.as_ref().map_or(0.0, |m| m[q]);
        self.normal.map(|n| diff * n)
    }

    pub fn average(&self, q: usize) -> f64 {
        match &self.minus {
            Some(m) => 0.5 * (self.plus[q] + m[q]),
            None => self.plus[q],
        }
    }

    pub fn grad_average(&self) -> [f64; 3] {
        match self.grad_minus {
            Some(gm) => [
                0.5 * (self.grad_plus[0] + gm[0]),
                0.5 * (self.grad_plus[1] + gm[1]),
                0.5 * (self.grad_plus[2] + gm[2]),
            ],
            None => self.grad_plus,
        }
    }

    /// `∫_E ⟦w⟧ ds` (a vector).
    pub fn integrated_jump(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for q in 0..self.weights.len() {
            let j = self.jump(q);
            for a in 0..3 {
                s[a] += self.weights[q] * j[a];
            }
        }
        s
    }
}

/// Barycentric coordinates in `cell` of the facet point with facet-barycentric
/// coordinates `mu` (ordered like `facet.vertices()`).
pub(crate) fn facet_to_cell_bary(mesh: &Mesh, facet: &Facet, cell: usize, mu: &[f64]) -> [f64; 4] {
    let mut lam = [0.0; 4];
    let cv = mesh.cell_vertices(cell);
    for (j, &fv) in facet.vertices().iter().enumerate() {
        let i = cv.iter().position(|&v| v == fv).expect("facet vertex not in adjacent cell");
        lam[i] = mu[j];
    }
    lam
}

/// Traces of `field` on facet `f` at the points of `rule` (a facet rule).
pub fn facet_traces(field: &DiscreteField, f: usize, rule: &QuadRule) -> FacetTrace {
    let space = field.space();
    let mesh = space.mesh();
    let facet = mesh.facet(f);
    let plus_cell = facet.plus_cell();
    let mut points = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    let mut plus = Vec::with_capacity(rule.len());
    let mut minus = facet.minus_cell().map(|_| Vec::with_capacity(rule.len()));
    for (mu, w) in rule.iter() {
        let lp = facet_to_cell_bary(mesh, facet, plus_cell, mu);
        points.push(mesh.point_in_cell(plus_cell, &lp));
        weights.push(w * facet.measure);
        plus.push(field.value_in_cell(plus_cell, &lp));
        if let (Some(mc), Some(m)) = (facet.minus_cell(), minus.as_mut()) {
            let lm = facet_to_cell_bary(mesh, facet, mc, mu);
            m.push(field.value_in_cell(mc, &lm));
        }
    }
    FacetTrace {
        normal: facet.normal,
        points,
        weights,
        plus,
        minus,
        grad_plus: field.gradient_in_cell(plus_cell),
        grad_minus: facet.minus_cell().map(|mc| field.gradient_in_cell(mc)),
    }
}
