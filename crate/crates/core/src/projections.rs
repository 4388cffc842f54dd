//! Projections and interpolants used for initial data and analysis.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_mass, assemble_stiffness, dot3, reference_scale, DofReduction};
use crate::error::{Error, Result};
use crate::quadrature::{facet_rule, simplex_rule};
use crate::solver::{linear_solve, SolverConfig};
use crate::spaces::{facet_to_cell_bary, DiscreteField, FeSpace, Scheme, SpaceKind};

/// Quadrature degree for right-hand sides of projections.
pub const PROJECTION_DEGREE: usize = 6;

/// Initial datum `u0` and, when available, its gradient.
#[derive(Clone)]
pub struct InitialData {
    pub value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub gradient: Option<Arc<dyn Fn(&[f64]) -> [f64; 3] + Send + Sync>>,
}

impl InitialData {
    pub fn new(value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        InitialData {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData").field("gradient", &self.gradient.is_some()).finish()
    }
}

/// Operator used to bring `u0` into the discrete space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialOperator {
    Ritz,
    AvgNodal,
    CrFacetMean,
    Pi1,
}

/// Initial-data policy: Ritz projection for the conforming scheme whenever
/// `H¹₀ ⊂ L^p` (d ≤ 2, or p ≤ 2d/(d−2)), otherwise a facet-averaged
/// interpolant; facet means for Crouzeix–Raviart; π¹_h for DG.
pub fn initial_operator(scheme: Scheme, p: f64, dim: usize) -> Result<InitialOperator> {
    if !(p >= 2.0) {
        return Err(Error::invalid(format!("no initial-data operator for p = {p} < 2")));
    }
    Ok(match scheme {
        Scheme::Cfem => {
            if dim <= 2 || p <= 2.0 * dim as f64 / (dim as f64 - 2.0) {
                InitialOperator::Ritz
            } else {
                InitialOperator::AvgNodal
            }
        }
        Scheme::Ncfem => InitialOperator::CrFacetMean,
        Scheme::Dg => InitialOperator::Pi1,
    })
}

/// Applies the scheme's initial-data operator to `u0`.
pub fn set_initial(
    space: &Arc<FeSpace>,
    scheme: Scheme,
    p: f64,
    u0: &InitialData,
    cfg: &SolverConfig,
) -> Result<DiscreteField> {
    if scheme.space_kind() != space.kind() {
        return Err(Error::invalid(format!("scheme {scheme} does not match the space {:?}", space.kind())));
    }
    match initial_operator(scheme, p, space.dim())? {
        InitialOperator::Ritz => {
            let grad = u0
                .gradient
                .as_ref()
                .ok_or_else(|| Error::invalid("the Ritz projection needs the gradient of the initial datum"))?;
            ritz_project(space, |x| (u0.value)(x), |x| grad(x), cfg)
        }
        InitialOperator::AvgNodal => avg_nodal(space, |x| (u0.value)(x)),
        InitialOperator::CrFacetMean => cr_interpolate(space, |x| (u0.value)(x)),
        InitialOperator::Pi1 => pi1_project(space, |x| (u0.value)(x)),
    }
}

/// `b_i = ∫ g χ_i`
fn load_of(space: &FeSpace, g: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = simplex_rule(dim, PROJECTION_DEGREE)?;
    let scale = reference_scale(dim);
    let mut b = vec![0.0; space.dof_count()];
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c) * scale;
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let v = area * w * g(&x[..dim]);
            let phi = space.basis_values(bary);
            for (i, &d) in space.cell_dofs(c).iter().enumerate() {
                b[d] += v * phi[i];
            }
        }
    }
    Ok(b)
}

/// Global L² projection onto the whole space (boundary dofs included).
pub fn l2_project(space: &Arc<FeSpace>, g: impl Fn(&[f64]) -> f64, cfg: &SolverConfig) -> Result<DiscreteField> {
    let b = load_of(space, &g)?;
    let c = linear_solve(&assemble_mass(space), &b, cfg)?;
    DiscreteField::new(Arc::clone(space), c)
}

/// Points on the boundary where a homogeneous trace is checked: boundary
/// facet vertices and quadrature points.
fn check_zero_trace(space: &FeSpace, g: &dyn Fn(&[f64]) -> f64) -> Result<()> {
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = facet_rule(dim - 1, 5)?;
    for facet in mesh.facets().iter().filter(|f| f.is_boundary()) {
        let cell = facet.plus_cell();
        let mut pts: Vec<[f64; 3]> = facet.vertices().iter().map(|&v| mesh.vertex3(v)).collect();
        for (mu, _) in rule.iter() {
            pts.push(mesh.point_in_cell(cell, &facet_to_cell_bary(mesh, facet, cell, mu)));
        }
        for x in pts {
            let v = g(&x[..dim]);
            if v.abs() > 1e-10 {
                return Err(Error::NonHomogeneousBoundary {
                    point: x[..dim].to_vec(),
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Ritz projection onto the conforming space:
/// `(∇R_h g, ∇χ) = (∇g, ∇χ)` for all `χ ∈ V_h`, with zero boundary values.
pub fn ritz_project(
    space: &Arc<FeSpace>,
    g: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> [f64; 3],
    cfg: &SolverConfig,
) -> Result<DiscreteField> {
    if space.kind() != SpaceKind::P1Conforming {
        return Err(Error::invalid("the Ritz projection is defined on the conforming space"));
    }
    check_zero_trace(space, &g)?;
    let b = ritz_load(space, &grad)?;
    let red = DofReduction::new(space.dof_count(), &space.boundary_dofs());
    let k = red.restrict_matrix(&assemble_stiffness(space));
    let c = linear_solve(&k, &red.restrict(&b), cfg)?;
    DiscreteField::new(Arc::clone(space), red.extend(&c))
}

/// `b_i = ∫ ∇g·∇χ_i`
pub fn ritz_load(space: &FeSpace, grad: &dyn Fn(&[f64]) -> [f64; 3]) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = simplex_rule(dim, PROJECTION_DEGREE)?;
    let scale = reference_scale(dim);
    let mut b = vec![0.0; space.dof_count()];
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c) * scale;
        let mut mean = [0.0; 3];
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let gx = grad(&x[..dim]);
            for a in 0..3 {
                mean[a] += area * w * gx[a];
            }
        }
        let phi_grad = space.basis_gradients(c);
        for (i, &d) in space.cell_dofs(c).iter().enumerate() {
            b[d] += dot3(&mean, &phi_grad[i]);
        }
    }
    Ok(b)
}

/// Elementwise L² projection onto discontinuous P1.
pub fn pi1_project(space: &Arc<FeSpace>, g: impl Fn(&[f64]) -> f64) -> Result<DiscreteField> {
    if space.kind() != SpaceKind::Discontinuous {
        return Err(Error::invalid("π¹_h maps into the discontinuous space"));
    }
    let mesh = space.mesh();
    let dim = space.dim();
    let nl = dim + 1;
    let rule = simplex_rule(dim, PROJECTION_DEGREE)?;
    let scale = reference_scale(dim);
    let d = dim as f64;
    let mut coeffs = vec![0.0; space.dof_count()];
    for c in 0..mesh.n_cells() {
        let area = mesh.cell_measure(c);
        let mut b = [0.0; 4];
        for (bary, w) in rule.iter() {
            let x = mesh.point_in_cell(c, bary);
            let v = area * scale * w * g(&x[..dim]);
            for i in 0..nl {
                b[i] += v * bary[i];
            }
        }
        // Local mass |K|/((d+1)(d+2))·(I + 11ᵀ) has inverse
        // ((d+1)(d+2)/|K|)·(I − 11ᵀ/(d+2)).
        let sum: f64 = b[..nl].iter().sum();
        let f = (d + 1.0) * (d + 2.0) / area;
        for (i, &dof) in space.cell_dofs(c).iter().enumerate() {
            coeffs[dof] = f * (b[i] - sum / (d + 2.0));
        }
    }
    DiscreteField::new(Arc::clone(space), coeffs)
}

/// Crouzeix–Raviart interpolant: facet means of `g` on interior facets,
/// zero on boundary facets.
pub fn cr_interpolate(space: &Arc<FeSpace>, g: impl Fn(&[f64]) -> f64) -> Result<DiscreteField> {
    if space.kind() != SpaceKind::CrouzeixRaviart {
        return Err(Error::invalid("facet-mean interpolation maps into the Crouzeix-Raviart space"));
    }
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = facet_rule(dim - 1, PROJECTION_DEGREE)?;
    let mut coeffs = vec![0.0; space.dof_count()];
    for (f, facet) in mesh.facets().iter().enumerate() {
        if facet.is_boundary() {
            continue;
        }
        let cell = facet.plus_cell();
        coeffs[f] = rule
            .iter()
            .map(|(mu, w)| {
                let x = mesh.point_in_cell(cell, &facet_to_cell_bary(mesh, facet, cell, mu));
                w * g(&x[..dim])
            })
            .sum();
    }
    DiscreteField::new(Arc::clone(space), coeffs)
}

/// Facet-averaged nodal interpolant standing in for Scott–Zhang: the value
/// at an interior vertex `z` is `∫_E ψ_z g` over the lowest-index facet `E`
/// containing `z`, where `ψ_z` is the L²(E)-dual of the nodal basis, so
/// affine functions are reproduced. Boundary vertices get 0.
pub fn avg_nodal(space: &Arc<FeSpace>, g: impl Fn(&[f64]) -> f64) -> Result<DiscreteField> {
    if space.kind() != SpaceKind::P1Conforming {
        return Err(Error::invalid("the averaged nodal interpolant maps into the conforming space"));
    }
    let mesh = space.mesh();
    let dim = space.dim();
    let rule = facet_rule(dim - 1, PROJECTION_DEGREE)?;
    let boundary = mesh.boundary_vertices();
    let mut facet_of = vec![usize::MAX; mesh.n_vertices()];
    for (f, facet) in mesh.facets().iter().enumerate() {
        for &v in facet.vertices() {
            if facet_of[v] == usize::MAX {
                facet_of[v] = f;
            }
        }
    }
    // Dual basis of P1 on a facet with k = dim vertices, normalized by |E|:
    // ψ_a = k(k+1)(μ_a − 1/(k+1)).
    let k = dim as f64;
    let mut coeffs = vec![0.0; space.dof_count()];
    for v in 0..mesh.n_vertices() {
        if boundary[v] {
            continue;
        }
        let facet = mesh.facet(facet_of[v]);
        let a = facet.vertices().iter().position(|&u| u == v).expect("vertex on its facet");
        let cell = facet.plus_cell();
        coeffs[v] = rule
            .iter()
            .map(|(mu, w)| {
                let x = mesh.point_in_cell(cell, &facet_to_cell_bary(mesh, facet, cell, mu));
                w * k * (k + 1.0) * (mu[a] - 1.0 / (k + 1.0)) * g(&x[..dim])
            })
            .sum();
    }
    DiscreteField::new(Arc::clone(space), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::l2_error;
    use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh};
    use crate::spaces::{build_space, facet_traces};
    use std::f64::consts::PI;

    fn space(n: usize, kind: SpaceKind) -> Arc<FeSpace> {
        Arc::new(build_space(Arc::new(build_unit_square_mesh(n).unwrap()), kind))
    }

    fn bump(x: &[f64]) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    fn bump_grad(x: &[f64]) -> [f64; 3] {
        [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos(), 0.0]
    }

    fn max_diff(a: &DiscreteField, b: &DiscreteField) -> f64 {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn policy_table() {
        assert_eq!(initial_operator(Scheme::Cfem, 5.0, 2).unwrap(), InitialOperator::Ritz);
        assert_eq!(initial_operator(Scheme::Cfem, 6.0, 3).unwrap(), InitialOperator::Ritz);
        assert_eq!(initial_operator(Scheme::Cfem, 8.0, 3).unwrap(), InitialOperator::AvgNodal);
        assert_eq!(initial_operator(Scheme::Ncfem, 11.0, 3).unwrap(), InitialOperator::CrFacetMean);
        assert_eq!(initial_operator(Scheme::Dg, 4.0, 2).unwrap(), InitialOperator::Pi1);
        assert!(initial_operator(Scheme::Dg, 1.5, 2).is_err());
    }

    #[test]
    fn affine_reproduction() {
        let cfg = SolverConfig::default();
        let g = |x: &[f64]| 0.3 + 2.0 * x[0] - 1.5 * x[1];
        for kind in [SpaceKind::P1Conforming, SpaceKind::CrouzeixRaviart, SpaceKind::Discontinuous] {
            let s = space(5, kind);
            let l2 = l2_project(&s, g, &cfg).unwrap();
            assert!(max_diff(&l2, &s.interpolate(g)) < 1e-11, "{kind:?}");
        }
        let dg = space(4, SpaceKind::Discontinuous);
        assert!(max_diff(&pi1_project(&dg, g).unwrap(), &dg.interpolate(g)) < 1e-12);
        // Facet-averaged interpolant reproduces affine data at interior vertices.
        let p1 = space(4, SpaceKind::P1Conforming);
        let a = avg_nodal(&p1, g).unwrap();
        let exact = p1.interpolate(g);
        for v in 0..p1.dof_count() {
            if !p1.is_boundary_dof(v) {
                assert!((a.coeffs()[v] - exact.coeffs()[v]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pi1_is_local_l2_projection() {
        let dg = space(4, SpaceKind::Discontinuous);
        let a = pi1_project(&dg, bump).unwrap();
        let b = l2_project(&dg, bump, &SolverConfig::default()).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
        let piecewise = DiscreteField::new(Arc::clone(&dg), (0..dg.dof_count()).map(|i| (i as f64).sin()).collect()).unwrap();
        let f = |x: &[f64]| piecewise.eval(x).unwrap();
        // Projection of a field of the space reproduces it only up to the
        // quadrature of the discontinuous integrand at cell boundaries, which
        // the interior quadrature points never touch.
        assert!(max_diff(&pi1_project(&dg, f).unwrap(), &piecewise) < 1e-10);
    }

    #[test]
    fn ritz_properties() {
        let cfg = SolverConfig::default();
        let s = space(8, SpaceKind::P1Conforming);
        let r = ritz_project(&s, bump, bump_grad, &cfg).unwrap();
        let red = DofReduction::new(s.dof_count(), &s.boundary_dofs());
        let k = assemble_stiffness(&s);
        let kc = red.restrict(&k.mul_vec(r.coeffs()));
        let b = red.restrict(&ritz_load(&s, &bump_grad).unwrap());
        let res: f64 = kc.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-10, "{res}");
        // ‖∇R_h g‖² = cᵀKc ≤ ‖∇g‖² = π²/2
        assert!(k.quad_form(r.coeffs(), r.coeffs()) <= PI * PI / 2.0 + 1e-10);
        // Idempotence on the discrete space.
        let again = ritz_project(&s, |x| r.eval(x).unwrap(), |x| {
            let (c, _) = s.mesh().locate(x).unwrap();
            r.gradient_in_cell(c)
        }, &cfg);
        assert!(max_diff(&again.unwrap(), &r) < 1e-10);
        assert!(matches!(
            ritz_project(&s, |x| x[0] + 1.0, |_| [1.0, 0.0, 0.0], &cfg),
            Err(Error::NonHomogeneousBoundary { .. })
        ));
    }

    #[test]
    fn cr_interpolant() {
        let s = space(4, SpaceKind::CrouzeixRaviart);
        let ones = cr_interpolate(&s, |_| 1.0).unwrap();
        for f in 0..s.dof_count() {
            let expect = if s.is_boundary_dof(f) { 0.0 } else { 1.0 };
            assert!((ones.coeffs()[f] - expect).abs() < 1e-15);
        }
        let c = cr_interpolate(&s, bump).unwrap();
        let rule = facet_rule(1, 2).unwrap();
        for f in 0..s.mesh().n_facets() {
            if !s.mesh().facet(f).is_boundary() {
                let j = facet_traces(&c, f, &rule).integrated_jump();
                assert!(j.iter().all(|v| v.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn second_order_in_l2() {
        let cfg = SolverConfig::default();
        let ops: Vec<(&str, Box<dyn Fn(usize) -> DiscreteField>)> = vec![
            ("l2", Box::new(|n| l2_project(&space(n, SpaceKind::P1Conforming), bump, &cfg).unwrap())),
            ("ritz", Box::new(|n| ritz_project(&space(n, SpaceKind::P1Conforming), bump, bump_grad, &cfg).unwrap())),
            ("pi1", Box::new(|n| pi1_project(&space(n, SpaceKind::Discontinuous), bump).unwrap())),
            ("cr", Box::new(|n| cr_interpolate(&space(n, SpaceKind::CrouzeixRaviart), bump).unwrap())),
            ("avg", Box::new(|n| avg_nodal(&space(n, SpaceKind::P1Conforming), bump).unwrap())),
        ];
        for (name, op) in ops {
            let e1 = l2_error(&op(8), |x| bump(x)).unwrap();
            let e2 = l2_error(&op(16), |x| bump(x)).unwrap();
            let ratio = e1 / e2;
            assert!((3.6..=4.4).contains(&ratio), "{name}: ratio {ratio}");
        }
    }

    #[test]
    fn three_dimensional_initial_data() {
        let mesh = Arc::new(build_unit_cube_mesh(3).unwrap());
        let s = Arc::new(build_space(mesh, SpaceKind::P1Conforming));
        let g = |x: &[f64]| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]);
        let u0 = InitialData::new(g);
        let f = set_initial(&s, Scheme::Cfem, 11.0, &u0, &SolverConfig::default()).unwrap();
        for v in s.boundary_dofs() {
            assert_eq!(f.coeffs()[v], 0.0);
        }
        assert!(l2_error(&f, g).unwrap() < 5e-3);
    }
}
