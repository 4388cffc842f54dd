//! Randomized structural checks of the discretization: monotonicity of the
//! damping term, consistency of the reaction Jacobian, Ritz orthogonality,
//! properties of the interior-penalty form, facet jumps, the discrete
//! stability bound and free-energy dissipation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{dg_jump_seminorm_sq, free_energy};
use crate::assembly::{assemble_stiffness, reference_scale, AssembledForms, DofReduction};
use crate::error::Result;
use crate::mesh::build_unit_square_mesh;
use crate::nonlinear::{monotonicity_gap, Pumping, ReactionOperator, ReactionSpec};
use crate::problem::DtPolicy;
use crate::projections::ritz_project;
use crate::quadrature::{facet_rule, simplex_rule};
use crate::solver::{backward_euler_step, CholeskyFactor, SolverConfig, StepSystem, TimeState};
use crate::spaces::{build_space, facet_traces, DiscreteField, FeSpace, Scheme, SpaceKind};

use super::registry::lookup;
use super::study::solve;

/// Exponents exercised by the monotonicity and Jacobian checks.
pub const EXPONENTS: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 11.0];
pub const MONOTONICITY_PAIRS: usize = 1000;
pub const CONTINUITY_PAIRS: usize = 1000;
pub const JACOBIAN_TOL: f64 = 1e-5;
pub const RITZ_TOL: f64 = 1e-10;
pub const DG_GAMMA: f64 = 10.0;
pub const COERCIVITY_SAMPLES: usize = 1000;
/// Lower bound for `a_DG(v,v)/⫼v⫼²` at `γ = 10`; random fields give about 0.83.
pub const COERCIVITY_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        PropertyResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

fn space(n: usize, kind: SpaceKind) -> Result<Arc<FeSpace>> {
    Ok(Arc::new(build_space(Arc::new(build_unit_square_mesh(n)?), kind)))
}

fn random_field(s: &Arc<FeSpace>, rng: &mut ChaCha8Rng, scale: f64, zero_boundary: bool) -> DiscreteField {
    let c = (0..s.dof_count())
        .map(|d| {
            if zero_boundary && s.is_boundary_dof(d) {
                0.0
            } else {
                rng.gen_range(-scale..scale)
            }
        })
        .collect();
    DiscreteField::new(Arc::clone(s), c).expect("coefficient count matches")
}

const KINDS: [SpaceKind; 3] = [SpaceKind::P1Conforming, SpaceKind::CrouzeixRaviart, SpaceKind::Discontinuous];

/// Runs every check with the given seed.
pub fn run_properties(seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        monotonicity(&mut rng)?,
        jacobian_consistency(&mut rng)?,
    ];
    out.extend(ritz(&mut rng)?);
    out.push(dg_symmetry()?);
    out.push(dg_continuity(&mut rng)?);
    out.push(dg_coercivity(&mut rng)?);
    out.push(cr_facet_means(&mut rng)?);
    out.push(conforming_jumps(&mut rng)?);
    out.push(stability_smoke()?);
    out.push(energy_decrease(&mut rng)?);
    Ok(out)
}

/// `⟨b(u)−b(v), u−v⟩ ≥ 2^{−(p−2)}‖u−v‖^p_{L^p}` for `b(s) = |s|^{p−2}s`.
pub fn monotonicity(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let spaces: Vec<_> = KINDS.iter().map(|&k| space(4, k)).collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for i in 0..MONOTONICITY_PAIRS {
        let s = &spaces[i % spaces.len()];
        let u = random_field(s, rng, 2.0, false);
        // Every fourth pair sits close to v = −u, where the bound is tight.
        let v = if i % 4 == 0 {
            let c = u.coeffs().iter().map(|x| -x + rng.gen_range(-1e-3..1e-3)).collect();
            DiscreteField::new(Arc::clone(s), c)?
        } else {
            random_field(s, rng, 2.0, false)
        };
        for p in EXPONENTS {
            let (l, r) = monotonicity_gap(&u, &v, p)?;
            worst = worst.min((l - r) / (1.0 + l.abs()));
            checked += 1;
        }
    }
    Ok(PropertyResult::new(
        "monotonicity",
        worst >= -1e-12,
        format!("{checked} pairs, min relative gap {worst:.3e}"),
    ))
}

/// Reaction Jacobian against central differences of the residual.
pub fn jacobian_consistency(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for kind in KINDS {
        let s = space(3, kind)?;
        for p in EXPONENTS {
            let pumping = if p > 3.0 {
                vec![Pumping { beta: 1.5, q: 3.0 }]
            } else {
                Vec::new()
            };
            let spec = ReactionSpec::new(1.0, p, pumping)?;
            let op = ReactionOperator::new(&s, &spec)?;
            let u = random_field(&s, rng, 1.0, false);
            let d = random_field(&s, rng, 1.0, false);
            let jd = op.jacobian(&s, u.coeffs()).mul_vec(d.coeffs());
            let eps = 1e-6;
            let shifted = |sign: f64| -> Vec<f64> {
                let c: Vec<f64> = u.coeffs().iter().zip(d.coeffs()).map(|(a, b)| a + sign * eps * b).collect();
                op.residual(&s, &c)
            };
            let (rp, rm) = (shifted(1.0), shifted(-1.0));
            let scale = jd.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for i in 0..jd.len() {
                let fd = (rp[i] - rm[i]) / (2.0 * eps);
                worst = worst.max((fd - jd[i]).abs() / scale);
            }
        }
    }
    Ok(PropertyResult::new(
        "jacobian_finite_difference",
        worst <= JACOBIAN_TOL,
        format!("max relative deviation {worst:.3e}"),
    ))
}

/// Galerkin orthogonality `(∇(g − R_h g), ∇χ) = 0` and `‖∇R_h g‖ ≤ ‖∇g‖`.
pub fn ritz(rng: &mut ChaCha8Rng) -> Result<Vec<PropertyResult>> {
    use std::f64::consts::PI;
    let (mut worst_orth, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for n in [4, 8, 16] {
        let s = space(n, SpaceKind::P1Conforming)?;
        let (a, b) = (rng.gen_range(1.0..3.0), rng.gen_range(1.0..3.0));
        let g = move |x: &[f64]| (PI * x[0]).sin() * (PI * x[1]).sin() * (1.0 + a * x[0] * x[1] + b * x[1]);
        let grad = move |x: &[f64]| {
            let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
            let (cx, cy) = ((PI * x[0]).cos(), (PI * x[1]).cos());
            let w = 1.0 + a * x[0] * x[1] + b * x[1];
            [
                PI * cx * sy * w + sx * sy * a * x[1],
                PI * sx * cy * w + sx * sy * (a * x[0] + b),
                0.0,
            ]
        };
        let rg = ritz_project(&s, g, grad, &SolverConfig::default())?;
        let k = assemble_stiffness(&s);
        let load = crate::projections::ritz_load(&s, &grad)?;
        let ku = k.mul_vec(rg.coeffs());
        let red = DofReduction::new(s.dof_count(), &s.boundary_dofs());
        let scale = load.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for &d in red.free_dofs() {
            worst_orth = worst_orth.max((ku[d] - load[d]).abs() / scale.max(1.0));
        }
        let discrete = k.quad_form(rg.coeffs(), rg.coeffs());
        let mesh = s.mesh();
        let rule = simplex_rule(2, 8)?;
        let mut exact = 0.0;
        for c in 0..mesh.n_cells() {
            let area = mesh.cell_measure(c) * reference_scale(2);
            for (bary, w) in rule.iter() {
                let gx = grad(&mesh.point_in_cell(c, bary)[..2]);
                exact += area * w * (gx[0] * gx[0] + gx[1] * gx[1]);
            }
        }
        worst_ratio = worst_ratio.max((discrete / exact).sqrt());
    }
    Ok(vec![
        PropertyResult::new(
            "ritz_orthogonality",
            worst_orth <= RITZ_TOL,
            format!("max |(∇(g − R_h g), ∇χ)| {worst_orth:.3e}"),
        ),
        PropertyResult::new(
            "ritz_gradient_stability",
            worst_ratio <= 1.0 + 1e-12,
            format!("max ‖∇R_h g‖/‖∇g‖ = {worst_ratio:.6}"),
        ),
    ])
}

fn dg_form(n: usize) -> Result<(Arc<FeSpace>, crate::solver::CsrMatrix)> {
    let s = space(n, SpaceKind::Discontinuous)?;
    let forms = AssembledForms::assemble(&s, Some(DG_GAMMA))?;
    Ok((s, forms.diffusion()))
}

pub fn dg_symmetry() -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    for n in [4, 8] {
        let (_, a) = dg_form(n)?;
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(a.max_asymmetry() / scale);
    }
    Ok(PropertyResult::new(
        "dg_symmetry",
        worst <= 1e-13,
        format!("max relative asymmetry {worst:.3e}"),
    ))
}

/// `|a_DG(u,v)| ≤ (1+γ)⫼u⫼⫼v⫼`
pub fn dg_continuity(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let (s, a) = dg_form(4)?;
    let k = assemble_stiffness(&s);
    let norm = |f: &DiscreteField| -> Result<f64> {
        Ok((k.quad_form(f.coeffs(), f.coeffs()) + dg_jump_seminorm_sq(f, DG_GAMMA)?).sqrt())
    };
    let mut worst: f64 = 0.0;
    for _ in 0..CONTINUITY_PAIRS {
        let u = random_field(&s, rng, 1.0, false);
        let v = random_field(&s, rng, 1.0, false);
        let lhs = a.quad_form(u.coeffs(), v.coeffs()).abs();
        worst = worst.max(lhs / ((1.0 + DG_GAMMA) * norm(&u)? * norm(&v)?));
    }
    Ok(PropertyResult::new(
        "dg_continuity",
        worst <= 1.0,
        format!("{CONTINUITY_PAIRS} pairs, max |a|/((1+γ)⫼u⫼⫼v⫼) = {worst:.4}"),
    ))
}

/// Smallest eigenvalue of `a_DG` by inverse iteration on its Cholesky factor.
fn min_eigenvalue(a: &crate::solver::CsrMatrix) -> Result<f64> {
    let factor = CholeskyFactor::new(a)?;
    let n = a.dim();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let ax = a.mul_vec(&x);
        let next = x.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>();
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            return Ok(next);
        }
        lambda = next;
        factor.solve_in_place(&mut x);
    }
    Ok(lambda)
}

pub fn dg_coercivity(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [4, 8] {
        let (s, a) = dg_form(n)?;
        let lam = min_eigenvalue(&a).unwrap_or(f64::NAN);
        let k = assemble_stiffness(&s);
        let mut worst = f64::INFINITY;
        for _ in 0..COERCIVITY_SAMPLES {
            let v = random_field(&s, rng, 1.0, false);
            let norm_sq = k.quad_form(v.coeffs(), v.coeffs()) + dg_jump_seminorm_sq(&v, DG_GAMMA)?;
            worst = worst.min(a.quad_form(v.coeffs(), v.coeffs()) / norm_sq);
        }
        ok &= lam > 0.0 && worst >= COERCIVITY_FLOOR;
        details.push(format!("n={n}: λ_min {lam:.4e}, min a(v,v)/⫼v⫼² {worst:.4}"));
    }
    Ok(PropertyResult::new("dg_coercivity", ok, details.join(", ")))
}

/// Crouzeix–Raviart fields have mean-zero jumps on every facet.
pub fn cr_facet_means(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let s = space(6, SpaceKind::CrouzeixRaviart)?;
    let rule = facet_rule(1, 2)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&s, rng, 1.0, true);
        for f in 0..s.mesh().n_facets() {
            let j = facet_traces(&u, f, &rule).integrated_jump();
            worst = worst.max(j.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
    }
    Ok(PropertyResult::new(
        "cr_facet_mean_jumps",
        worst <= 1e-13,
        format!("max |∫_E ⟦u⟧| {worst:.3e}"),
    ))
}

/// Conforming fields, represented in the DG space, have no jumps.
pub fn conforming_jumps(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let p1 = space(6, SpaceKind::P1Conforming)?;
    let dg = space(6, SpaceKind::Discontinuous)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_field(&p1, rng, 1.0, true);
        let v = dg.interpolate(|x| u.eval(x).expect("point inside the domain"));
        worst = worst.max(dg_jump_seminorm_sq(&v, DG_GAMMA)?);
    }
    Ok(PropertyResult::new(
        "conforming_zero_jumps",
        worst <= 1e-24,
        format!("max Σ γ/h_E‖⟦u⟧‖² {worst:.3e}"),
    ))
}

/// The stability bound on short runs of every two-dimensional problem.
pub fn stability_smoke() -> Result<PropertyResult> {
    let mut details = Vec::new();
    let mut ok = true;
    for name in ["cfem_damped_2d", "cfem_pumped_2d", "ncfem_pumped_2d", "dg_pumped_2d", "allen_cahn_3way"] {
        let base = lookup(name)?;
        for &scheme in &base.schemes {
            let mut p = base.with_scheme(scheme);
            p.final_time = 0.2;
            p.dt = DtPolicy::Fixed(0.02);
            let c = solve(&p, 4, &SolverConfig::default())?.stability;
            ok &= c.holds();
            details.push(format!("{name}/{scheme}: {:.3e} ≤ {:.3e}", c.lhs, c.rhs));
        }
    }
    Ok(PropertyResult::new("stability_bound", ok, details.join("; ")))
}

/// Free energy is non-increasing without forcing or pumping.
pub fn energy_decrease(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let cfg = SolverConfig::default();
    let reaction = ReactionSpec::damped(1.0, 4.0)?;
    let mut worst = f64::NEG_INFINITY;
    let mut details = Vec::new();
    for scheme in Scheme::ALL {
        let s = space(6, scheme.space_kind())?;
        let gamma = (scheme == Scheme::Dg).then_some(DG_GAMMA);
        let sys = StepSystem::new(Arc::clone(&s), scheme, gamma, 1.0, &reaction, 0.01, &cfg)?;
        let zero = vec![0.0; s.dof_count()];
        let mut state = TimeState::initial(random_field(&s, rng, 2.0, scheme != Scheme::Dg));
        let mut e_prev = free_energy(&state.current, 1.0, &reaction, gamma)?;
        let e0 = e_prev;
        for _ in 0..20 {
            state = backward_euler_step(&state, &sys, &cfg, &zero)?;
            let e = free_energy(&state.current, 1.0, &reaction, gamma)?;
            worst = worst.max((e - e_prev) / e0.abs().max(1.0));
            e_prev = e;
        }
        details.push(format!("{scheme}: {e0:.4e} → {e_prev:.4e}"));
    }
    Ok(PropertyResult::new(
        "free_energy_decrease",
        worst <= 1e-12,
        format!("{}; max relative increase {worst:.3e}", details.join(", ")),
    ))
}
