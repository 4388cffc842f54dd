//! The reaction operator `α|u|^{p−2}u − Σ_ℓ β_ℓ|u|^{q_ℓ−2}u` in weak form.

use serde::{Deserialize, Serialize};

use crate::assembly::reference_scale;
use crate::error::{Error, Result};
use crate::quadrature::{reaction_degree, simplex_rule, QuadRule};
use crate::solver::sparse::{CsrMatrix, TripletBuilder};
use crate::spaces::{DiscreteField, FeSpace};

/// One pumping term `β|u|^{q−2}u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pumping {
    pub beta: f64,
    pub q: f64,
}

/// Damping coefficient and exponent plus the list of pumping terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub alpha: f64,
    pub p: f64,
    #[serde(default)]
    pub pumping: Vec<Pumping>,
}

/// `|x|^e` with `|x|^0 = 1`, using integer powers when `e` is integral.
#[inline]
pub fn abs_pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e.abs() < 64.0 {
        x.abs().powi(e as i32)
    } else {
        x.abs().powf(e)
    }
}

impl ReactionSpec {
    pub fn new(alpha: f64, p: f64, pumping: Vec<Pumping>) -> Result<Self> {
        let spec = ReactionSpec { alpha, p, pumping };
        spec.validate()?;
        Ok(spec)
    }

    pub fn damped(alpha: f64, p: f64) -> Result<Self> {
        Self::new(alpha, p, Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::invalid(format!("p must be at least 2, got {}", self.p)));
        }
        for t in &self.pumping {
            if !(t.q >= 2.0 && t.q < self.p) {
                return Err(Error::invalid(format!(
                    "pumping exponent q = {} must lie in [2, p) with p = {}",
                    t.q, self.p
                )));
            }
            if !t.beta.is_finite() {
                return Err(Error::invalid("pumping coefficient must be finite"));
            }
        }
        Ok(())
    }

    /// Number of pumping terms `M`.
    pub fn m(&self) -> usize {
        self.pumping.len()
    }

    /// Pointwise reaction `α|u|^{p−2}u − Σβ|u|^{q−2}u`.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        let mut r = self.alpha * abs_pow(u, self.p - 2.0) * u;
        for t in &self.pumping {
            r -= t.beta * abs_pow(u, t.q - 2.0) * u;
        }
        r
    }

    /// Pointwise derivative `α(p−1)|u|^{p−2} − Σβ(q−1)|u|^{q−2}`.
    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        let mut r = self.alpha * (self.p - 1.0) * abs_pow(u, self.p - 2.0);
        for t in &self.pumping {
            r -= t.beta * (t.q - 1.0) * abs_pow(u, t.q - 2.0);
        }
        r
    }

    /// Pointwise energy density `(α/p)|u|^p − Σ(β/q)|u|^q`.
    #[inline]
    pub fn energy_density(&self, u: f64) -> f64 {
        let mut r = self.alpha / self.p * abs_pow(u, self.p);
        for t in &self.pumping {
            r -= t.beta / t.q * abs_pow(u, t.q);
        }
        r
    }

    /// Default volume quadrature degree, `⌈p⌉ + 2`.
    pub fn quadrature_degree(&self) -> usize {
        reaction_degree(self.p)
    }
}

/// Cell quadrature with basis values tabulated at its points.
#[derive(Debug, Clone)]
pub struct CellQuadrature {
    rule: QuadRule,
    phi: Vec<[f64; 4]>,
    scale: f64,
}

impl CellQuadrature {
    pub fn new(space: &FeSpace, degree: usize) -> Result<Self> {
        let rule = simplex_rule(space.dim(), degree)?;
        let phi = rule.iter().map(|(b, _)| space.basis_values(b)).collect();
        Ok(CellQuadrature {
            rule,
            phi,
            scale: reference_scale(space.dim()),
        })
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    /// Calls `f(q, weight, u_h(x_q))` for each point of cell `c`, with the
    /// physical weight.
    #[inline]
    fn for_each<F: FnMut(usize, f64, f64)>(&self, space: &FeSpace, coeffs: &[f64], c: usize, mut f: F) {
        let dofs = space.cell_dofs(c);
        let area = space.mesh().cell_measure(c) * self.scale;
        for (q, phi) in self.phi.iter().enumerate() {
            let u: f64 = dofs.iter().zip(phi).map(|(&d, p)| coeffs[d] * p).sum();
            f(q, area * self.rule.weights()[q], u);
        }
    }
}

/// Residual and Jacobian evaluator for one space and reaction law.
#[derive(Debug, Clone)]
pub struct ReactionOperator {
    spec: ReactionSpec,
    quad: CellQuadrature,
}

impl ReactionOperator {
    pub fn new(space: &FeSpace, spec: &ReactionSpec) -> Result<Self> {
        Self::with_degree(space, spec, spec.quadrature_degree())
    }

    pub fn with_degree(space: &FeSpace, spec: &ReactionSpec, degree: usize) -> Result<Self> {
        spec.validate()?;
        Ok(ReactionOperator {
            spec: spec.clone(),
            quad: CellQuadrature::new(space, degree)?,
        })
    }

    pub fn spec(&self) -> &ReactionSpec {
        &self.spec
    }

    /// `r_i = ∫ (α|u_h|^{p−2}u_h − Σβ|u_h|^{q−2}u_h) χ_i`.
    pub fn residual(&self, space: &FeSpace, coeffs: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; space.dof_count()];
        for c in 0..space.mesh().n_cells() {
            let dofs = space.cell_dofs(c);
            self.quad.for_each(space, coeffs, c, |q, w, u| {
                let v = w * self.spec.value(u);
                for (i, &d) in dofs.iter().enumerate() {
                    r[d] += v * self.quad.phi[q][i];
                }
            });
        }
        r
    }

    /// `J_ij = ∫ (α(p−1)|u_h|^{p−2} − Σβ(q−1)|u_h|^{q−2}) χ_i χ_j`.
    pub fn jacobian(&self, space: &FeSpace, coeffs: &[f64]) -> CsrMatrix {
        let nl = space.local_count();
        let mut tb = TripletBuilder::with_capacity(space.dof_count(), space.mesh().n_cells() * nl * nl);
        let mut local = [[0.0f64; 4]; 4];
        for c in 0..space.mesh().n_cells() {
            local.iter_mut().for_each(|row| *row = [0.0; 4]);
            self.quad.for_each(space, coeffs, c, |q, w, u| {
                let v = w * self.spec.derivative(u);
                let phi = &self.quad.phi[q];
                for i in 0..nl {
                    for j in 0..nl {
                        local[i][j] += v * phi[i] * phi[j];
                    }
                }
            });
            let dofs = space.cell_dofs(c);
            for i in 0..nl {
                for j in 0..nl {
                    tb.push(dofs[i], dofs[j], local[i][j]);
                }
            }
        }
        tb.build()
    }

    /// Adds the local Jacobian blocks straight into `values`; `slots[(c·n_l + i)·n_l + j]`
    /// is the target index of entry `(i, j)` of cell `c`, `usize::MAX` to skip.
    pub fn add_jacobian_to(&self, space: &FeSpace, coeffs: &[f64], slots: &[usize], values: &mut [f64]) {
        let nl = space.local_count();
        let mut local = [[0.0f64; 4]; 4];
        for c in 0..space.mesh().n_cells() {
            local.iter_mut().for_each(|row| *row = [0.0; 4]);
            self.quad.for_each(space, coeffs, c, |q, w, u| {
                let v = w * self.spec.derivative(u);
                let phi = &self.quad.phi[q];
                for i in 0..nl {
                    for j in 0..nl {
                        local[i][j] += v * phi[i] * phi[j];
                    }
                }
            });
            let base = c * nl * nl;
            for i in 0..nl {
                for j in 0..nl {
                    let k = slots[base + i * nl + j];
                    if k != usize::MAX {
                        values[k] += local[i][j];
                    }
                }
            }
        }
    }

    /// `∫ (α/p)|u_h|^p − Σ(β/q)|u_h|^q`.
    pub fn energy(&self, space: &FeSpace, coeffs: &[f64]) -> f64 {
        let mut e = 0.0;
        for c in 0..space.mesh().n_cells() {
            self.quad.for_each(space, coeffs, c, |_, w, u| e += w * self.spec.energy_density(u));
        }
        e
    }
}

pub fn reaction_residual(u: &DiscreteField, spec: &ReactionSpec) -> Result<Vec<f64>> {
    let op = ReactionOperator::new(u.space(), spec)?;
    Ok(op.residual(u.space(), u.coeffs()))
}

pub fn reaction_jacobian(u: &DiscreteField, spec: &ReactionSpec) -> Result<CsrMatrix> {
    let op = ReactionOperator::new(u.space(), spec)?;
    Ok(op.jacobian(u.space(), u.coeffs()))
}

/// Pointwise version of [`monotonicity_gap`]:
/// `((b(u)−b(v))(u−v), 2^{−(p−2)}|u−v|^p)` with `b(u) = |u|^{p−2}u`.
pub fn monotonicity_pointwise(u: f64, v: f64, p: f64) -> (f64, f64) {
    let b = |x: f64| abs_pow(x, p - 2.0) * x;
    ((b(u) - b(v)) * (u - v), (2.0f64).powf(-(p - 2.0)) * abs_pow(u - v, p))
}

/// `(⟨b(u)−b(v), u−v⟩, 2^{−(p−2)}‖u−v‖^p_{L^p})` by positive-weight quadrature.
pub fn monotonicity_gap(u: &DiscreteField, v: &DiscreteField, p: f64) -> Result<(f64, f64)> {
    if !std::sync::Arc::ptr_eq(u.space(), v.space()) && u.space().dof_count() != v.space().dof_count() {
        return Err(Error::invalid("fields live in different spaces"));
    }
    if !(p >= 2.0) {
        return Err(Error::invalid(format!("p must be at least 2, got {p}")));
    }
    let space = u.space();
    let quad = CellQuadrature::new(space, reaction_degree(p))?;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for c in 0..space.mesh().n_cells() {
        let dofs = space.cell_dofs(c);
        let area = space.mesh().cell_measure(c) * quad.scale;
        for (q, phi) in quad.phi.iter().enumerate() {
            let eval = |coeffs: &[f64]| -> f64 { dofs.iter().zip(phi).map(|(&d, p)| coeffs[d] * p).sum() };
            let (a, b) = monotonicity_pointwise(eval(u.coeffs()), eval(v.coeffs()), p);
            let w = area * quad.rule.weights()[q];
            lhs += w * a;
            rhs += w * b;
        }
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_unit_square_mesh;
    use crate::spaces::{build_space, SpaceKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn space(n: usize, kind: SpaceKind) -> Arc<FeSpace> {
        Arc::new(build_space(Arc::new(build_unit_square_mesh(n).unwrap()), kind))
    }

    fn random_field(s: &Arc<FeSpace>, rng: &mut ChaCha8Rng) -> DiscreteField {
        let c = (0..s.dof_count()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        DiscreteField::new(Arc::clone(s), c).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ReactionSpec::damped(0.0, 4.0).is_err());
        assert!(ReactionSpec::damped(1.0, 1.5).is_err());
        assert!(ReactionSpec::new(1.0, 4.0, vec![Pumping { beta: 1.0, q: 4.0 }]).is_err());
        assert!(ReactionSpec::new(1.0, 4.0, vec![Pumping { beta: 1.0, q: 2.0 }]).is_ok());
    }

    #[test]
    fn zero_field_gives_zero() {
        let s = space(3, SpaceKind::P1Conforming);
        let spec = ReactionSpec::new(1.0, 5.0, vec![Pumping { beta: 2.0, q: 3.0 }]).unwrap();
        let u = DiscreteField::zeros(Arc::clone(&s));
        assert!(reaction_residual(&u, &spec).unwrap().iter().all(|&v| v == 0.0));
        assert!(reaction_jacobian(&u, &spec).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_on_cell_matches_exact_integral() {
        let s = space(1, SpaceKind::Discontinuous);
        let c = 0.7;
        let u = DiscreteField::new(Arc::clone(&s), vec![c; s.dof_count()]).unwrap();
        let r = reaction_residual(&u, &ReactionSpec::damped(1.0, 4.0).unwrap()).unwrap();
        let expect = c * c * c * 0.5 / 3.0;
        assert!(r.iter().all(|v| (v - expect).abs() < 1e-15));
    }

    #[test]
    fn quadratic_case_is_mass_times_coefficients() {
        let s = space(4, SpaceKind::CrouzeixRaviart);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_field(&s, &mut rng);
        let r = reaction_residual(&u, &ReactionSpec::damped(2.5, 2.0).unwrap()).unwrap();
        let m = crate::assembly::assemble_mass(&s);
        let mu = m.mul_vec(u.coeffs());
        for (a, b) in r.iter().zip(&mu) {
            assert!((a - 2.5 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [SpaceKind::P1Conforming, SpaceKind::CrouzeixRaviart, SpaceKind::Discontinuous] {
            let s = space(4, kind);
            let spec = ReactionSpec::new(1.0, 5.0, vec![Pumping { beta: 1.0, q: 3.0 }, Pumping { beta: 3.0, q: 4.0 }]).unwrap();
            let op = ReactionOperator::new(&s, &spec).unwrap();
            let u = random_field(&s, &mut rng);
            let v = random_field(&s, &mut rng);
            let eps = 1e-6;
            let up: Vec<f64> = u.coeffs().iter().zip(v.coeffs()).map(|(a, b)| a + eps * b).collect();
            let r0 = op.residual(&s, u.coeffs());
            let r1 = op.residual(&s, &up);
            let jv = op.jacobian(&s, u.coeffs()).mul_vec(v.coeffs());
            let diff: f64 = r1
                .iter()
                .zip(&r0)
                .zip(&jv)
                .map(|((a, b), j)| ((a - b) / eps - j).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = jv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(diff / scale <= 1e-5, "{kind:?}: {}", diff / scale);
        }
    }

    #[test]
    fn residual_is_energy_gradient() {
        let s = space(3, SpaceKind::P1Conforming);
        let spec = ReactionSpec::new(1.0, 4.0, vec![Pumping { beta: 1.0, q: 2.0 }]).unwrap();
        let op = ReactionOperator::new(&s, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&s, &mut rng);
        let v = random_field(&s, &mut rng);
        let eps = 1e-6;
        let plus: Vec<f64> = u.coeffs().iter().zip(v.coeffs()).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = u.coeffs().iter().zip(v.coeffs()).map(|(a, b)| a - eps * b).collect();
        let fd = (op.energy(&s, &plus) - op.energy(&s, &minus)) / (2.0 * eps);
        let exact: f64 = op.residual(&s, u.coeffs()).iter().zip(v.coeffs()).map(|(a, b)| a * b).sum();
        assert!((fd - exact).abs() <= 1e-7 * exact.abs().max(1.0));
    }

    #[test]
    fn damping_jacobian_is_positive_semidefinite() {
        let s = space(4, SpaceKind::P1Conforming);
        let spec = ReactionSpec::damped(1.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_field(&s, &mut rng);
        let j = reaction_jacobian(&u, &spec).unwrap();
        assert!(j.max_asymmetry() < 1e-14);
        for _ in 0..100 {
            let x = random_field(&s, &mut rng);
            assert!(j.quad_form(x.coeffs(), x.coeffs()) >= -1e-14);
        }
    }

    #[test]
    fn monotonicity() {
        assert_eq!(monotonicity_pointwise(1.0, -1.0, 4.0), (4.0, 4.0));
        let s = space(4, SpaceKind::P1Conforming);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_field(&s, &mut rng);
        assert_eq!(monotonicity_gap(&u, &u, 4.0).unwrap(), (0.0, 0.0));
        for p in [3.0, 4.0, 5.0, 11.0] {
            let v = random_field(&s, &mut rng);
            let (l, r) = monotonicity_gap(&u, &v, p).unwrap();
            assert!(l - r >= -1e-12 * (1.0 + l.abs()), "p={p}: {l} < {r}");
        }
        // Random scalar pairs, including the near-equality regime u ≈ −v.
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-3.0..3.0);
            let b: f64 = if rng.gen_bool(0.5) { -a } else { rng.gen_range(-3.0..3.0) };
            for p in [2.0, 3.0, 4.0, 5.0, 11.0] {
                let (l, r) = monotonicity_pointwise(a, b, p);
                assert!(l - r >= -1e-12 * (1.0 + l.abs()));
            }
        }
    }
}
