//! Quadrature on the reference interval, triangle and tetrahedron.
//!
//! Points are stored in barycentric coordinates so that P1 basis values at a
//! quadrature point are read off directly. Low degrees use the classical
//! symmetric rules; higher degrees use collapsed (Stroud conical product)
//! Gauss–Legendre rules, which have positive weights at every degree.

use crate::error::{Error, Result};

/// Highest polynomial degree accepted by [`simplex_rule`] and [`facet_rule`].
pub const MAX_DEGREE: usize = 40;

/// Number of time points used for forcing averages by default (3-point Gauss).
pub const DEFAULT_TIME_DEGREE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    dim: usize,
    degree: usize,
    points: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

impl QuadRule {
    /// Dimension of the reference cell (1 interval, 2 triangle, 3 tetrahedron).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of each point (`dim + 1` entries used).
    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(p, &w)| (&p[..self.dim + 1], w))
    }

    /// Reference coordinates `(λ_1, …, λ_dim)` of point `q`.
    pub fn reference_point(&self, q: usize) -> &[f64] {
        &self.points[q][1..=self.dim]
    }

    fn scaled(mut self, factor: f64) -> Self {
        for w in &mut self.weights {
            *w *= factor;
        }
        self
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]` with `m` points.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Newton on P_m starting from the Chebyshev-like guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn check_degree(dim: usize, degree: usize) -> Result<()> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            dim,
            degree,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

fn interval_rule(degree: usize) -> QuadRule {
    let m = (degree + 1).div_ceil(2);
    let (nodes, weights) = gauss_legendre(m);
    QuadRule {
        dim: 1,
        degree,
        points: nodes.iter().map(|&s| [1.0 - s, s, 0.0, 0.0]).collect(),
        weights,
    }
}

/// Quadrature on the reference simplex, exact for total degree `degree`.
/// Weights sum to 1/2 (triangle) or 1/6 (tetrahedron).
pub fn simplex_rule(dim: usize, degree: usize) -> Result<QuadRule> {
    check_degree(dim, degree)?;
    match dim {
        1 => Ok(interval_rule(degree)),
        2 => Ok(triangle_rule(degree)),
        3 => Ok(tetrahedron_rule(degree)),
        _ => Err(Error::invalid(format!("no simplex rule in dimension {dim}"))),
    }
}

/// Quadrature on a reference facet (interval for 2D meshes, triangle for 3D)
/// normalized so the weights sum to 1; multiply by the facet measure.
pub fn facet_rule(facet_dim: usize, degree: usize) -> Result<QuadRule> {
    match facet_dim {
        1 => simplex_rule(1, degree),
        2 => Ok(simplex_rule(2, degree)?.scaled(2.0)),
        _ => Err(Error::invalid(format!("no facet rule in dimension {facet_dim}"))),
    }
}

fn triangle_rule(degree: usize) -> QuadRule {
    let (points, weights): (Vec<[f64; 4]>, Vec<f64>) = match degree {
        1 => (vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]], vec![0.5]),
        2 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            (
                vec![[a, b, b, 0.0], [b, a, b, 0.0], [b, b, a, 0.0]],
                vec![1.0 / 6.0; 3],
            )
        }
        3 | 4 => {
            // six-point degree-4 rule in closed form
            let s10 = 10f64.sqrt();
            let r = (38.0 - 44.0 * (0.4f64).sqrt()).sqrt();
            let a1 = (8.0 - s10 + r) / 18.0;
            let a2 = (8.0 - s10 - r) / 18.0;
            let disc = (213125.0 - 53320.0 * s10).sqrt();
            let w1 = (620.0 + disc) / 3720.0 * 0.5;
            let w2 = (620.0 - disc) / 3720.0 * 0.5;
            let mut pts = Vec::with_capacity(6);
            let mut ws = Vec::with_capacity(6);
            for (a, w) in [(a1, w1), (a2, w2)] {
                let c = 1.0 - 2.0 * a;
                pts.extend([[c, a, a, 0.0], [a, c, a, 0.0], [a, a, c, 0.0]]);
                ws.extend([w; 3]);
            }
            (pts, ws)
        }
        _ => {
            let (un, uw) = gauss_legendre((degree + 2).div_ceil(2));
            let (vn, vw) = gauss_legendre((degree + 1).div_ceil(2));
            let mut pts = Vec::with_capacity(un.len() * vn.len());
            let mut ws = Vec::with_capacity(un.len() * vn.len());
            for (&u, &wu) in un.iter().zip(&uw) {
                for (&v, &wv) in vn.iter().zip(&vw) {
                    let x = u;
                    let y = v * (1.0 - u);
                    pts.push([1.0 - x - y, x, y, 0.0]);
                    ws.push(wu * wv * (1.0 - u));
                }
            }
            (pts, ws)
        }
    };
    QuadRule {
        dim: 2,
        degree,
        points,
        weights,
    }
}

fn tetrahedron_rule(degree: usize) -> QuadRule {
    let (points, weights): (Vec<[f64; 4]>, Vec<f64>) = match degree {
        1 => (vec![[0.25; 4]], vec![1.0 / 6.0]),
        2 => {
            let a = (5.0 - 5f64.sqrt()) / 20.0;
            let b = 1.0 - 3.0 * a;
            (
                vec![[b, a, a, a], [a, b, a, a], [a, a, b, a], [a, a, a, b]],
                vec![1.0 / 24.0; 4],
            )
        }
        _ => {
            let (un, uw) = gauss_legendre((degree + 3).div_ceil(2));
            let (vn, vw) = gauss_legendre((degree + 2).div_ceil(2));
            let (wn, ww) = gauss_legendre((degree + 1).div_ceil(2));
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for (&u, &wu) in un.iter().zip(&uw) {
                for (&v, &wv) in vn.iter().zip(&vw) {
                    for (&w, &www) in wn.iter().zip(&ww) {
                        let x = u;
                        let y = v * (1.0 - u);
                        let z = w * (1.0 - u) * (1.0 - v);
                        pts.push([1.0 - x - y - z, x, y, z]);
                        ws.push(wu * wv * www * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
            (pts, ws)
        }
    };
    QuadRule {
        dim: 3,
        degree,
        points,
        weights,
    }
}

/// Default volume degree for the reaction terms: `⌈p⌉ + 2`.
pub fn reaction_degree(p: f64) -> usize {
    p.ceil() as usize + 2
}

/// Mean of `f` over `[t0, t1]` by Gauss–Legendre quadrature of the given degree.
pub fn interval_average<F: FnMut(f64) -> f64>(mut f: F, t0: f64, t1: f64, degree: usize) -> Result<f64> {
    if !(t1 > t0) {
        return Err(Error::invalid(format!("empty time interval [{t0}, {t1}]")));
    }
    check_degree(1, degree)?;
    let (nodes, weights) = gauss_legendre((degree + 1).div_ceil(2));
    Ok(nodes
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| w * f(t0 + s * (t1 - t0)))
        .sum())
}

/// Time nodes and weights (summing to 1) for averaging over `[t0, t1]`.
pub fn interval_average_nodes(t0: f64, t1: f64, degree: usize) -> Result<Vec<(f64, f64)>> {
    if !(t1 > t0) {
        return Err(Error::invalid(format!("empty time interval [{t0}, {t1}]")));
    }
    check_degree(1, degree)?;
    let (nodes, weights) = gauss_legendre((degree + 1).div_ceil(2));
    Ok(nodes
        .iter()
        .zip(weights)
        .map(|(&s, w)| (t0 + s * (t1 - t0), w))
        .collect())
}
