//! Preconditioned conjugate gradients with a direct-factorization fallback.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Side};

use super::sparse::CsrMatrix;
use super::{PreconditionerKind, SolverConfig};
use crate::error::{Error, Result};

/// Sparse Cholesky factor of an SPD matrix.
pub struct CholeskyFactor {
    n: usize,
    llt: Llt<usize, f64>,
}

impl std::fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor").field("n", &self.n).finish()
    }
}

fn to_faer(a: &CsrMatrix, lower_only: bool) -> Result<SparseColMat<usize, f64>> {
    let n = a.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> = if lower_only {
        a.lower_triplets().into_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect()
    } else {
        let mut t = Vec::with_capacity(a.nnz());
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.push(Triplet::new(i, j, v));
            }
        }
        t
    };
    SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularSystem(format!("could not convert matrix: {e:?}")))
}

impl CholeskyFactor {
    /// Factors `a`, which must be symmetric positive definite.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let m = to_faer(a, true)?;
        let llt = m
            .as_ref()
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(CholeskyFactor { n: a.dim(), llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        if self.n == 0 {
            return;
        }
        self.llt.solve_in_place(MatMut::from_column_major_slice_mut(x, self.n, 1));
    }
}

#[derive(Debug, Clone)]
pub enum Preconditioner {
    Identity,
    /// Inverse diagonal.
    Jacobi(Vec<f64>),
    Cholesky(Arc<CholeskyFactor>),
}

impl Preconditioner {
    pub fn jacobi(a: &CsrMatrix) -> Self {
        let inv = a
            .diagonal()
            .into_iter()
            .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Preconditioner::Jacobi(inv)
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Identity => z.copy_from_slice(r),
            Preconditioner::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Preconditioner::Cholesky(f) => {
                z.copy_from_slice(r);
                f.solve_in_place(z);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final true relative residual `‖b − Ax‖/‖b‖`.
    pub relative_residual: f64,
    pub converged: bool,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Preconditioned CG on `a x = b` starting from the given `x`. Stops when the
/// true residual satisfies `‖b − Ax‖ ≤ rel_tol·‖b‖`, on breakdown
/// (non-positive curvature), or after `max_iter` iterations.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], pc: &Preconditioner, rel_tol: f64, max_iter: usize) -> CgOutcome {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let target = rel_tol * bnorm;
    let mut r = vec![0.0; n];
    let mut rn = true_residual(a, b, x, &mut r);
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut it = 0;
    // A few restarts from the true residual guard against drift of the
    // recursively updated one near machine precision.
    for _restart in 0..4 {
        if rn <= target {
            break;
        }
        pc.apply(&r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        while it < max_iter {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) || !(rz > 0.0) {
                let rel = true_residual(a, b, x, &mut r) / bnorm;
                return CgOutcome {
                    iterations: it,
                    relative_residual: rel,
                    converged: rel <= rel_tol,
                };
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            it += 1;
            if norm(&r) <= 0.5 * target {
                break;
            }
            pc.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        rn = true_residual(a, b, x, &mut r);
        if it >= max_iter {
            break;
        }
    }
    CgOutcome {
        iterations: it,
        relative_residual: rn / bnorm,
        converged: rn <= target,
    }
}

/// Direct solve by sparse LU with partial pivoting.
pub fn direct_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = to_faer(a, false)?;
    let lu: Lu<usize, f64> = m
        .as_ref()
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;
    let mut x = b.to_vec();
    lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(format!("matrix of size {n} is numerically singular")));
    }
    let mut r = vec![0.0; n];
    let rn = true_residual(a, b, &x, &mut r);
    let scale = norm(b).max(f64::MIN_POSITIVE);
    if rn > 1e-6 * scale {
        return Err(Error::SingularSystem(format!(
            "matrix of size {n} is numerically singular (relative residual {:.3e})",
            rn / scale
        )));
    }
    Ok(x)
}

/// Solves `a x = b` for symmetric `a`: preconditioned CG from `x = 0`, then a
/// direct LU fallback on breakdown or non-convergence.
pub fn linear_solve(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let pc = match cfg.preconditioner {
        PreconditionerKind::Jacobi => Preconditioner::jacobi(a),
        PreconditionerKind::Cholesky => match CholeskyFactor::new(a) {
            Ok(f) => Preconditioner::Cholesky(Arc::new(f)),
            Err(_) => Preconditioner::jacobi(a),
        },
    };
    solve_with(a, b, None, &pc, cfg)
}

/// Like [`linear_solve`] with a caller-supplied preconditioner and optional
/// initial guess.
pub fn solve_with(
    a: &CsrMatrix,
    b: &[f64],
    guess: Option<&[f64]>,
    pc: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::invalid(format!(
            "right-hand side has length {} but the matrix has dimension {}",
            b.len(),
            a.dim()
        )));
    }
    let mut x = match guess {
        Some(g) => g.to_vec(),
        None => vec![0.0; a.dim()],
    };
    let max_iter = cfg.linear_max_iter.unwrap_or(10 * a.dim().max(1));
    let out = pcg(a, b, &mut x, pc, cfg.linear_rel_tol, max_iter);
    if out.converged {
        return Ok(x);
    }
    direct_solve(a, b)
}
