//! Small dense linear algebra for the WLS solver.
//!
//! Columns are processed in the caller's order through a modified
//! Gram-Schmidt factorization with reorthogonalization. A column whose
//! projection residual falls below `tol` times its own norm is dropped, so
//! pruning is deterministic: among an exactly collinear set, the column
//! processed later loses. Matrices here are at most a few dozen columns, so
//! clarity wins over BLAS-style blocking.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub(crate) struct QrPruned {
    /// Indices of retained columns, in processing order.
    pub kept: Vec<usize>,
    /// Indices of columns dropped as collinear (or identically zero).
    pub dropped: Vec<usize>,
    /// Orthonormal basis of the retained column space.
    pub q: Vec<Vec<f64>>,
    /// Upper-triangular factor: `r[i][j]` for i <= j over retained columns.
    pub r: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Rank-revealing factorization of `cols` in order, dropping collinear columns.
#[allow(clippy::needless_range_loop)]
pub(crate) fn qr_prune(cols: &[Vec<f64>], tol: f64) -> QrPruned {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r: Vec<Vec<f64>> = Vec::new();

    for (j, col) in cols.iter().enumerate() {
        let norm0 = norm(col);
        let mut v = col.clone();
        let k = q.len();
        let mut rj = vec![0.0; k];
        // Two Gram-Schmidt passes; the second mops up cancellation error.
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &v);
                rj[i] += c;
                for (ve, qe) in v.iter_mut().zip(qi) {
                    *ve -= c * qe;
                }
            }
        }
        let resid = norm(&v);
        if norm0 == 0.0 || resid <= tol * norm0 {
            dropped.push(j);
            continue;
        }
        debug_assert_eq!(rj.len(), k);
        rj.push(resid);
        r.push(rj); // r[m] is the m-th column of R, length m + 1
        for ve in v.iter_mut() {
            *ve /= resid;
        }
        q.push(v);
        kept.push(j);
    }

    QrPruned {
        kept,
        dropped,
        q,
        r,
    }
}

impl QrPruned {
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Solve `R beta = Q' y` for the retained columns.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let k = self.rank();
        let qty: Vec<f64> = self.q.iter().map(|qi| dot(qi, y)).collect();
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in (i + 1)..k {
                s -= self.r_at(i, j) * beta[j];
            }
            beta[i] = s / self.r_at(i, i);
        }
        beta
    }

    fn r_at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        // r[j] stores the j-th column of R (length j + 1).
        self.r[j][i]
    }

    /// `(R'R)^{-1}`, i.e. the unscaled coefficient covariance kernel.
    #[allow(clippy::needless_range_loop)]
    pub fn rtr_inverse(&self) -> Vec<Vec<f64>> {
        let k = self.rank();
        // R^{-1} by back substitution, one unit column at a time.
        let mut rinv = vec![vec![0.0; k]; k];
        for col in 0..k {
            let mut x = vec![0.0; k];
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for j in (i + 1)..=col {
                    s -= self.r_at(i, j) * x[j];
                }
                x[i] = s / self.r_at(i, i);
            }
            for (i, xi) in x.into_iter().enumerate() {
                rinv[i][col] = xi;
            }
        }
        // (R'R)^{-1} = R^{-1} R^{-T}
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let mut s = 0.0;
                for l in 0..k {
                    s += rinv[i][l] * rinv[j][l];
                }
                out[i][j] = s;
                out[j][i] = s;
            }
        }
        out
    }
}

/// `a * b * a` for symmetric `a` (the sandwich product).
#[allow(clippy::needless_range_loop)]
pub(crate) fn sandwich(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut ab = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i][l] * b[l][j];
            }
            ab[i][j] = s;
        }
    }
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let mut s = 0.0;
            for l in 0..k {
                s += ab[i][l] * a[l][j];
            }
            // Exact symmetry by construction.
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}
