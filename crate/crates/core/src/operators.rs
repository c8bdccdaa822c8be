//! Closed-form sub-solvers used by the alternating loop.
//!
//! * [`procrustes`]: nearest orthonormal-column matrix for `min ||A - D B||_F`.
//! * [`prox_l1`]: entrywise soft threshold.
//! * [`prox_l21`]: column shrinkage.
//! * [`prox_nonneg_l0`]: projection onto nonnegative vectors with at most
//!   `d0` nonzeros (keep the `d0` largest positive entries).

use nalgebra::{DMatrix, DVector};

use crate::error::{Mfc0Error, Result};
use crate::linalg::jacobi_svd;

/// Singular values below this are treated as zero when flagging a
/// non-unique Procrustes solution.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Thin SVD `M = L diag(sigma) R^T` with singular values in descending order.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub l: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub r: DMatrix<f64>,
}

/// Thin SVD of an arbitrary finite matrix.
pub fn thin_svd(m: &DMatrix<f64>) -> Result<SvdTriple> {
    let (l, sigma, r) = jacobi_svd(m).ok_or(Mfc0Error::SvdFailed)?;
    Ok(SvdTriple { l, sigma, r })
}

/// Output of [`procrustes`].
#[derive(Debug, Clone)]
pub struct ProcrustesSolution {
    pub d: DMatrix<f64>,
    /// Set when `A B^T` has a singular value below [`RANK_TOLERANCE`]; the
    /// minimizer is then not unique.
    pub rank_deficient: bool,
}

/// Solves `min_D ||A - D B||_F^2` subject to `D^T D = I` via the SVD of the
/// `m x d` product `A B^T`: `D = L R^T`.
pub fn procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<ProcrustesSolution> {
    if a.ncols() != b.ncols() {
        return Err(Mfc0Error::ShapeMismatch(format!(
            "A has {} columns but B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let (m, d) = (a.nrows(), b.nrows());
    if d > m {
        return Err(Mfc0Error::DimensionMismatch { d, m, n: a.ncols() });
    }
    let product = a * b.transpose();
    let svd = thin_svd(&product)?;
    let rank_deficient = svd.sigma.iter().any(|&s| s < RANK_TOLERANCE);
    Ok(ProcrustesSolution { d: &svd.l * svd.r.transpose(), rank_deficient })
}

/// Entrywise `sign(g) * max(|g| - tau, 0)`.
pub fn prox_l1(g: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    debug_assert!(tau >= 0.0);
    g.map(|v| soft_threshold(v, tau))
}

#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Column shrinkage: `(1 - tau / ||g_i||) g_i` when `||g_i|| >= tau`, else zero.
pub fn prox_l21(g: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    debug_assert!(tau >= 0.0);
    let mut out = g.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm >= tau && norm > 0.0 {
            col *= 1.0 - tau / norm;
        } else {
            col.fill(0.0);
        }
    }
    out
}

/// Keeps the `d0` largest positive entries of `u` in place and zeroes the rest.
///
/// Ties prefer the smaller index. When fewer than `d0` entries are positive
/// all of them are kept, so the result may have fewer than `d0` nonzeros.
pub fn prox_nonneg_l0(u: &[f64], d0: usize) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    prox_nonneg_l0_into(u, d0, &mut out);
    out
}

/// Allocation-free form of [`prox_nonneg_l0`]; `out` must have `u.len()` slots.
pub fn prox_nonneg_l0_into(u: &[f64], d0: usize, out: &mut [f64]) {
    assert_eq!(u.len(), out.len(), "output length must match input length");
    out.fill(0.0);
    let mut positive: Vec<usize> = (0..u.len()).filter(|&i| u[i] > 0.0).collect();
    if positive.len() > d0 {
        // Descending value, then ascending index.
        let by_rank = |&a: &usize, &b: &usize| u[b].total_cmp(&u[a]).then(a.cmp(&b));
        if d0 > 0 {
            positive.select_nth_unstable_by(d0 - 1, by_rank);
        }
        positive.truncate(d0);
    }
    for i in positive {
        out[i] = u[i];
    }
}

/// Applies [`prox_nonneg_l0`] to every column of `u`.
pub fn prox_nonneg_l0_columns(u: &DMatrix<f64>, d0: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(u.nrows(), u.ncols());
    for (src, mut dst) in u.column_iter().zip(out.column_iter_mut()) {
        prox_nonneg_l0_into(src.as_slice(), d0, dst.as_mut_slice());
    }
    out
}
