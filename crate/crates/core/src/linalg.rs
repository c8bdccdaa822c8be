//! Small dense helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `m x d` matrix with orthonormal columns: the Q factor of a Gaussian matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(d <= m, "cannot fit {d} orthonormal columns in dimension {m}");
    let g = DMatrix::from_fn(m, d, |_, _| StandardNormal.sample(rng));
    orthonormalize(g)
}

/// Q factor of a thin QR decomposition with the sign convention `diag(R) >= 0`.
pub fn orthonormalize(a: DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// `max |(A^T A - I)_ij|`.
pub fn max_abs_gram_deviation(a: &DMatrix<f64>) -> f64 {
    let gram = a.transpose() * a;
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Largest absolute entry, zero for an empty matrix.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Entrywise `l1` norm.
pub fn l1_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// Sum of column `l2` norms.
pub fn l21_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.norm()).sum()
}

pub fn all_finite(a: &DMatrix<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Numerical rank: singular values at or above `rel_tol * sigma_max`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let Some((_, sv, _)) = jacobi_svd(a) else {
        return 0;
    };
    let top = sv.iter().copied().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= rel_tol * top).count()
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) V^T` by one-sided (Hestenes) Jacobi rotations,
/// singular values in descending order. `U` is `m x min(m, n)` and `V` is
/// `n x min(m, n)`, both with orthonormal columns even when `A` is rank
/// deficient. Returns `None` for non-finite input or if the sweeps do not
/// settle.
pub fn jacobi_svd(a: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    if !all_finite(a) {
        return None;
    }
    if a.nrows() < a.ncols() {
        let (u, s, v) = jacobi_svd(&a.transpose())?;
        return Some((v, s, u));
    }
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let eps = f64::EPSILON;

    let mut settled = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut u, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            settled = true;
            break;
        }
    }
    if !settled {
        return None;
    }

    let sigma: Vec<f64> = u.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut left = DMatrix::zeros(m, n);
    let mut right = DMatrix::zeros(n, n);
    let mut values = DVector::zeros(n);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        values[k] = sigma[j];
        right.set_column(k, &v.column(j));
        if sigma[j] > f64::MIN_POSITIVE {
            left.set_column(k, &(u.column(j) / sigma[j]));
        } else {
            missing.push(k);
        }
    }
    complete_orthonormal(&mut left, &missing);
    Some((left, values, right))
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Fills the listed (zero) columns with unit vectors orthogonal to every
/// other column, drawing candidates from the standard basis.
fn complete_orthonormal(q: &mut DMatrix<f64>, missing: &[usize]) {
    let m = q.nrows();
    let mut filled: Vec<usize> = (0..q.ncols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < m {
            let mut e = DVector::zeros(m);
            e[candidate] = 1.0;
            candidate += 1;
            // Two passes of Gram-Schmidt for stability.
            for _ in 0..2 {
                for &k in &filled {
                    let proj = q.column(k).dot(&e);
                    e.axpy(-proj, &q.column(k), 1.0);
                }
            }
            let norm = e.norm();
            if norm > 1e-8 {
                q.set_column(j, &(e / norm));
                filled.push(j);
                break;
            }
        }
    }
}
