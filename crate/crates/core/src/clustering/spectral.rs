//! Affinity construction and normalized-cut spectral clustering.

use nalgebra::{DMatrix, SymmetricEigen};

use super::kmeans::{kmeans, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
use super::ClusterWarning;

/// Degree assigned to isolated nodes before normalizing.
pub const MIN_DEGREE: f64 = 1e-12;
/// Laplacian eigenvalues below this count as zero when checking connectivity.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

/// `W = max(Y^T Y, 0)`, symmetrized exactly.
pub fn affinity(y: &DMatrix<f64>) -> DMatrix<f64> {
    let g = y.transpose() * y;
    let n = g.nrows();
    DMatrix::from_fn(n, n, |i, j| (0.5 * (g[(i, j)] + g[(j, i)])).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcutResult {
    pub labels: Vec<usize>,
    pub warnings: Vec<ClusterWarning>,
}

/// Bottom-`k` eigenvectors of `I - D^{-1/2} W D^{-1/2}`, rows scaled to unit
/// length, clustered by seeded k-means.
pub fn normalized_cut(w: &DMatrix<f64>, k: usize, seed: u64) -> NcutResult {
    let n = w.nrows();
    assert_eq!(n, w.ncols(), "affinity must be square");
    assert!(k >= 1 && k <= n, "K={k} must lie in 1..={n}");
    if k == 1 {
        return NcutResult { labels: vec![0; n], warnings: Vec::new() };
    }
    if k == n {
        return NcutResult { labels: (0..n).collect(), warnings: Vec::new() };
    }

    let inv_sqrt: Vec<f64> = w
        .row_iter()
        .map(|r| {
            let deg = r.sum();
            1.0 / if deg > 0.0 { deg } else { MIN_DEGREE }.sqrt()
        })
        .collect();
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    });
    let eig = SymmetricEigen::new(lap);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut warnings = Vec::new();
    let zeros = eig.eigenvalues.iter().filter(|&&l| l.abs() < ZERO_EIGENVALUE).count();
    if zeros > k {
        warnings.push(ClusterWarning::DisconnectedGraph { zero_eigenvalues: zeros, k });
    }

    let mut embedding = DMatrix::from_fn(n, k, |i, c| eig.eigenvectors[(i, order[c])]);
    for mut row in embedding.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    let labels = kmeans(&embedding, k, DEFAULT_RESTARTS, DEFAULT_MAX_ITERS, seed).labels;
    NcutResult { labels, warnings }
}
