//! Block-diagonal views of the representation and per-subspace bases.

use nalgebra::DMatrix;

use super::ClusterWarning;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    /// Column order: samples sorted by label (stable).
    pub col_order: Vec<usize>,
    /// Row order: basis rows sorted by assignment (stable).
    pub row_order: Vec<usize>,
    /// Cluster each row of `Y` belongs to.
    pub row_assignment: Vec<usize>,
    /// `Y[row_order, col_order]`.
    pub permuted: DMatrix<f64>,
    /// Share of `sum |Y|` lying outside the matched row/column blocks.
    pub off_block_mass: f64,
}

/// Assigns each row to the cluster holding most of its `l1` mass (smaller id
/// on ties) and reorders rows and columns by cluster.
pub fn block_view(y: &DMatrix<f64>, labels: &[usize], k: usize) -> BlockView {
    let (d, n) = y.shape();
    assert_eq!(labels.len(), n, "one label per column");
    assert!(labels.iter().all(|&l| l < k), "labels must lie in 0..K");

    let row_assignment: Vec<usize> = (0..d)
        .map(|r| {
            let mut mass = vec![0.0; k];
            for c in 0..n {
                mass[labels[c]] += y[(r, c)].abs();
            }
            let mut best = 0;
            for (cluster, &m) in mass.iter().enumerate() {
                if m > mass[best] {
                    best = cluster;
                }
            }
            best
        })
        .collect();

    let mut col_order: Vec<usize> = (0..n).collect();
    col_order.sort_by_key(|&c| labels[c]);
    let mut row_order: Vec<usize> = (0..d).collect();
    row_order.sort_by_key(|&r| row_assignment[r]);
    let permuted = DMatrix::from_fn(d, n, |i, j| y[(row_order[i], col_order[j])]);

    let mut total = 0.0;
    let mut off = 0.0;
    for c in 0..n {
        for r in 0..d {
            let a = y[(r, c)].abs();
            total += a;
            if row_assignment[r] != labels[c] {
                off += a;
            }
        }
    }
    let off_block_mass = if total > 0.0 { off / total } else { 0.0 };

    BlockView { col_order, row_order, row_assignment, permuted, off_block_mass }
}

/// Columns of `X` grouped by the cluster of the matching row of `Y`. Groups
/// whose size differs from `d0` are returned as-is with a warning.
pub fn extract_bases(
    x: &DMatrix<f64>,
    row_assignment: &[usize],
    k: usize,
    d0: usize,
) -> (Vec<DMatrix<f64>>, Vec<ClusterWarning>) {
    assert_eq!(row_assignment.len(), x.ncols(), "one assignment per basis column");
    let mut bases = Vec::with_capacity(k);
    let mut warnings = Vec::new();
    for cluster in 0..k {
        let cols: Vec<usize> = (0..x.ncols()).filter(|&j| row_assignment[j] == cluster).collect();
        if cols.len() != d0 {
            warnings.push(ClusterWarning::UnbalancedAssignment { cluster, size: cols.len(), expected: d0 });
        }
        bases.push(x.select_columns(cols.iter()));
    }
    (bases, warnings)
}

pub fn reconstruct(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y
}

pub fn errors_view(e: &DMatrix<f64>) -> DMatrix<f64> {
    e.clone()
}
