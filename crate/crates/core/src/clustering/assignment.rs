//! Optimal label matching (Kuhn-Munkres) and clustering accuracy.

use std::collections::BTreeMap;

use crate::error::{Mfc0Error, Result};

/// Minimum-cost perfect assignment on a square cost matrix given as rows.
/// Returns `assign[row] = col`. Shortest augmenting paths with potentials,
/// `O(n^3)`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    // 1-based arrays; index 0 is a virtual column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assign[row_of[j] - 1] = j - 1;
        }
    }
    assign
}

fn index_labels(values: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &v in values {
        let next = ids.len();
        ids.entry(v).or_insert(next);
    }
    (values.iter().map(|v| ids[v]).collect(), ids.len())
}

/// Fraction of samples whose predicted label maps to the true label under
/// the best one-to-one relabeling.
pub fn accuracy(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Mfc0Error::LengthMismatch { labels: labels.len(), truth: truth.len() });
    }
    if labels.is_empty() {
        return Ok(1.0);
    }
    let (pred, np) = index_labels(labels);
    let (gt, nt) = index_labels(truth);
    let size = np.max(nt);
    let mut confusion = vec![vec![0.0; size]; size];
    for (&p, &t) in pred.iter().zip(&gt) {
        confusion[p][t] += 1.0;
    }
    let n = labels.len() as f64;
    let cost: Vec<Vec<f64>> = confusion.iter().map(|row| row.iter().map(|c| n - c).collect()).collect();
    let assign = min_cost_assignment(&cost);
    let matched: f64 = assign.iter().enumerate().map(|(p, &t)| confusion[p][t]).sum();
    Ok(matched / n)
}
