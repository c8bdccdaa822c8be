//! Lloyd's k-means with farthest-point seeding and seeded restarts.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 300;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// `k x dim` cluster centers.
    pub centers: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols())
        .map(|j| {
            let d = points[(i, j)] - centers[(c, j)];
            d * d
        })
        .sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// First center uniformly at random, then repeatedly the point farthest from
/// its nearest chosen center (smallest index on ties).
fn farthest_point_init(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (n, dim) = points.shape();
    let mut centers = DMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut dist: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let mut pick = 0;
        for i in 1..n {
            if dist[i] > dist[pick] {
                pick = i;
            }
        }
        centers.row_mut(c).copy_from(&points.row(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, k: usize, max_iters: usize, seed: u64) -> KMeansResult {
    let (n, dim) = points.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = farthest_point_init(points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];

    for _ in 0..max_iters {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(points, i, &centers);
            dists[i] = d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut sums = DMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += points.row(i);
            counts[labels[i]] += 1;
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mean = sums.row(c) / count as f64;
                centers.row_mut(c).copy_from(&mean);
            } else {
                // Empty cluster: move it onto the worst-served point.
                let mut far = 0;
                for i in 1..n {
                    if dists[i] > dists[far] {
                        far = i;
                    }
                }
                centers.row_mut(c).copy_from(&points.row(far));
                dists[far] = 0.0;
            }
        }
    }

    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let (c, d) = nearest(points, i, &centers);
        *label = c;
        inertia += d;
    }
    KMeansResult { labels, centers, inertia }
}

/// Clusters the rows of `points` into `k` groups. The restart with the
/// lowest inertia wins; ties go to the earlier restart, so the outcome does
/// not depend on thread scheduling.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, max_iters: usize, seed: u64) -> KMeansResult {
    let n = points.nrows();
    assert!(k >= 1 && k <= n, "k={k} must lie in 1..={n}");
    let runs: Vec<KMeansResult> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(points, k, max_iters, seed.wrapping_add((r as u64).wrapping_mul(SEED_STRIDE))))
        .collect();
    runs.into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart")
}
