//! Reference methods for comparison: PCA at a retained-variance level and
//! Frobenius NMF with multiplicative updates. Both are clustered by k-means
//! on their coefficient columns.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::clustering::kmeans::{kmeans, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
use crate::error::{Mfc0Error, Result};
use crate::operators::thin_svd;

/// Guard added to multiplicative-update denominators.
pub const NMF_EPS: f64 = 1e-12;
/// NMF stops once the relative objective change drops below this.
pub const NMF_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Pca,
    Nmf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    /// `m x r`.
    pub basis: DMatrix<f64>,
    /// `r x n`.
    pub coeffs: DMatrix<f64>,
    /// Fraction of centered variance captured (PCA only).
    pub variance_kept: Option<f64>,
    /// `||Z - WH||_F^2` after each update (NMF only).
    pub objective_trace: Vec<f64>,
}

impl BaselineModel {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// Row-centers `Z` and keeps the fewest principal directions whose
/// cumulative variance reaches `variance`.
pub fn pca_fit(z: &DMatrix<f64>, variance: f64) -> Result<BaselineModel> {
    if !(variance > 0.0 && variance <= 1.0) {
        return Err(Mfc0Error::BadConfig(format!("variance must lie in (0, 1], got {variance}")));
    }
    let n = z.ncols();
    let mean = z.column_mean();
    let mut centered = z.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let svd = thin_svd(&centered)?;
    let energy: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
    let total: f64 = energy.iter().sum();

    let (r, kept) = if total > 0.0 {
        let mut acc = 0.0;
        let mut r = energy.len();
        for (i, e) in energy.iter().enumerate() {
            acc += e;
            if acc >= variance * total {
                r = i + 1;
                break;
            }
        }
        (r, energy[..r].iter().sum::<f64>() / total)
    } else {
        (1, 1.0)
    };

    let basis = svd.l.columns(0, r).into_owned();
    let coeffs = basis.transpose() * &centered;
    debug_assert_eq!(coeffs.ncols(), n);
    Ok(BaselineModel { kind: BaselineKind::Pca, basis, coeffs, variance_kept: Some(kept), objective_trace: Vec::new() })
}

/// Lee-Seung multiplicative updates for `min ||Z - WH||_F^2`, `W, H >= 0`.
pub fn nmf_fit(z: &DMatrix<f64>, r: usize, iters: usize, seed: u64) -> Result<BaselineModel> {
    let (m, n) = z.shape();
    if r == 0 {
        return Err(Mfc0Error::BadConfig("NMF rank must be positive".into()));
    }
    for (idx, &v) in z.iter().enumerate() {
        if v < 0.0 || !v.is_finite() {
            return Err(Mfc0Error::NegativeInput { row: idx % m, col: idx / m });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (z.mean() / r as f64).sqrt().max(NMF_EPS);
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut w = DMatrix::from_fn(m, r, |_, _| scale * unit.sample(&mut rng));
    let mut h = DMatrix::from_fn(r, n, |_, _| scale * unit.sample(&mut rng));

    let mut trace = Vec::with_capacity(iters);
    let mut prev = (z - &w * &h).norm_squared();
    for _ in 0..iters {
        let num_h = w.transpose() * z;
        let den_h = (w.transpose() * &w) * &h;
        h.zip_zip_apply(&num_h, &den_h, |hv, num, den| *hv *= num / (den + NMF_EPS));

        let num_w = z * h.transpose();
        let den_w = &w * (&h * h.transpose());
        w.zip_zip_apply(&num_w, &den_w, |wv, num, den| *wv *= num / (den + NMF_EPS));

        let obj = (z - &w * &h).norm_squared();
        trace.push(obj);
        let change = (prev - obj).abs() / prev.max(f64::MIN_POSITIVE);
        prev = obj;
        if change < NMF_TOLERANCE {
            break;
        }
    }

    Ok(BaselineModel { kind: BaselineKind::Nmf, basis: w, coeffs: h, variance_kept: None, objective_trace: trace })
}

/// k-means on the coefficient columns.
pub fn baseline_cluster(model: &BaselineModel, k: usize, seed: u64) -> Vec<usize> {
    let points = model.coeffs.transpose();
    kmeans(&points, k, DEFAULT_RESTARTS, DEFAULT_MAX_ITERS, seed).labels
}
