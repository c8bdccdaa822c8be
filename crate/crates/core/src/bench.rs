//! Synthetic benchmarks: union-of-subspaces generators, error injection,
//! subspace-dimension estimation, accuracy-vs-error sweeps and timing.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{baseline_cluster, nmf_fit, pca_fit};
use crate::clustering::{accuracy, affinity, normalized_cut};
use crate::error::{Mfc0Error, Result};
use crate::linalg::{numerical_rank, orthonormalize, random_orthonormal};
use crate::problem::{validate_problem, DataMatrix, ErrorNorm, SolverConfig, SubspaceSpec};
use crate::solver::fit;

/// Relative singular-value threshold used by [`estimate_d0`].
pub const DEFAULT_RANK_THRESHOLD: f64 = 0.05;
/// Fraction of entries hit inside each corrupted column.
pub const CORRUPTED_ENTRY_FRACTION: f64 = 0.1;
const MAX_GENERATION_ATTEMPTS: usize = 20;
const CORRUPTION_SALT: u64 = 0x5EED_C0DE_0000_0001;
const COLUMN_STRIDE: u64 = 0xD1B5_4A32_D192_ED03;

/// How the chain of subspace bases `U_{k+1} = T U_k` is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisKind {
    /// `T` a random permutation, `U_1` nonnegative with disjoint column
    /// supports. Data are nonnegative without any shift.
    #[default]
    PermutationChain,
    /// `T` a random rotation, `U_1` a random orthonormal frame, followed by
    /// a global min-shift. The shift adds a shared direction to every
    /// subspace, so the stacked data has rank `K d0 + 1`.
    RotationChain,
}

impl BasisKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PermutationChain => "permutation",
            Self::RotationChain => "rotation",
        }
    }
}

impl FromStr for BasisKind {
    type Err = Mfc0Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(Self::PermutationChain),
            "rotation" => Ok(Self::RotationChain),
            other => Err(Mfc0Error::BadConfig(format!("unknown basis kind '{other}'"))),
        }
    }
}

/// Error model applied after generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorKind {
    #[default]
    None,
    /// 10% of the entries of each selected column get `Uniform[0, magnitude)`
    /// added. Magnitude is absolute and defaults to the largest clean entry.
    RandomCorruption,
    /// Each selected column gets a random nonnegative vector added whose norm
    /// is `magnitude` times the mean clean column norm (default 1).
    SampleOutlier,
    /// Each selected column is replaced by a random nonnegative vector of norm
    /// `magnitude` times the mean clean column norm (default 1).
    ReplacementOutlier,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::RandomCorruption => "corruption",
            Self::SampleOutlier => "outlier",
            Self::ReplacementOutlier => "replacement",
        }
    }
}

impl FromStr for ErrorKind {
    type Err = Mfc0Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "corruption" => Ok(Self::RandomCorruption),
            "outlier" => Ok(Self::SampleOutlier),
            "replacement" => Ok(Self::ReplacementOutlier),
            other => Err(Mfc0Error::BadConfig(format!("unknown error kind '{other}'"))),
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub k: usize,
    pub d0: usize,
    pub ambient_dim: usize,
    pub per_subspace: usize,
    pub seed: u64,
    pub basis: BasisKind,
    pub error_kind: ErrorKind,
    pub error_ratio: f64,
    /// `None` picks the per-kind default documented on [`ErrorKind`].
    pub error_magnitude: Option<f64>,
}

impl SynthConfig {
    /// Five 10-dimensional subspaces in `R^100`, 100 samples each.
    pub fn highdim(seed: u64) -> Self {
        Self {
            k: 5,
            d0: 10,
            ambient_dim: 100,
            per_subspace: 100,
            seed,
            basis: BasisKind::default(),
            error_kind: ErrorKind::None,
            error_ratio: 0.0,
            error_magnitude: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d0 == 0 || self.per_subspace == 0 {
            return Err(Mfc0Error::BadConfig("K, d0 and per-subspace count must be positive".into()));
        }
        if self.k * self.d0 > self.ambient_dim {
            return Err(Mfc0Error::BadConfig(format!(
                "K*d0 = {} exceeds ambient dimension {}",
                self.k * self.d0,
                self.ambient_dim
            )));
        }
        if self.basis == BasisKind::PermutationChain && self.d0 > self.ambient_dim {
            return Err(Mfc0Error::BadConfig("d0 exceeds ambient dimension".into()));
        }
        check_ratio(self.error_ratio)?;
        if let Some(m) = self.error_magnitude {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Mfc0Error::BadConfig(format!("error magnitude must be positive, got {m}")));
            }
        }
        Ok(())
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if (0.0..=1.0).contains(&ratio) {
        Ok(())
    } else {
        Err(Mfc0Error::BadConfig(format!("error ratio must lie in [0, 1], got {ratio}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub z: DataMatrix,
    pub truth: Vec<usize>,
    /// Uncorrupted copy when an error model was applied.
    pub clean: Option<DMatrix<f64>>,
    /// Entries touched by the error model.
    pub error_mask: Option<DMatrix<bool>>,
    /// Generating bases, one `m x d0` block per subspace.
    pub bases: Vec<DMatrix<f64>>,
}

impl LabeledDataset {
    pub fn clean_values(&self) -> &DMatrix<f64> {
        self.clean.as_ref().unwrap_or_else(|| self.z.values())
    }

    /// Columns with at least one flagged entry.
    pub fn corrupted_columns(&self) -> Vec<usize> {
        match &self.error_mask {
            Some(mask) => (0..mask.ncols()).filter(|&c| mask.column(c).iter().any(|&b| b)).collect(),
            None => Vec::new(),
        }
    }
}

fn uniform_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn permutation_chain_seed(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    let dim = cfg.ambient_dim;
    let mut rows: Vec<usize> = (0..dim).collect();
    rows.shuffle(rng);
    let mut u = DMatrix::zeros(dim, cfg.d0);
    // Split the shuffled rows into d0 nearly equal groups.
    let (base, extra) = (dim / cfg.d0, dim % cfg.d0);
    let mut start = 0;
    for j in 0..cfg.d0 {
        let len = base + usize::from(j < extra);
        let group = &rows[start..start + len];
        let w: Vec<f64> = group.iter().map(|_| uniform_open_closed(rng)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (&r, v) in group.iter().zip(w) {
            u[(r, j)] = v / norm;
        }
        start += len;
    }
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);

    let mut bases = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let next = DMatrix::from_fn(dim, cfg.d0, |i, j| u[(perm[i], j)]);
        bases.push(std::mem::replace(&mut u, next));
    }
    bases
}

fn rotation_chain_seed(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    let dim = cfg.ambient_dim;
    let t = orthonormalize(DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>()));
    let mut u = random_orthonormal(dim, cfg.d0, rng);
    let mut bases = Vec::with_capacity(cfg.k);
    for _ in 0..cfg.k {
        let next = &t * &u;
        bases.push(std::mem::replace(&mut u, next));
    }
    bases
}

/// Draws `K` independent `d0`-dimensional subspaces and `per_subspace`
/// samples from each with `Uniform[0, 1)` coefficients, then applies the
/// configured error model.
pub fn gen_subspaces(cfg: &SynthConfig) -> Result<LabeledDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.k * cfg.d0;

    let bases = (0..MAX_GENERATION_ATTEMPTS)
        .map(|_| match cfg.basis {
            BasisKind::PermutationChain => permutation_chain_seed(cfg, &mut rng),
            BasisKind::RotationChain => rotation_chain_seed(cfg, &mut rng),
        })
        .find(|bases| {
            let stacked = DMatrix::from_fn(cfg.ambient_dim, d, |i, j| bases[j / cfg.d0][(i, j % cfg.d0)]);
            numerical_rank(&stacked, 1e-10) == d
        })
        .ok_or(Mfc0Error::DependentSubspaces(MAX_GENERATION_ATTEMPTS))?;

    let n = cfg.k * cfg.per_subspace;
    let mut z = DMatrix::zeros(cfg.ambient_dim, n);
    for (k, u) in bases.iter().enumerate() {
        let coeffs = DMatrix::from_fn(cfg.d0, cfg.per_subspace, |_, _| rng.random::<f64>());
        z.columns_mut(k * cfg.per_subspace, cfg.per_subspace).copy_from(&(u * coeffs));
    }
    let truth: Vec<usize> = (0..n).map(|c| c / cfg.per_subspace).collect();

    let data = match cfg.basis {
        BasisKind::PermutationChain => DataMatrix::new(z)?,
        BasisKind::RotationChain => DataMatrix::min_shifted(z)?,
    };
    let ds = LabeledDataset { z: data, truth, clean: None, error_mask: None, bases };
    if cfg.error_kind == ErrorKind::None {
        return Ok(ds);
    }
    corrupt(&ds, cfg.error_kind, cfg.error_ratio, cfg.error_magnitude, cfg.seed.wrapping_add(CORRUPTION_SALT))
}

/// Three lines in `R^3` along `(0,1,1)`, `(1,0,1)`, `(1,1,0)` (normalized),
/// 50 samples each with `Uniform[0, 1)` coefficients.
pub fn gen_toy3d(seed: u64) -> LabeledDataset {
    const PER_LINE: usize = 50;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let directions = [[0.0, s, s], [s, 0.0, s], [s, s, 0.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 * PER_LINE;
    let mut z = DMatrix::zeros(3, n);
    for c in 0..n {
        let a = rng.random::<f64>();
        for r in 0..3 {
            z[(r, c)] = a * directions[c / PER_LINE][r];
        }
    }
    let bases = directions.iter().map(|d| DMatrix::from_column_slice(3, 1, d)).collect();
    LabeledDataset {
        z: DataMatrix::new(z).expect("toy data is finite and nonnegative"),
        truth: (0..n).map(|c| c / PER_LINE).collect(),
        clean: None,
        error_mask: None,
        bases,
    }
}

fn column_rng(seed: u64, col: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (col as u64 + 1).wrapping_mul(COLUMN_STRIDE))
}

fn random_direction(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Applies an error model to a `ratio` fraction of columns. Columns are taken
/// from a seed-determined permutation, so for a fixed seed the corrupted set
/// at a smaller ratio is contained in the set at a larger one, and a column's
/// noise does not depend on the ratio.
pub fn corrupt(
    ds: &LabeledDataset,
    kind: ErrorKind,
    ratio: f64,
    magnitude: Option<f64>,
    seed: u64,
) -> Result<LabeledDataset> {
    check_ratio(ratio)?;
    if let Some(m) = magnitude {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Mfc0Error::BadConfig(format!("error magnitude must be positive, got {m}")));
        }
    }
    let clean = ds.clean_values().clone();
    let (m, n) = clean.shape();
    let mut z = clean.clone();
    let mut mask = DMatrix::from_element(m, n, false);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let count = if kind == ErrorKind::None { 0 } else { (ratio * n as f64).round() as usize };

    let max_entry = clean.max();
    let mean_norm = clean.column_iter().map(|c| c.norm()).sum::<f64>() / n as f64;
    let entries_per_col = ((CORRUPTED_ENTRY_FRACTION * m as f64).round() as usize).clamp(1, m);

    for &c in &order[..count] {
        let mut rng = column_rng(seed, c);
        match kind {
            ErrorKind::None => {}
            ErrorKind::RandomCorruption => {
                let mag = magnitude.unwrap_or(max_entry);
                let mut rows: Vec<usize> = (0..m).collect();
                rows.shuffle(&mut rng);
                for &r in &rows[..entries_per_col] {
                    z[(r, c)] += mag * rng.random::<f64>();
                    mask[(r, c)] = true;
                }
            }
            ErrorKind::SampleOutlier | ErrorKind::ReplacementOutlier => {
                let scale = magnitude.unwrap_or(1.0) * mean_norm;
                let v = random_direction(m, &mut rng);
                for r in 0..m {
                    let noise = scale * v[r];
                    z[(r, c)] = if kind == ErrorKind::SampleOutlier { z[(r, c)] + noise } else { noise };
                    mask[(r, c)] = true;
                }
            }
        }
    }

    Ok(LabeledDataset {
        z: DataMatrix::new(z)?,
        truth: ds.truth.clone(),
        clean: Some(clean),
        error_mask: Some(mask),
        bases: ds.bases.clone(),
    })
}

/// Number of singular values at least `tau` times the largest.
pub fn estimate_d0(z_class: &DMatrix<f64>, tau: f64) -> usize {
    numerical_rank(z_class, tau)
}

/// Per-class estimates from the columns sharing each label, in label order.
pub fn estimate_d0_per_class(z: &DMatrix<f64>, truth: &[usize], tau: f64) -> Vec<usize> {
    let mut labels: Vec<usize> = truth.to_vec();
    labels.sort_unstable();
    labels.dedup();
    labels
        .iter()
        .map(|&l| {
            let cols: Vec<usize> = (0..truth.len()).filter(|&c| truth[c] == l).collect();
            estimate_d0(&z.select_columns(cols.iter()), tau)
        })
        .collect()
}

/// Median of the per-class estimates (lower middle for even counts).
pub fn median_d0(estimates: &[usize]) -> Option<usize> {
    let mut sorted = estimates.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepKind {
    Corruption,
    Outlier,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Corruption => "corruption",
            Self::Outlier => "outlier",
        }
    }

    pub fn error_kind(&self) -> ErrorKind {
        match self {
            Self::Corruption => ErrorKind::RandomCorruption,
            Self::Outlier => ErrorKind::SampleOutlier,
        }
    }

    /// Error norm matched to the error model.
    pub fn error_norm(&self) -> ErrorNorm {
        match self {
            Self::Corruption => ErrorNorm::L1,
            Self::Outlier => ErrorNorm::L21,
        }
    }
}

impl FromStr for SweepKind {
    type Err = Mfc0Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corruption" => Ok(Self::Corruption),
            "outlier" => Ok(Self::Outlier),
            other => Err(Mfc0Error::BadConfig(format!("unknown sweep kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Mfc0,
    Pca,
    Nmf,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mfc0 => "mfc0",
            Self::Pca => "pca",
            Self::Nmf => "nmf",
        }
    }
}

impl FromStr for Method {
    type Err = Mfc0Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mfc0" => Ok(Self::Mfc0),
            "pca" => Ok(Self::Pca),
            "nmf" => Ok(Self::Nmf),
            other => Err(Mfc0Error::BadConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub kinds: Vec<SweepKind>,
    pub methods: Vec<Method>,
    /// Repetitions per cell; repetition `s` uses data seed `master_seed + s`.
    pub seeds: usize,
    pub master_seed: u64,
    /// Generator settings; its error fields and seed are overridden per cell.
    pub synth: SynthConfig,
    pub lambda_l1: f64,
    pub lambda_l21: f64,
    pub magnitude: Option<f64>,
    pub max_iters: usize,
    pub pca_variance: f64,
    pub nmf_iters: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ratios: (0..=8).map(|i| i as f64 / 10.0).collect(),
            kinds: vec![SweepKind::Corruption, SweepKind::Outlier],
            methods: vec![Method::Mfc0, Method::Pca, Method::Nmf],
            seeds: 5,
            master_seed: 0,
            synth: SynthConfig::highdim(0),
            lambda_l1: 0.5,
            lambda_l21: 1.0,
            magnitude: None,
            max_iters: 1000,
            pca_variance: 0.95,
            nmf_iters: 500,
        }
    }
}

impl SweepConfig {
    pub fn lambda_for(&self, kind: SweepKind) -> f64 {
        match kind {
            SweepKind::Corruption => self.lambda_l1,
            SweepKind::Outlier => self.lambda_l21,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: SweepKind,
    pub ratio: f64,
    pub method: Method,
    pub seed: u64,
    /// `None` when the cell failed; see `error`.
    pub acc: Option<f64>,
    /// Solver iterations (MFC0) or update steps (NMF); zero for PCA.
    pub iters: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Fit + cluster one prepared dataset with one method.
pub fn run_method(
    method: Method,
    ds: &LabeledDataset,
    k: usize,
    d0: usize,
    solver: SolverConfig,
    sweep: &SweepConfig,
) -> Result<(f64, usize)> {
    let z = ds.z.values();
    let seed = solver.seed;
    let (labels, iters) = match method {
        Method::Mfc0 => {
            let problem = validate_problem(z.clone(), SubspaceSpec::new(k, d0)?, solver)?;
            let result = fit(&problem)?;
            (normalized_cut(&affinity(&result.y), k, seed).labels, result.iterations)
        }
        Method::Pca => (baseline_cluster(&pca_fit(z, sweep.pca_variance)?, k, seed), 0),
        Method::Nmf => {
            let model = nmf_fit(z, k * d0, sweep.nmf_iters, seed)?;
            let steps = model.objective_trace.len();
            (baseline_cluster(&model, k, seed), steps)
        }
    };
    Ok((accuracy(&labels, &ds.truth)?, iters))
}

/// Accuracy of every method at every (kind, ratio, seed). Cells run in
/// parallel; rows come back sorted by (kind, ratio, method, seed). Failures
/// are recorded in the row instead of aborting the sweep.
pub fn sweep_error_ratio(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    for &r in &cfg.ratios {
        check_ratio(r)?;
    }
    let mut cells = Vec::new();
    for &kind in &cfg.kinds {
        for (ri, &ratio) in cfg.ratios.iter().enumerate() {
            for s in 0..cfg.seeds {
                cells.push((kind, ri, ratio, cfg.master_seed.wrapping_add(s as u64)));
            }
        }
    }

    let mut rows: Vec<(usize, SweepRow)> = cells
        .into_par_iter()
        .flat_map_iter(|(kind, ri, ratio, seed)| {
            let synth = SynthConfig {
                seed,
                error_kind: kind.error_kind(),
                error_ratio: ratio,
                error_magnitude: cfg.magnitude,
                ..cfg.synth.clone()
            };
            let data = gen_subspaces(&synth);
            cfg.methods
                .iter()
                .map(|&method| {
                    let started = Instant::now();
                    let solver = SolverConfig {
                        lambda: cfg.lambda_for(kind),
                        error_norm: kind.error_norm(),
                        max_iters: cfg.max_iters,
                        seed,
                        ..Default::default()
                    };
                    let outcome = data
                        .as_ref()
                        .map_err(Clone::clone)
                        .and_then(|ds| run_method(method, ds, synth.k, synth.d0, solver, cfg));
                    let seconds = started.elapsed().as_secs_f64();
                    let (acc, iters, error) = match outcome {
                        Ok((acc, iters)) => (Some(acc), iters, None),
                        Err(e) => (None, 0, Some(e.to_string())),
                    };
                    (ri, SweepRow { kind, ratio, method, seed, acc, iters, seconds, error })
                })
                .collect::<Vec<_>>()
        })
        .collect();

    rows.sort_by(|(ra, a), (rb, b)| {
        (a.kind, *ra, a.method, a.seed).cmp(&(b.kind, *rb, b.method, b.seed))
    });
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMean {
    pub kind: SweepKind,
    pub ratio: f64,
    pub method: Method,
    /// Mean over successful seeds; `None` if every seed failed.
    pub mean_acc: Option<f64>,
    pub succeeded: usize,
    pub failed: usize,
}

/// Averages sorted sweep rows per (kind, ratio, method).
pub fn sweep_means(rows: &[SweepRow]) -> Vec<SweepMean> {
    let mut out: Vec<SweepMean> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for row in rows {
        let same = out
            .last()
            .is_some_and(|m| m.kind == row.kind && m.ratio == row.ratio && m.method == row.method);
        if !same {
            out.push(SweepMean {
                kind: row.kind,
                ratio: row.ratio,
                method: row.method,
                mean_acc: None,
                succeeded: 0,
                failed: 0,
            });
            sums.push(0.0);
        }
        let (mean, sum) = (out.last_mut().unwrap(), sums.last_mut().unwrap());
        match row.acc {
            Some(a) => {
                mean.succeeded += 1;
                *sum += a;
            }
            None => mean.failed += 1,
        }
    }
    for (mean, sum) in out.iter_mut().zip(sums) {
        if mean.succeeded > 0 {
            mean.mean_acc = Some(sum / mean.succeeded as f64);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub iters: usize,
    pub total_s: f64,
    pub per_iter_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept, r_squared }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub n_grid: Vec<usize>,
    pub m: usize,
    pub k: usize,
    pub d0: usize,
    pub seed: u64,
    /// Fits per grid point; the fastest per-iteration time is kept.
    pub repeats: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self { n_grid: vec![250, 500, 1000, 2000], m: 100, k: 5, d0: 10, seed: 0, repeats: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    /// Per-iteration seconds against `n`.
    pub fit: LinearFit,
}

/// Wall time of clean-data fits over a grid of sample counts. Runs
/// sequentially so measurements do not compete for cores. Repeats sweep the
/// whole grid in turn, so slow drift in machine speed affects every grid
/// point alike.
pub fn timing_profile(cfg: &TimingConfig) -> Result<TimingReport> {
    if cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Mfc0Error::BadConfig("timing grid must be strictly ascending".into()));
    }
    let problems = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let synth = SynthConfig {
                k: cfg.k,
                d0: cfg.d0,
                ambient_dim: cfg.m,
                per_subspace: (n / cfg.k).max(1),
                ..SynthConfig::highdim(cfg.seed)
            };
            let ds = gen_subspaces(&synth)?;
            validate_problem(
                ds.z.into_inner(),
                SubspaceSpec::new(cfg.k, cfg.d0)?,
                SolverConfig { seed: cfg.seed, ..Default::default() },
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Vec<Option<TimingRow>> = vec![None; problems.len()];
    for _ in 0..cfg.repeats.max(1) {
        for (slot, problem) in best.iter_mut().zip(&problems) {
            let result = fit(problem)?;
            let row = TimingRow {
                n: problem.z().ncols(),
                iters: result.iterations,
                total_s: result.elapsed_seconds,
                per_iter_s: result.elapsed_seconds / result.iterations as f64,
            };
            if slot.as_ref().is_none_or(|b| row.per_iter_s < b.per_iter_s) {
                *slot = Some(row);
            }
        }
    }
    let rows: Vec<TimingRow> = best.into_iter().map(|r| r.expect("at least one repeat")).collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.per_iter_s).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(TimingReport { rows, fit })
}
