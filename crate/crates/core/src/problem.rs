//! Problem definition: the data matrix, the subspace layout and the solver
//! configuration, plus the state and result containers shared by the solver
//! and the downstream tasks.
//!
//! Samples are stored as columns, so a data matrix is `m x n` with `m` the
//! feature dimension and `n` the number of samples.

use nalgebra::DMatrix;

use crate::error::{Mfc0Error, Result};

/// Observed samples, one per column. Entries are finite and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = values.shape();
        if rows == 0 || cols == 0 {
            return Err(Mfc0Error::EmptyMatrix { rows, cols });
        }
        // Column-major storage: index -> (index % rows, index / rows).
        for (idx, &v) in values.iter().enumerate() {
            let (row, col) = (idx % rows, idx / rows);
            if !v.is_finite() {
                return Err(Mfc0Error::NonFiniteEntry { row, col });
            }
            if v < 0.0 {
                return Err(Mfc0Error::NegativeEntry { row, col, value: v });
            }
        }
        Ok(Self(values))
    }

    /// Shifts every entry by the global minimum when it is negative, then
    /// validates. Used by the CLI preprocessing flag only.
    pub fn min_shifted(mut values: DMatrix<f64>) -> Result<Self> {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min.is_finite() && min < 0.0 {
            values.add_scalar_mut(-min);
        }
        Self::new(values)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Feature dimension `m`.
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    /// Sample count `n`.
    pub fn cols(&self) -> usize {
        self.0.ncols()
    }
}

/// `K` subspaces of equal dimension `d0`; the basis has `d = K * d0` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceSpec {
    pub k: usize,
    pub d0: usize,
}

impl SubspaceSpec {
    pub fn new(k: usize, d0: usize) -> Result<Self> {
        if k == 0 || d0 == 0 {
            return Err(Mfc0Error::BadConfig(format!(
                "K and d0 must be positive (got K={k}, d0={d0})"
            )));
        }
        Ok(Self { k, d0 })
    }

    pub fn d(&self) -> usize {
        self.k * self.d0
    }
}

/// Regularizer applied to the error matrix `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// Entrywise `l1`, for randomly corrupted entries.
    L1,
    /// Column `l2,1`, for sample-specific outliers.
    L21,
    /// Clean data: `E` stays zero.
    #[default]
    None,
}

impl ErrorNorm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorNorm::L1 => "l1",
            ErrorNorm::L21 => "l21",
            ErrorNorm::None => "none",
        }
    }
}

impl std::str::FromStr for ErrorNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(ErrorNorm::L1),
            "l21" | "l2,1" => Ok(ErrorNorm::L21),
            "none" => Ok(ErrorNorm::None),
            other => Err(format!("unknown error norm '{other}' (expected l1, l21, none)")),
        }
    }
}

/// How the quadratic penalty `beta` follows the step size `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaPolicy {
    #[default]
    TiedToMu,
    Fixed(f64),
}

/// Closed form used for the `Y` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YUpdateRule {
    /// `(1 + beta)^-1 (X^T (Z - E) + beta V - P)`, as printed.
    PaperLiteral,
    /// `(2 + beta)^-1 (2 X^T (Z - E) + beta V - P)`, the exact minimizer.
    #[default]
    ExactStationarity,
}

impl YUpdateRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            YUpdateRule::PaperLiteral => "paper",
            YUpdateRule::ExactStationarity => "exact",
        }
    }
}

impl std::str::FromStr for YUpdateRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "paper-literal" => Ok(YUpdateRule::PaperLiteral),
            "exact" | "exact-stationarity" => Ok(YUpdateRule::ExactStationarity),
            other => Err(format!("unknown Y update rule '{other}' (expected paper, exact)")),
        }
    }
}

/// Solver hyperparameters. Defaults follow the published algorithm
/// (`mu0 = 1e-3`, `rho = 1.2`, `mu_max = 1e3`, `epsilon = 1e-4`).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub error_norm: ErrorNorm,
    pub mu0: f64,
    pub rho: f64,
    pub mu_max: f64,
    pub epsilon: f64,
    pub beta_policy: BetaPolicy,
    pub max_iters: usize,
    pub y_update_rule: YUpdateRule,
    /// Start from `Y = X^T Z` instead of zero.
    pub warm_start: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            error_norm: ErrorNorm::None,
            mu0: 1e-3,
            rho: 1.2,
            mu_max: 1e3,
            epsilon: 1e-4,
            beta_policy: BetaPolicy::TiedToMu,
            max_iters: 1000,
            y_update_rule: YUpdateRule::ExactStationarity,
            warm_start: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Mfc0Error::BadConfig(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad(format!("rho must exceed 1, got {}", self.rho));
        }
        if !(self.mu_max >= self.mu0 && self.mu_max.is_finite()) {
            return bad(format!("mu_max ({}) must be >= mu0 ({})", self.mu_max, self.mu0));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if let BetaPolicy::Fixed(b) = self.beta_policy {
            if !(b > 0.0 && b.is_finite()) {
                return bad(format!("fixed beta must be positive, got {b}"));
            }
        }
        Ok(())
    }

    /// Penalty to use for a given step size.
    pub fn beta_for(&self, mu: f64) -> f64 {
        match self.beta_policy {
            BetaPolicy::TiedToMu => mu,
            BetaPolicy::Fixed(b) => b,
        }
    }
}

/// A data matrix, subspace layout and configuration that passed validation.
#[derive(Debug, Clone)]
pub struct Problem {
    data: DataMatrix,
    spec: SubspaceSpec,
    config: SolverConfig,
}

impl Problem {
    pub fn data(&self) -> &DataMatrix {
        &self.data
    }

    pub fn z(&self) -> &DMatrix<f64> {
        self.data.values()
    }

    pub fn spec(&self) -> SubspaceSpec {
        self.spec
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.config.seed = seed;
        self
    }
}

/// Checks every invariant of the inputs and returns a handle the solver accepts.
pub fn validate_problem(z: DMatrix<f64>, spec: SubspaceSpec, cfg: SolverConfig) -> Result<Problem> {
    let data = DataMatrix::new(z)?;
    validate_data_problem(data, spec, cfg)
}

/// Same as [`validate_problem`] for an already validated data matrix.
pub fn validate_data_problem(data: DataMatrix, spec: SubspaceSpec, cfg: SolverConfig) -> Result<Problem> {
    let spec = SubspaceSpec::new(spec.k, spec.d0)?;
    cfg.validate()?;
    let (m, n) = (data.rows(), data.cols());
    if spec.d() > m.min(n) {
        return Err(Mfc0Error::DimensionMismatch { d: spec.d(), m, n });
    }
    Ok(Problem { data, spec, config: cfg })
}

/// The solver's live variables.
#[derive(Debug, Clone)]
pub struct FactorState {
    /// Basis, `m x d`, orthonormal columns.
    pub x: DMatrix<f64>,
    /// Representation, `d x n`.
    pub y: DMatrix<f64>,
    /// Nonnegative column-sparse copy of `Y`, `d x n`.
    pub v: DMatrix<f64>,
    /// Error, `m x n`.
    pub e: DMatrix<f64>,
    /// Multiplier for `Y = V`, `d x n`.
    pub p: DMatrix<f64>,
    pub mu: f64,
    pub beta: f64,
}

/// Value of the model objective `||Z - XY - E||_F^2 + lambda ||E||`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub fit_term: f64,
    pub reg_term: f64,
    pub total: f64,
}

impl Objective {
    pub fn new(fit_term: f64, reg_term: f64) -> Self {
        Self { fit_term, reg_term, total: fit_term + reg_term }
    }
}

/// Output of a solver run.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub e: DMatrix<f64>,
    /// One entry per completed iteration.
    pub objective_trace: Vec<Objective>,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    /// True iff the stopping test fired before `max_iters`.
    pub converged: bool,
    /// Iterations whose basis update saw a near-singular `(Z - E) Y^T`.
    pub rank_deficient_updates: usize,
}

impl FitResult {
    pub fn final_objective(&self) -> Option<Objective> {
        self.objective_trace.last().copied()
    }
}
