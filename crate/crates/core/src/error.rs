use thiserror::Error;

/// Errors raised while validating a problem or running the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Mfc0Error {
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("data matrix is empty ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("total subspace dimension d={d} exceeds min(m={m}, n={n})")]
    DimensionMismatch { d: usize, m: usize, n: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("label vectors differ in length ({labels} vs {truth})")]
    LengthMismatch { labels: usize, truth: usize },

    #[error("NMF input has a negative entry at row {row}, column {col}")]
    NegativeInput { row: usize, col: usize },

    #[error("{matrix} became non-finite at iteration {iteration}")]
    NonFinite {
        matrix: &'static str,
        iteration: usize,
        trace: Vec<f64>,
    },

    #[error("SVD failed to converge")]
    SvdFailed,

    #[error("generator could not produce independent subspaces after {0} attempts")]
    DependentSubspaces(usize),
}

pub type Result<T> = std::result::Result<T, Mfc0Error>;
