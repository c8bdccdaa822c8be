//! Downstream tasks on a fitted factorization: spectral clustering of the
//! samples, accuracy against ground truth, block-diagonal views and
//! per-subspace bases.

mod assignment;
mod block;
pub mod kmeans;
mod spectral;

use std::fmt;

use nalgebra::DMatrix;

pub use assignment::{accuracy, min_cost_assignment};
pub use block::{block_view, errors_view, extract_bases, reconstruct, BlockView};
pub use spectral::{affinity, normalized_cut, NcutResult};

use crate::error::Result;
use crate::problem::FitResult;

/// Non-fatal conditions reported alongside clustering output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClusterWarning {
    DisconnectedGraph { zero_eigenvalues: usize, k: usize },
    UnbalancedAssignment { cluster: usize, size: usize, expected: usize },
}

impl fmt::Display for ClusterWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DisconnectedGraph { zero_eigenvalues, k } => {
                write!(f, "affinity graph has {zero_eigenvalues} zero Laplacian eigenvalues for K={k}")
            }
            Self::UnbalancedAssignment { cluster, size, expected } => {
                write!(f, "cluster {cluster} owns {size} basis columns, expected {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    /// Present only when ground truth was supplied.
    pub accuracy: Option<f64>,
    pub view: BlockView,
    pub bases: Vec<DMatrix<f64>>,
    pub warnings: Vec<ClusterWarning>,
}

/// Normalized cut on `Y^T Y`, then the block view and bases of the fit.
pub fn cluster_fit(fit: &FitResult, k: usize, d0: usize, truth: Option<&[usize]>, seed: u64) -> Result<ClusterResult> {
    let ncut = normalized_cut(&affinity(&fit.y), k, seed);
    let accuracy = truth.map(|t| accuracy(&ncut.labels, t)).transpose()?;
    let view = block_view(&fit.y, &ncut.labels, k);
    let (bases, mut basis_warnings) = extract_bases(&fit.x, &view.row_assignment, k, d0);
    let mut warnings = ncut.warnings;
    warnings.append(&mut basis_warnings);
    Ok(ClusterResult { labels: ncut.labels, accuracy, view, bases, warnings })
}
