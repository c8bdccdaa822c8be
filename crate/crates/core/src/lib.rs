//! Robust multi-subspace factorization: `Z ~ XY + E` with an orthonormal
//! basis `X`, sparse nonnegative codes `Y` and a sparse error `E`.
//!
//! ```no_run
//! use mfc0::{bench, fit, validate_problem, SolverConfig, SubspaceSpec};
//!
//! let ds = bench::gen_subspaces(&bench::SynthConfig::highdim(0)).unwrap();
//! let problem = validate_problem(ds.z.into_inner(), SubspaceSpec::new(5, 10).unwrap(), SolverConfig::default()).unwrap();
//! let result = fit(&problem).unwrap();
//! println!("{} iterations", result.iterations);
//! ```

pub mod baselines;
pub mod bench;
pub mod clustering;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod problem;
pub mod solver;

pub use error::{Mfc0Error, Result};
pub use problem::{
    validate_data_problem, validate_problem, BetaPolicy, DataMatrix, ErrorNorm, FactorState, FitResult, Objective,
    Problem, SolverConfig, SubspaceSpec, YUpdateRule,
};
pub use solver::fit;
