//! Proximally accelerated randomized coordinate descent for sparse convex
//! problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`sparse`]: immutable dual-indexed sparse matrices, Matrix Market I/O and
//!   the few kernels the solvers need.
//! - [`oracles`]: the first-order [`Oracle`] abstraction with the SoftMax
//!   (LogSumExp) objective, a diagonal quadratic test problem and the
//!   proximal envelope that defines every inner subproblem.
//! - [`solvers`]: the accelerated proximal outer loop driving randomized
//!   coordinate descent, plus GM, FGM, CDM and ACDM baselines.
//! - [`harness`]: instance generators, reference optima and experiment runs
//!   that write CSV traces and a JSON summary.
//!
//! Work is measured in cost units: one unit per stored matrix nonzero that an
//! operation touches. Traces carry both wall time and cost units.

pub mod error;
pub mod harness;
pub mod oracles;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
pub use oracles::{
    EnvelopeOracle, EnvelopeState, Oracle, QuadraticProblem, QuadraticState, SoftMaxCache,
    SoftMaxProblem,
};
pub use solvers::{RunTrace, SolverConfig, SolverKind, SolverRun, TraceRecord};
pub use sparse::SparseMatrix;

/// Dense vectors are plain `Vec<f64>`; slices are used for read-only access.
pub type DenseVector = Vec<f64>;
