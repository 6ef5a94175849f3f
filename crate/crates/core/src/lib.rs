//! Interior point SDP solver working over factor-width cones.
//!
//! The solver replaces the positive semidefinite cone of the program
//!
//! ```text
//! minimize  <A0, X>   subject to   <Ai, X> = b_i  (i = 1..m),   X psd
//! ```
//!
//! by the cone of matrices of factor width `k`, represented as a product of
//! C(n,k) small psd blocks. Each outer iteration rescales the data by the
//! current iterate, runs a predictor or corrector step in block space, and
//! pulls the result back. The relaxation is tightened by the rescaling, so
//! the iterates converge to the optimum of the original program while every
//! per-block computation stays `k x k` and embarrassingly parallel.
//!
//! All numerics are generic over the scalar type via [`Scalar`]; `f64` is the
//! precision the default tolerances are calibrated for.

pub mod error;
pub mod fwcone;
pub mod ipm;
pub mod oracle;
pub mod problem;
mod rng;
pub mod scalar;
pub mod symmat;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use fwcone::{BlockCollection, CombinatorialConstants, SupportIndex};
pub use ipm::{
    solve, solve_with_observer, IterationRecord, Phase, SolveConfig, SolveResult, SolverState,
};
pub use problem::{SdpProblem, SolutionReport, SolveStatus};
pub use symmat::SymMat;

/// Double-precision aliases; the default tolerances assume this instantiation.
pub type SymMat64 = SymMat<f64>;
pub type BlockCollection64 = BlockCollection<f64>;
pub type SdpProblem64 = SdpProblem<f64>;
pub type SolveConfig64 = SolveConfig<f64>;
pub type SolutionReport64 = SolutionReport<f64>;

/// Single-precision aliases for callers that trade accuracy for footprint.
pub type SymMat32 = SymMat<f32>;
pub type BlockCollection32 = BlockCollection<f32>;
pub type SdpProblem32 = SdpProblem<f32>;
pub type SolveConfig32 = SolveConfig<f32>;
