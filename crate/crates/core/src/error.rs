//! Error type shared by all modules.

/// Everything that can go wrong across the kernel, cone, solver and I/O layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Matrix has an eigenvalue below the psd tolerance.
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    /// Cholesky pivot failed; the matrix is not positive definite.
    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPd { column: usize, pivot: f64 },

    /// Normal system (or Gram system) has linearly dependent rows.
    #[error("linear system is singular (pivot below tolerance at column {column})")]
    Singular { column: usize },

    /// Incompatible dimensions in problem data.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// Invalid (n, k) pair: requires 2 <= k <= n and k | n.
    #[error("invalid block dimensions: {0}")]
    BadDims(String),

    /// A block of the collection is not strictly inside the psd cone.
    #[error("block collection is not interior (block {block})")]
    NotInterior { block: usize },

    /// Line search was handed a zero direction.
    #[error("line-search direction is zero")]
    ZeroDirection,

    /// Barrier restricted to the search line has no interior minimizer.
    #[error("barrier is monotone along the search direction")]
    MonotoneAlongDirection,

    /// Objective is constant on the feasible set; the iterate is optimal.
    #[error("objective is constant on the feasible set")]
    DegenerateObjective,

    /// Objective decreases forever along the predictor ray.
    #[error("problem is unbounded along the predictor direction")]
    Unbounded,

    /// Neither a user-supplied start nor the identity is strictly feasible.
    #[error("no strictly feasible starting point available")]
    NoStartingPoint,

    /// A documented operation precondition was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed problem or report text.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Matrix entry given with row index larger than column index.
    #[error("asymmetric entry at line {line}: row index exceeds column index")]
    AsymmetricEntry { line: usize },

    /// Configuration value outside its documented range.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
