//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Incompatible matrix or signal dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix expected to be symmetric exceeded the symmetry tolerance.
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,

    /// The lower-right block of a Schur complement is numerically singular.
    #[error("singular lower-right block in Schur complement")]
    SingularBlock,

    /// A matrix expected to be positive semidefinite is indefinite.
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    /// A matrix expected to be positive definite is not.
    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPd(f64),

    /// The defining matrix of a QMI set is singular, so no dual exists.
    #[error("QMI matrix is singular; dual undefined")]
    SingularPsi,

    /// A QMI set failed the regularity conditions required by the operation.
    #[error("QMI set is not regular (lower-right block must be negative definite, Schur complement positive definite)")]
    NotRegular,

    /// A projection matrix is rank-deficient.
    #[error("projection matrix is rank deficient")]
    RankDeficientProjector,

    /// A candidate point is not a member of the QMI set.
    #[error("candidate is not a member of the QMI set (residual min eigenvalue {0:.3e})")]
    NotAMember(f64),

    /// The constructive lift encountered a numerically degenerate factor.
    #[error("lift failed: numerically degenerate factor ({0})")]
    LiftDegenerate(String),

    /// A truncation order falls inside a singular-value multiplicity group.
    #[error("order {r} splits a singular-value multiplicity group; nearest admissible orders are {lower} and {upper}")]
    MultiplicitySplit { r: usize, lower: usize, upper: usize },

    /// A model required to be asymptotically stable is not.
    #[error("model is not asymptotically stable (spectral radius {0})")]
    Unstable(f64),

    /// A semidefinite program is infeasible. For informativity checks this is
    /// a valid negative answer, not a fault.
    #[error("semidefinite program infeasible: {0}")]
    Infeasible(String),

    /// The SDP backend failed with the given status.
    #[error("solver failure: {0}")]
    SolverError(String),

    /// A residual gate on an otherwise successful computation failed.
    #[error("residual check failed: {0}")]
    ResidualGate(String),

    /// Invalid experiment configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed CSV input.
    #[error("csv error: {0}")]
    Csv(String),
}
