//! Error type shared by all modules of the crate.

/// Errors reported by tensor, spectral, feasibility, and construction routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Shapes or lengths of the inputs do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A mode index lies outside `1..=order`.
    #[error("mode {mode} out of range 1..={order}")]
    ModeOutOfRange { mode: usize, order: usize },

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix expected to be Hermitian is not, beyond tolerance.
    #[error("matrix is not Hermitian: max |H[i,j] - conj(H[j,i])| = {max_asym:.3e} exceeds {tol:.3e}")]
    NotHermitian { max_asym: f64, tol: f64 },

    /// A matrix expected to be positive semidefinite has a clearly negative eigenvalue.
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// The Jacobi eigensolver failed to reach its off-diagonal threshold.
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal mass {off:.3e})")]
    EigNonConvergence { sweeps: usize, off: f64 },

    /// An entrywise square root met a negative or non-real entry.
    #[error("entrywise square root of a negative or non-real entry at flat index {index}")]
    NegativeSqrt { index: usize },

    /// The prescribed singular values cannot be realized by the requested routine.
    #[error("infeasible prescription: {0}")]
    InfeasiblePrescription(String),

    /// The barycentric-weight linear program found no nonnegative solution.
    #[error("weight linear program infeasible (phase-1 objective {objective:.3e})")]
    LpInfeasible { objective: f64 },

    /// A degenerate-tensor decomposition could not recover the expected structure.
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    /// An internal invariant that should be unreachable was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
