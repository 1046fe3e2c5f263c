use thiserror::Error;

/// Failures of a solve. Everything except `Dimension` and `Rank` signals a
/// broken internal guarantee and maps to exit code 3 in the CLI.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("constraint matrix is not of full row rank")]
    Rank,
    #[error("singular Gram matrix in projection")]
    Singular,
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("rational bit size {bits} exceeds cap {cap}")]
    BitSize { bits: u64, cap: u64 },
    #[error("iteration cap {cap} exceeded ({what})")]
    IterationCap { what: &'static str, cap: u64 },
    #[error("instrumentation check failed: {0}")]
    Instrument(String),
}

pub type Result<T, E = SolveError> = std::result::Result<T, E>;
