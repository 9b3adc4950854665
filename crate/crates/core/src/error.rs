use thiserror::Error;

/// Errors produced by the library.
///
/// Domain failures (disconnected graphs, infeasible searches) are kept apart
/// from malformed input so that front ends can map them to different exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("could not sample a connected graph in {attempts} attempts (n={n}, p={p})")]
    NoConnectedSample { n: usize, p: f64, attempts: usize },

    #[error("automorphism search limited to n <= {limit} nodes (got {n}); supply an explicit orbit partition")]
    GraphTooLarge { n: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("coefficient matrix is not symmetric: {0}")]
    NonSymmetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("infeasible search start: {0}")]
    InfeasibleStart(String),

    #[error("worst-case instance recovery failed: {0}")]
    Recovery(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input or parameters rather than
    /// the problem data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Schema(_)
                | Error::Dimension(_)
                | Error::InvalidParameter(_)
                | Error::InvalidTopology(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
