use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("invalid {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max |M - M^H| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min:.3e}, max {max:.3e})")]
    NotPsd { min: f64, max: f64 },

    #[error("infeasible covariance: {0}")]
    Infeasible(String),

    #[error("solver did not converge after {iterations} iterations (relative gap {gap:.3e}, target {tol:.1e})")]
    SolverFailure { iterations: usize, gap: f64, tol: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverFailure { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
            _ => 2,
        }
    }
}
