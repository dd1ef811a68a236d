use thiserror::Error;

/// Errors produced by model construction, simulation and experiment plumbing.
#[derive(Debug, Error)]
pub enum KinError {
    /// Invalid model parameters or violated convexity conditions.
    #[error("model error: {0}")]
    Model(String),

    /// Dimension or size mismatch between inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid experiment / CLI configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical failure: blow-up, non-convergence, singular matrix.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KinError>;

impl KinError {
    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            KinError::Config(_) => 2,
            KinError::Model(_) | KinError::Dimension(_) => 2,
            KinError::Numerical(_) => 3,
            KinError::Io(_) => 3,
        }
    }
}
