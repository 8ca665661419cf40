use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("system is unstable (max real eigenvalue {max_real_eig:.6e})")]
    Unstable { max_real_eig: f64 },

    #[error("linear system is numerically singular")]
    SingularSolve,

    #[error("covariance matrix is not physical: {0}")]
    NonPhysicalState(String),

    #[error("covariance integration stalled: residual {residual:.3e} above {tol:.3e} at t_max")]
    IntegrationNoConvergence { residual: f64, tol: f64 },

    #[error("no stable point in sweep")]
    AllUnstable,

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
