use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive semidefinite (eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("matrix is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("not a good path: pole order exceeds one (relative residual {residual:e})")]
    NotAGoodPath { residual: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("path is singular at t = {t:e}")]
    PathSingular { t: f64 },

    #[error("rigidity violation: {0}")]
    RigidityViolation(String),

    #[error("not a conjugation family: {0}")]
    NotAConjugationFamily(String),

    #[error("unknown suite '{0}'")]
    UnknownSuite(String),

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
