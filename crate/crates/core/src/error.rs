use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("not in U(1,n) up to scale (signature residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("not invertible")]
    NotInvertible,

    #[error("numerical failure: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    #[error("ill-conditioned classification: {0}")]
    IllConditioned(String),

    #[error("undefined at kernel: point {0} is annihilated by the map")]
    UndefinedAtKernel(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty limit-set cloud")]
    EmptyCloud,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
