use thiserror::Error;

#[derive(Debug, Error)]
pub enum WickError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("index {index} outside supported range for {what}")]
    IndexRange { what: String, index: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WickError>;

pub(crate) fn precondition(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(WickError::Precondition(msg()))
    }
}
