use thiserror::Error;

/// Errors raised by the models, trainers and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("horizon exceeded: step {step} with horizon {horizon}")]
    Horizon { step: usize, horizon: usize },

    #[error("token {token} outside vocabulary of size {size}")]
    Vocab { token: usize, size: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training diverged during {stage}")]
    Diverged {
        stage: String,
        /// Last parameters that produced a finite loss, in checkpoint text form.
        last_good_checkpoint: Option<String>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
