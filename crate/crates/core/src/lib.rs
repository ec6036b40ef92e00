//! SeqGAN: adversarial training of an LSTM sequence generator against a
//! convolutional discriminator, with oracle-based evaluation.

pub mod discriminator;
pub mod error;
pub mod generator;
pub mod numerics;
pub mod oracle_eval;
pub mod rollout;
pub mod training;

pub use error::{Error, Result};
