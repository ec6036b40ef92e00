//! Dense numerics substrate: tensors, nonlinearities, parameter storage,
//! optimizers, seeded RNG, finite-difference checking and checkpoints.

pub mod checkpoint;
pub mod gradcheck;
pub mod ops;
pub mod optim;
pub mod params;
pub mod rng;
pub mod tensor;

pub use gradcheck::{finite_diff_grad, max_relative_error};
pub use ops::{relu, sigmoid, softmax};
pub use optim::{adam_step, apply_step, Optimizer, OptimizerConfig, OptimizerKind};
pub use params::{Param, ParamId, ParameterStore};
pub use rng::Rng;
pub use tensor::{Real, Tensor};
