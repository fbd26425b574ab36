//! Residual feedforward surrogate for the 32 log10 wave drag coefficients.

pub mod model;
pub mod train;

pub use model::{Activation, Layer, SurrogateModel, FORMAT_VERSION, INPUTS, OUTPUTS};
pub use train::{r_squared, train, train_with_dims, EpochStats, TrainingConfig, TrainingReport};
