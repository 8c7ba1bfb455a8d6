//! Neural-network regressor for the success probability over
//! `(phi, zeta, m)`, used to extrapolate the ridge beyond simulated sizes.

mod model;
mod predict;
mod train;

pub use model::{Activation, Dense, SurrogateModel, INPUT_SCALE, MODEL_FORMAT, OUTPUT_SCALE};
pub use predict::{predict_alpha_ml, predict_surface, PredictedSurface};
pub use train::{
    evaluate, grid_training_set, loss_and_gradient, mse, train, train_with_progress, Gradient,
    TrainConfig, TrainReport,
};
