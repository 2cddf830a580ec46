//! Bicycle balancing and riding with continuous torque and displacement actions.

mod dynamics;
mod model;
mod train;

pub use dynamics::{
    bike_step, features, goal_entry_fraction, shaping_reward, sigmoid, sigmoid_policy, ActionBounds, BikeAction,
    BikeState, BikeWeights, FALL_ANGLE, MAX_HANDLEBAR, N_FEATURES, SPEED,
};
pub use model::{build_bicycle_model, Bicycle, BicycleConfig, SigmoidPolicy, INIT_ANGLE, INIT_HEADING, INIT_RATE};
pub use train::{evaluate_rides, train_bicycle, RideOutcome, RideReport, TrainMethod, TrainOptions, TrainReport};
