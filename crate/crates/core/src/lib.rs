pub mod bicycle;
pub mod gridworld;
pub mod rng;
pub mod search;
pub mod sim;
pub mod theory;
