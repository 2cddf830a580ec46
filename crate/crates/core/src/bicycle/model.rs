use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::dynamics::{
    bike_step, features, goal_entry_fraction, sigmoid_policy, ActionBounds, BikeAction, BikeState, BikeWeights, SPEED,
};
use crate::rng::{self, SplitMix64};
use crate::sim::{Policy, SimError, SimModel};

/// Half-widths of the uniform initial-state distribution.
pub const INIT_ANGLE: f64 = 0.02;
pub const INIT_RATE: f64 = 0.02;
pub const INIT_HEADING: f64 = PI / 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BicycleConfig {
    pub dt: f64,
    pub noise_halfwidth: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Reward per metre of progress towards the goal.
    pub shaping_scale: f64,
    pub fall_penalty: f64,
    pub gamma: f64,
    pub horizon: usize,
    pub m_scenarios: usize,
    pub goal_radius: f64,
    pub goal_distance: f64,
    /// Without a goal: progress is measured along +y and headings against +y.
    pub training_mode: bool,
    pub seed: u64,
}

impl Default for BicycleConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            noise_halfwidth: 0.02,
            tau_min: -2.0,
            tau_max: 2.0,
            nu_min: -0.02,
            nu_max: 0.02,
            shaping_scale: 0.1,
            fall_penalty: -1.0,
            gamma: 0.998,
            horizon: 500,
            m_scenarios: 30,
            goal_radius: 10.0,
            goal_distance: 1000.0,
            training_mode: true,
            seed: 0,
        }
    }
}

impl BicycleConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let err = |msg: String| Err(SimError::Domain(msg));
        let finite = [
            self.dt,
            self.noise_halfwidth,
            self.tau_min,
            self.tau_max,
            self.nu_min,
            self.nu_max,
            self.shaping_scale,
            self.fall_penalty,
            self.gamma,
            self.goal_radius,
            self.goal_distance,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return err("bicycle config values must be finite".into());
        }
        if self.dt <= 0.0 {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        if self.noise_halfwidth < 0.0 {
            return err(format!("noise_halfwidth must be nonnegative, got {}", self.noise_halfwidth));
        }
        if self.tau_min >= self.tau_max || self.nu_min >= self.nu_max {
            return err("action bounds need min < max".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return err(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if self.horizon == 0 || self.m_scenarios == 0 {
            return err("horizon and m_scenarios must be positive".into());
        }
        if !(self.goal_radius > 0.0 && self.goal_distance > self.goal_radius) {
            return err("need 0 < goal_radius < goal_distance".into());
        }
        Ok(())
    }

    pub fn bounds(&self) -> ActionBounds {
        ActionBounds { tau_min: self.tau_min, tau_max: self.tau_max, nu_min: self.nu_min, nu_max: self.nu_max }
    }
}

/// The bicycle as a deterministic simulative model with one uniform number per step.
///
/// Rides start at the origin with the goal at `(0, goal_distance)`. Entering the goal
/// disc earns 1 and falling earns `fall_penalty`; both end the ride. Every other step
/// earns `shaping_scale` times its progress.
#[derive(Debug, Clone, PartialEq)]
pub struct Bicycle {
    config: BicycleConfig,
}

pub fn build_bicycle_model(config: BicycleConfig) -> Result<Bicycle, SimError> {
    config.validate()?;
    Ok(Bicycle { config })
}

impl Bicycle {
    pub fn config(&self) -> &BicycleConfig {
        &self.config
    }

    pub fn goal(&self) -> (f64, f64) {
        (0.0, self.config.goal_distance)
    }

    fn goal_distance_of(&self, s: &BikeState) -> f64 {
        let (gx, gy) = self.goal();
        (s.x - gx).hypot(s.y - gy)
    }

    /// Heading minus the bearing of the goal, wrapped to `(-pi, pi]`.
    pub fn heading_error(&self, s: &BikeState) -> f64 {
        if self.config.training_mode {
            return wrap_angle(s.psi);
        }
        let (gx, gy) = self.goal();
        wrap_angle(s.psi - (gx - s.x).atan2(gy - s.y))
    }

    pub fn features(&self, s: &BikeState) -> [f64; super::N_FEATURES] {
        features(s, self.heading_error(s))
    }

    pub fn policy(&self, weights: BikeWeights) -> SigmoidPolicy<'_> {
        SigmoidPolicy { model: self, weights }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

impl SimModel for Bicycle {
    type State = BikeState;
    type Action = BikeAction;

    fn noise_dim(&self) -> usize {
        1
    }

    fn gamma(&self) -> f64 {
        self.config.gamma
    }

    fn r_max(&self) -> f64 {
        let shaping = self.config.shaping_scale.abs() * SPEED * self.config.dt;
        shaping.max(self.config.fall_penalty.abs()).max(1.0)
    }

    fn transition(&self, state: &BikeState, action: &BikeAction, p: &[f64]) -> BikeState {
        if state.is_terminal() {
            return *state;
        }
        let clamped = BikeAction {
            tau: action.tau.clamp(self.config.tau_min, self.config.tau_max),
            nu: action.nu.clamp(self.config.nu_min, self.config.nu_max),
        };
        let mut next = bike_step(state, &clamped, p[0], self.config.dt, self.config.noise_halfwidth);
        if self.config.training_mode {
            next.progress = next.y - state.y;
        } else {
            next.progress = self.goal_distance_of(state) - self.goal_distance_of(&next);
            next.at_goal = !next.fallen && self.goal_distance_of(&next) <= self.config.goal_radius;
        }
        next
    }

    fn reward(&self, state: &BikeState) -> f64 {
        if state.fallen {
            self.config.fall_penalty
        } else if state.at_goal {
            1.0
        } else {
            self.config.shaping_scale * state.progress
        }
    }

    fn initial(&self, gen: &mut SplitMix64) -> BikeState {
        BikeState {
            omega: rng::uniform_in(gen, -INIT_ANGLE, INIT_ANGLE),
            omega_dot: rng::uniform_in(gen, -INIT_RATE, INIT_RATE),
            theta: rng::uniform_in(gen, -INIT_ANGLE, INIT_ANGLE),
            theta_dot: rng::uniform_in(gen, -INIT_RATE, INIT_RATE),
            psi: rng::uniform_in(gen, -INIT_HEADING, INIT_HEADING),
            ..BikeState::default()
        }
    }

    fn is_absorbing(&self, state: &BikeState) -> bool {
        state.is_terminal()
    }

    fn goal_fraction(&self, prev: &BikeState, next: &BikeState) -> Option<f64> {
        if self.config.training_mode || !next.at_goal || prev.at_goal {
            return None;
        }
        goal_entry_fraction(prev, next, self.goal(), self.config.goal_radius)
    }

    fn supports_continuous_goal(&self) -> bool {
        true
    }
}

/// Sigmoid controller reading the model's features.
#[derive(Debug, Clone, Copy)]
pub struct SigmoidPolicy<'a> {
    model: &'a Bicycle,
    pub weights: BikeWeights,
}

impl Policy<BikeState, BikeAction> for SigmoidPolicy<'_> {
    fn action(&self, state: &BikeState) -> BikeAction {
        sigmoid_policy(&self.weights, &self.model.config.bounds(), &self.model.features(state))
    }
}
