use serde::{Deserialize, Serialize};

use super::dynamics::{BikeState, BikeWeights, SPEED};
use super::model::{build_bicycle_model, BicycleConfig};
use crate::rng;
use crate::search::{gradient_ascent, hill_climb, SearchError, SearchReport};
use crate::sim::{draw_scenarios, estimate_value, rollout, DiscountMode, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrainMethod {
    #[default]
    HillClimb,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub method: TrainMethod,
    pub iters: usize,
    /// Standard deviation of hill-climbing proposals.
    pub perturb_scale: f64,
    pub step_size: f64,
    /// Largest Euclidean length of one gradient step.
    pub clamp: f64,
    /// Central-difference step for gradient probes.
    pub grad_step: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            method: TrainMethod::HillClimb,
            iters: 2000,
            perturb_scale: 30.0,
            step_size: 1.0,
            clamp: 1.0,
            grad_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub weights: BikeWeights,
    pub estimate: f64,
    pub evaluations: usize,
    /// `(iteration, estimate)` for every objective evaluation.
    pub trace: Vec<(usize, f64)>,
}

fn discount_mode(config: &BicycleConfig) -> DiscountMode {
    if config.training_mode {
        DiscountMode::Discrete
    } else {
        DiscountMode::ContinuousGoal
    }
}

/// Searches the sigmoid weights on `config.m_scenarios` scenarios of length
/// `config.horizon`, starting from `init` (zero weights if `None`).
///
/// Scenarios come from `child_seed(config.seed, 0)` and the optimizer's own draws from
/// `child_seed(config.seed, 1)`.
pub fn train_bicycle(
    config: &BicycleConfig,
    options: &TrainOptions,
    init: Option<&BikeWeights>,
) -> Result<TrainReport, SimError> {
    let model = build_bicycle_model(config.clone())?;
    let scenarios = draw_scenarios(&model, config.m_scenarios, config.horizon, rng::child_seed(config.seed, 0))?;
    let mode = discount_mode(config);
    let objective = |theta: &[f64]| -> f64 {
        let Some(w) = BikeWeights::from_slice(theta) else {
            return f64::NAN;
        };
        estimate_value(&model, &model.policy(w), &scenarios, config.horizon, mode).map(|e| e.value).unwrap_or(f64::NAN)
    };
    let theta0 = init.copied().unwrap_or_default().to_vec();
    let search = |r: Result<SearchReport<Vec<f64>>, SearchError>| r.map_err(|e| SimError::Domain(e.to_string()));
    let report = match options.method {
        TrainMethod::HillClimb => search(hill_climb(
            objective,
            &theta0,
            options.perturb_scale,
            options.iters,
            rng::child_seed(config.seed, 1),
        ))?,
        TrainMethod::Gradient => search(gradient_ascent(
            objective,
            &theta0,
            options.step_size,
            options.clamp,
            options.iters,
            options.grad_step,
        ))?,
    };
    Ok(TrainReport {
        weights: BikeWeights::from_slice(&report.best_policy).expect("finite weights"),
        estimate: report.best_estimate,
        evaluations: report.evaluations,
        trace: report.trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RideOutcome {
    /// Step at which the bicycle fell.
    pub fall_step: Option<usize>,
    /// Step at which the goal disc was entered.
    pub goal_step: Option<usize>,
    /// Distance ridden until the ride ended (m).
    pub path_length: f64,
    /// Reduction in distance to the goal, or ground gained along +y in training mode (m).
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RideReport {
    pub horizon: usize,
    pub rides: Vec<RideOutcome>,
}

impl RideReport {
    fn fraction(&self, pred: impl Fn(&RideOutcome) -> bool) -> f64 {
        self.rides.iter().filter(|r| pred(r)).count() as f64 / self.rides.len() as f64
    }

    pub fn unfallen_fraction(&self) -> f64 {
        self.fraction(|r| r.fall_step.is_none())
    }

    /// Fraction of rides that fell at or before step `t`.
    pub fn fallen_within(&self, t: usize) -> f64 {
        self.fraction(|r| r.fall_step.is_some_and(|s| s <= t))
    }

    pub fn goal_fraction(&self) -> f64 {
        self.fraction(|r| r.goal_step.is_some())
    }

    pub fn mean_progress(&self) -> f64 {
        self.rides.iter().map(|r| r.progress).sum::<f64>() / self.rides.len() as f64
    }

    /// Median path length over rides that reached the goal.
    pub fn median_goal_path(&self) -> Option<f64> {
        let mut paths: Vec<f64> = self.rides.iter().filter(|r| r.goal_step.is_some()).map(|r| r.path_length).collect();
        if paths.is_empty() {
            return None;
        }
        paths.sort_by(f64::total_cmp);
        let n = paths.len();
        Some(if n % 2 == 1 { paths[n / 2] } else { 0.5 * (paths[n / 2 - 1] + paths[n / 2]) })
    }
}

/// Rides `weights` on `rides` fresh scenarios of `config.horizon` steps drawn from `seed`.
pub fn evaluate_rides(
    config: &BicycleConfig,
    weights: &BikeWeights,
    rides: usize,
    seed: u64,
) -> Result<RideReport, SimError> {
    let model = build_bicycle_model(config.clone())?;
    let h = config.horizon;
    let scenarios = draw_scenarios(&model, rides, h, seed)?;
    let policy = model.policy(*weights);
    let mut outcomes = Vec::with_capacity(rides);
    for sc in &scenarios {
        let tr = rollout(&model, &policy, sc, h, discount_mode(config))?;
        let end = tr.states.iter().position(BikeState::is_terminal).unwrap_or(h);
        let fall_step = tr.states[end].fallen.then_some(end);
        let goal_step = tr.states[end].at_goal.then_some(end);
        let progress = tr.states[1..=end].iter().map(|s| s.progress).sum();
        outcomes.push(RideOutcome { fall_step, goal_step, path_length: end as f64 * SPEED * config.dt, progress });
    }
    Ok(RideReport { horizon: h, rides: outcomes })
}
