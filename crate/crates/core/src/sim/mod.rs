//! Deterministic simulative models and scenario-based value estimation.
//!
//! A [`SimModel`] exposes its randomness: the transition is a pure function of
//! `(state, action, p)` where `p` is a block of uniform numbers supplied by the caller.
//! Fixing those numbers ahead of time in a [`Scenario`] turns every rollout into a
//! deterministic computation, so the estimate of a policy's value becomes an
//! ordinary deterministic function of the policy.

mod fidelity;
mod inverse_cdf;
mod rollout;
mod scenario;
mod tabular;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

pub use fidelity::{fidelity_check, frequency_check, FidelityReport, OutcomeCheck};
pub use inverse_cdf::InverseCdf;
pub use rollout::{estimate_value, rollout, Estimate, Trajectory};
pub use scenario::{draw_scenarios, fmt17, read_scenarios, write_scenarios, Scenario, StateText};
pub use tabular::{exact_value_tabular, TabularMdp, TabularSimModel};

use crate::rng::SplitMix64;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scenario noise width {found} does not match model noise dimension {expected}")]
    NoiseWidth { expected: usize, found: usize },
    #[error("scenario has {found} noise rows, horizon {needed} requires at least that many")]
    TooFewRows { needed: usize, found: usize },
    #[error("no scenarios to evaluate")]
    EmptyScenarios,
    #[error("continuous-goal discounting requested but the model has no goal fraction")]
    ContinuousGoalUnsupported,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("transition row for state {state}, action {action} sums to {sum}")]
    NonStochasticRow { state: usize, action: usize, sum: f64 },
    #[error("malformed scenario record at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A (PO)MDP given as a deterministic simulative model.
///
/// Implementations must be pure: identical `(state, action, p)` always produce the
/// same successor, and the model is shared read-only across worker threads.
pub trait SimModel: Sync {
    type State: Clone + PartialEq + fmt::Debug + Send + Sync;
    type Action;

    /// Number of uniform numbers consumed per transition.
    fn noise_dim(&self) -> usize;
    fn gamma(&self) -> f64;
    /// Bound on `|reward(s)|`.
    fn r_max(&self) -> f64;
    fn transition(&self, state: &Self::State, action: &Self::Action, p: &[f64]) -> Self::State;
    fn reward(&self, state: &Self::State) -> f64;
    /// Draws an initial state. All draws must come from `rng`.
    fn initial(&self, rng: &mut SplitMix64) -> Self::State;
    fn is_absorbing(&self, state: &Self::State) -> bool;

    /// Fraction of the step `prev -> next` elapsed when the goal region was entered,
    /// or `None` if the step does not enter the goal.
    fn goal_fraction(&self, _prev: &Self::State, _next: &Self::State) -> Option<f64> {
        None
    }

    fn supports_continuous_goal(&self) -> bool {
        false
    }
}

/// Deterministic action rule.
pub trait Policy<S, A> {
    fn action(&self, state: &S) -> A;
}

impl<S, A, F> Policy<S, A> for F
where
    F: Fn(&S) -> A,
{
    fn action(&self, state: &S) -> A {
        self(state)
    }
}

/// How goal entry is rewarded during a rollout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscountMode {
    #[default]
    Discrete,
    /// On the step entering the goal, the reward is `gamma^tau` where `tau` is the
    /// elapsed fraction of that step.
    ContinuousGoal,
}

/// `[1, gamma, gamma^2, ..., gamma^h]`, built by repeated multiplication.
///
/// Every discounted sum in the crate uses these weights so that specialised
/// evaluators reproduce the generic estimator bit for bit.
pub fn discount_weights(gamma: f64, h: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(h + 1);
    let mut g = 1.0;
    for _ in 0..=h {
        w.push(g);
        g *= gamma;
    }
    w
}

/// Smallest `H >= 0` with `gamma^H * r_max / (1 - gamma) <= epsilon / 2`.
///
/// The floating-point estimate `log_gamma(epsilon (1 - gamma) / 2 r_max)` is refined
/// with exact rational arithmetic on the given `f64` inputs, so the returned horizon
/// satisfies the inequality exactly.
pub fn horizon_time(epsilon: f64, gamma: f64, r_max: f64) -> Result<usize, SimError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SimError::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(SimError::Domain(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(SimError::Domain(format!("r_max must be positive, got {r_max}")));
    }

    let exact = |x: f64| BigRational::from_float(x).expect("finite input");
    let (eps, g, r) = (exact(epsilon), exact(gamma), exact(r_max));
    // gamma^h * r / (1 - gamma) <= eps / 2  <=>  2 r gamma^h <= eps (1 - gamma)
    let rhs = &eps * (BigRational::one() - &g);
    let two_r = &r + &r;
    let holds = |h: usize| -> bool {
        let pow = num_traits::pow(g.clone(), h);
        &two_r * pow <= rhs
    };

    let guess = if gamma == 0.0 { 0.0 } else { ((epsilon * (1.0 - gamma) / (2.0 * r_max)).ln() / gamma.ln()).ceil() };
    let mut h = guess.max(0.0).to_usize().unwrap_or(0);
    while !holds(h) {
        h += 1;
    }
    while h > 0 && holds(h - 1) {
        h -= 1;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_examples() {
        // ln(0.01) / ln(0.9) = 43.708...
        assert_eq!(horizon_time(0.2, 0.9, 1.0).unwrap(), 44);
        assert_eq!(horizon_time(1.0, 0.5, 1.0).unwrap(), 2);
        assert_eq!(horizon_time(10.0, 0.5, 1.0).unwrap(), 0);
    }

    #[test]
    fn horizon_domain_errors() {
        assert!(horizon_time(0.1, 1.0, 1.0).is_err());
        assert!(horizon_time(0.0, 0.5, 1.0).is_err());
        assert!(horizon_time(-1.0, 0.5, 1.0).is_err());
        assert!(horizon_time(0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn horizon_gamma_zero() {
        assert_eq!(horizon_time(4.0, 0.0, 1.0).unwrap(), 0);
        assert_eq!(horizon_time(1.0, 0.0, 1.0).unwrap(), 1);
    }

    #[test]
    fn horizon_is_minimal_and_sound_on_grid() {
        for &eps in &[0.01, 0.1, 1.0] {
            for &gamma in &[0.5, 0.9, 0.99] {
                for &r in &[1.0, 10.0] {
                    let h = horizon_time(eps, gamma, r).unwrap();
                    let tail = |k: usize| gamma.powi(k as i32) * r / (1.0 - gamma);
                    assert!(tail(h) <= eps / 2.0 * (1.0 + 1e-12));
                    if h > 0 {
                        assert!(tail(h - 1) > eps / 2.0 * (1.0 - 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn discount_weights_are_running_products() {
        let w = discount_weights(0.5, 3);
        assert_eq!(w, vec![1.0, 0.5, 0.25, 0.125]);
    }
}
