use rayon::prelude::*;

use super::{discount_weights, DiscountMode, Policy, Scenario, SimError, SimModel};

/// States and rewards visited by a policy on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub states: Vec<S>,
    pub rewards: Vec<f64>,
    /// `(t, tau)`: `states[t]` is the first state inside the goal, entered after a
    /// fraction `tau` of the step from `states[t - 1]`. Only set in continuous-goal mode.
    pub goal_step: Option<(usize, f64)>,
}

impl<S> Trajectory<S> {
    /// `sum_t weights[t] * rewards[t]`, summed in step order.
    pub fn discounted_return(&self, weights: &[f64]) -> f64 {
        self.rewards.iter().zip(weights).fold(0.0, |acc, (r, w)| acc + w * r)
    }
}

fn check_shape<M: SimModel>(model: &M, scenario: &Scenario<M::State>, h: usize) -> Result<(), SimError> {
    if h > 0 && scenario.width() != model.noise_dim() {
        return Err(SimError::NoiseWidth { expected: model.noise_dim(), found: scenario.width() });
    }
    if scenario.rows() < h {
        return Err(SimError::TooFewRows { needed: h, found: scenario.rows() });
    }
    Ok(())
}

/// Runs `policy` for `h` transitions on `scenario`.
///
/// Absorbing states self-loop: once `states[t]` is absorbing, every later state equals
/// it and every later reward is zero.
pub fn rollout<M, P>(
    model: &M,
    policy: &P,
    scenario: &Scenario<M::State>,
    h: usize,
    mode: DiscountMode,
) -> Result<Trajectory<M::State>, SimError>
where
    M: SimModel,
    P: Policy<M::State, M::Action> + ?Sized,
{
    if mode == DiscountMode::ContinuousGoal && !model.supports_continuous_goal() {
        return Err(SimError::ContinuousGoalUnsupported);
    }
    check_shape(model, scenario, h)?;

    let gamma = model.gamma();
    let mut states = Vec::with_capacity(h + 1);
    let mut rewards = Vec::with_capacity(h + 1);
    let mut goal_step = None;

    let mut state = scenario.initial_state().clone();
    rewards.push(model.reward(&state));
    let mut absorbed = model.is_absorbing(&state);
    states.push(state.clone());

    for t in 0..h {
        if absorbed {
            states.push(state.clone());
            rewards.push(0.0);
            continue;
        }
        let action = policy.action(&state);
        let next = model.transition(&state, &action, scenario.row(t));
        let mut reward = model.reward(&next);
        if mode == DiscountMode::ContinuousGoal {
            if let Some(tau) = model.goal_fraction(&state, &next) {
                reward = gamma.powf(tau);
                goal_step = Some((t + 1, tau));
            }
        }
        absorbed = model.is_absorbing(&next);
        state = next;
        states.push(state.clone());
        rewards.push(reward);
    }

    Ok(Trajectory { states, rewards, goal_step })
}

/// Scenario-average value estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub per_scenario: Vec<f64>,
}

/// Mean over scenarios of `sum_{t=0}^{h} gamma^t R(s_t)`.
///
/// Rollouts run in parallel; the mean is accumulated in scenario-index order, so
/// the result does not depend on the thread schedule.
pub fn estimate_value<M, P>(
    model: &M,
    policy: &P,
    scenarios: &[Scenario<M::State>],
    h: usize,
    mode: DiscountMode,
) -> Result<Estimate, SimError>
where
    M: SimModel,
    P: Policy<M::State, M::Action> + Sync + ?Sized,
{
    if scenarios.is_empty() {
        return Err(SimError::EmptyScenarios);
    }
    let weights = discount_weights(model.gamma(), h);
    let per_scenario = scenarios
        .par_iter()
        .map(|sc| rollout(model, policy, sc, h, mode).map(|tr| tr.discounted_return(&weights)))
        .collect::<Result<Vec<f64>, SimError>>()?;
    let value = mean_in_order(&per_scenario);
    Ok(Estimate { value, per_scenario })
}

pub(crate) fn mean_in_order(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    for x in xs {
        sum += x;
    }
    sum / xs.len() as f64
}
