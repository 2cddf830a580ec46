use nalgebra::{DMatrix, DVector};

use super::{InverseCdf, SimError, SimModel};
use crate::rng::{self, SplitMix64};

const ROW_TOLERANCE: f64 = 1e-12;

/// Explicit finite MDP: sparse transition rows `transitions[s][a] = [(s', prob), ...]`.
///
/// Absorbing states collect their reward once and then self-loop with reward zero,
/// matching the rollout semantics of [`super::rollout`].
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<Vec<Vec<(usize, f64)>>>,
    pub rewards: Vec<f64>,
    pub initial: Vec<(usize, f64)>,
    pub absorbing: Vec<bool>,
}

fn check_row(row: &[(usize, f64)], n_states: usize, state: usize, action: usize) -> Result<(), SimError> {
    let mut sum = 0.0;
    for &(next, p) in row {
        if next >= n_states || !(p >= 0.0) {
            return Err(SimError::NonStochasticRow { state, action, sum: f64::NAN });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(SimError::NonStochasticRow { state, action, sum });
    }
    Ok(())
}

impl TabularMdp {
    pub fn validate(&self) -> Result<(), SimError> {
        let n = self.n_states;
        if self.transitions.len() != n || self.rewards.len() != n || self.absorbing.len() != n {
            return Err(SimError::Domain("per-state tables have inconsistent lengths".into()));
        }
        for (s, rows) in self.transitions.iter().enumerate() {
            if rows.len() != self.n_actions {
                return Err(SimError::Domain(format!("state {s} has {} action rows", rows.len())));
            }
            for (a, row) in rows.iter().enumerate() {
                check_row(row, n, s, a)?;
            }
        }
        check_row(&self.initial, n, usize::MAX, usize::MAX)
    }

    /// Distribution over states after `t` steps under a state-indexed policy.
    pub fn state_distribution(&self, policy: &[usize], t: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.n_states];
        for &(s, p) in &self.initial {
            dist[s] += p;
        }
        for _ in 0..t {
            let mut next = vec![0.0; self.n_states];
            for (s, &mass) in dist.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                if self.absorbing[s] {
                    next[s] += mass;
                    continue;
                }
                for &(s2, p) in &self.transitions[s][policy[s]] {
                    next[s2] += mass * p;
                }
            }
            dist = next;
        }
        dist
    }
}

/// Exact `V(pi) = E_{s0 ~ D}[V^pi(s0)]` for a state-indexed policy.
///
/// With `h = None` the Bellman linear system is solved; with `h = Some(k)` the value of
/// the return truncated after `k` transitions is computed by backward recursion.
pub fn exact_value_tabular(mdp: &TabularMdp, policy: &[usize], gamma: f64, h: Option<usize>) -> Result<f64, SimError> {
    mdp.validate()?;
    if policy.len() != mdp.n_states || policy.iter().any(|&a| a >= mdp.n_actions) {
        return Err(SimError::Domain("policy does not cover the state space".into()));
    }
    let n = mdp.n_states;
    let values = match h {
        Some(steps) => {
            let mut v = mdp.rewards.clone();
            for _ in 0..steps {
                let prev = v.clone();
                for s in 0..n {
                    if mdp.absorbing[s] {
                        continue;
                    }
                    let cont: f64 = mdp.transitions[s][policy[s]].iter().map(|&(s2, p)| p * prev[s2]).sum();
                    v[s] = mdp.rewards[s] + gamma * cont;
                }
            }
            v
        }
        None => {
            let mut a = DMatrix::<f64>::identity(n, n);
            let b = DVector::from_column_slice(&mdp.rewards);
            for s in 0..n {
                if mdp.absorbing[s] {
                    continue;
                }
                for &(s2, p) in &mdp.transitions[s][policy[s]] {
                    a[(s, s2)] -= gamma * p;
                }
            }
            let sol = a.lu().solve(&b).ok_or_else(|| SimError::Domain("Bellman system is singular".into()))?;
            sol.iter().copied().collect()
        }
    };
    Ok(mdp.initial.iter().map(|&(s, p)| p * values[s]).sum())
}

/// Deterministic simulative model of a [`TabularMdp`], one uniform number per step,
/// built from the inverse CDF of every transition row.
#[derive(Debug, Clone)]
pub struct TabularSimModel {
    mdp: TabularMdp,
    gamma: f64,
    rows: Vec<Vec<InverseCdf<usize>>>,
    initial: InverseCdf<usize>,
    r_max: f64,
}

fn positive_part(row: &[(usize, f64)]) -> Vec<(usize, f64)> {
    row.iter().copied().filter(|&(_, p)| p > 0.0).collect()
}

impl TabularSimModel {
    pub fn new(mdp: TabularMdp, gamma: f64) -> Result<Self, SimError> {
        mdp.validate()?;
        let rows = mdp
            .transitions
            .iter()
            .map(|acts| acts.iter().map(|row| InverseCdf::new(positive_part(row))).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let initial = InverseCdf::new(positive_part(&mdp.initial))?;
        let r_max = mdp.rewards.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        Ok(Self { mdp, gamma, rows, initial, r_max })
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }
}

impl SimModel for TabularSimModel {
    type State = usize;
    type Action = usize;

    fn noise_dim(&self) -> usize {
        1
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn transition(&self, state: &usize, action: &usize, p: &[f64]) -> usize {
        *self.rows[*state][*action].sample(p[0])
    }

    fn reward(&self, state: &usize) -> f64 {
        self.mdp.rewards[*state]
    }

    fn initial(&self, rng: &mut SplitMix64) -> usize {
        *self.initial.sample(rng::uniform01(rng))
    }

    fn is_absorbing(&self, state: &usize) -> bool {
        self.mdp.absorbing[*state]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_to_goal() -> TabularMdp {
        TabularMdp {
            n_states: 2,
            n_actions: 1,
            transitions: vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]],
            rewards: vec![-1.0, 0.0],
            initial: vec![(0, 1.0)],
            absorbing: vec![false, true],
        }
    }

    #[test]
    fn one_step_to_absorbing_goal() {
        let mdp = chain_to_goal();
        assert_eq!(exact_value_tabular(&mdp, &[0, 0], 0.9, None).unwrap(), -1.0);
        assert_eq!(exact_value_tabular(&mdp, &[0, 0], 0.9, Some(50)).unwrap(), -1.0);
    }

    #[test]
    fn geometric_self_loop() {
        let mdp = TabularMdp {
            n_states: 1,
            n_actions: 1,
            transitions: vec![vec![vec![(0, 1.0)]]],
            rewards: vec![1.0],
            initial: vec![(0, 1.0)],
            absorbing: vec![false],
        };
        let v = exact_value_tabular(&mdp, &[0], 0.5, None).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        let v10 = exact_value_tabular(&mdp, &[0], 0.5, Some(10)).unwrap();
        assert!((v10 - (2.0 - 0.5f64.powi(10))).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_stochastic_rows() {
        let mut mdp = chain_to_goal();
        mdp.transitions[0][0] = vec![(1, 0.5), (0, 0.4)];
        assert!(matches!(
            exact_value_tabular(&mdp, &[0, 0], 0.9, None),
            Err(SimError::NonStochasticRow { state: 0, action: 0, .. })
        ));
    }

    #[test]
    fn state_distribution_propagates_mass() {
        let mut mdp = chain_to_goal();
        mdp.transitions[0][0] = vec![(0, 0.25), (1, 0.75)];
        let d = mdp.state_distribution(&[0, 0], 2);
        assert!((d[0] - 0.0625).abs() < 1e-15);
        assert!((d[1] - 0.9375).abs() < 1e-15);
    }
}
