//! Optimizers over scenario-based value estimates.
//!
//! The estimator handed to every optimizer is a fixed deterministic function of the
//! policy (its scenarios are drawn once, before the search starts), so comparisons
//! between candidates are never confounded by fresh sampling noise.

use rayon::prelude::*;

use crate::rng;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("policy class is empty")]
    EmptyClass,
    #[error("objective is not finite ({value}) at probe {index} of the gradient stencil")]
    NonFiniteProbe { index: usize, value: f64 },
    #[error("invalid search parameter: {0}")]
    Domain(String),
}

/// Finite policy class enumerable by index.
pub trait PolicyClass: Sync {
    type Policy: Send;
    fn len(&self) -> usize;
    fn policy(&self, index: usize) -> Self::Policy;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport<P> {
    pub best_policy: P,
    pub best_estimate: f64,
    /// Number of full objective evaluations, including gradient probes.
    pub evaluations: usize,
    /// `(iteration or class index, estimate)` for every value actually computed.
    pub trace: Vec<(usize, f64)>,
    /// Successive accepted iterates (parameter optimizers only).
    pub path: Vec<P>,
    /// Set when gradient ascent stopped on a zero gradient.
    pub converged: bool,
}

fn argmax_in_order(values: impl IntoIterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Evaluates every policy in the class and returns the argmax; ties go to the lowest
/// class index. Evaluations run in parallel, the reduction runs in index order.
pub fn exhaustive_search<C, F>(estimator: F, class: &C) -> Result<SearchReport<C::Policy>, SearchError>
where
    C: PolicyClass,
    F: Fn(&C::Policy) -> f64 + Sync,
{
    if class.is_empty() {
        return Err(SearchError::EmptyClass);
    }
    let values: Vec<f64> = (0..class.len()).into_par_iter().map(|i| estimator(&class.policy(i))).collect();
    let trace: Vec<(usize, f64)> = values.into_iter().enumerate().collect();
    let (best, best_estimate) = argmax_in_order(trace.iter().copied()).ok_or(SearchError::EmptyClass)?;
    Ok(SearchReport {
        best_policy: class.policy(best),
        best_estimate,
        evaluations: trace.len(),
        trace,
        path: Vec::new(),
        converged: false,
    })
}

/// Exhaustive search with a pruning estimator.
///
/// `estimator(policy, threshold)` must return the exact estimate, or `None` only when
/// it has proved the estimate is strictly below `threshold`. The class is processed
/// in fixed-size index blocks; the threshold for a block is the best value found in
/// earlier blocks (after the optional `warm_start` index), so the set of pruned
/// policies, the trace and the result are independent of the thread schedule. The
/// argmax and its tie-breaking coincide with [`exhaustive_search`].
pub fn exhaustive_search_pruned<C, F>(
    estimator: F,
    class: &C,
    warm_start: Option<usize>,
) -> Result<SearchReport<C::Policy>, SearchError>
where
    C: PolicyClass,
    F: Fn(&C::Policy, f64) -> Option<f64> + Sync,
{
    const BLOCK: usize = 1024;
    let n = class.len();
    if n == 0 {
        return Err(SearchError::EmptyClass);
    }
    let mut threshold = f64::NEG_INFINITY;
    let mut evaluations = 0;
    if let Some(w) = warm_start.filter(|&w| w < n) {
        if let Some(v) = estimator(&class.policy(w), f64::NEG_INFINITY) {
            threshold = v;
        }
        evaluations += 1;
    }
    let mut trace = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let block: Vec<Option<f64>> =
            (start..end).into_par_iter().map(|i| estimator(&class.policy(i), threshold)).collect();
        for (offset, v) in block.into_iter().enumerate() {
            if let Some(v) = v {
                evaluations += 1;
                trace.push((start + offset, v));
                if v > threshold {
                    threshold = v;
                }
            }
        }
        start = end;
    }
    let (best, best_estimate) = argmax_in_order(trace.iter().copied()).ok_or(SearchError::EmptyClass)?;
    Ok(SearchReport {
        best_policy: class.policy(best),
        best_estimate,
        evaluations,
        trace,
        path: Vec::new(),
        converged: false,
    })
}

/// Central-difference gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn numerical_gradient<F>(mut f: F, theta: &[f64], step: f64) -> Result<Vec<f64>, SearchError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(SearchError::Domain(format!("gradient step must be positive, got {step}")));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        probe[i] = theta[i] + step;
        let up = f(&probe);
        probe[i] = theta[i] - step;
        let down = f(&probe);
        probe[i] = theta[i];
        for (k, v) in [(2 * i, up), (2 * i + 1, down)] {
            if !v.is_finite() {
                return Err(SearchError::NonFiniteProbe { index: k, value: v });
            }
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Gradient ascent with a bounded step.
///
/// `theta <- theta + min(step_size * |g|, clamp) * g / |g|` with `g` the numerical
/// gradient. Returns the best iterate seen, which need not be the last one. Stops
/// early, with `converged = true`, when the gradient vanishes.
pub fn gradient_ascent<F>(
    mut estimator: F,
    theta0: &[f64],
    step_size: f64,
    clamp: f64,
    iters: usize,
    grad_step: f64,
) -> Result<SearchReport<Vec<f64>>, SearchError>
where
    F: FnMut(&[f64]) -> f64,
{
    if iters == 0 {
        return Err(SearchError::Domain("iters must be at least 1".into()));
    }
    if !(clamp > 0.0) || !(step_size > 0.0) {
        return Err(SearchError::Domain("step_size and clamp must be positive".into()));
    }
    let mut theta = theta0.to_vec();
    let mut value = estimator(&theta);
    let mut evaluations = 1;
    let mut trace = vec![(0, value)];
    let mut path = vec![theta.clone()];
    let (mut best, mut best_estimate) = (theta.clone(), value);
    let mut converged = false;

    for k in 1..=iters {
        let grad = numerical_gradient(&mut estimator, &theta, grad_step)?;
        evaluations += 2 * theta.len();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            converged = true;
            break;
        }
        let len = (step_size * norm).min(clamp);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t += len * g / norm;
        }
        value = estimator(&theta);
        evaluations += 1;
        trace.push((k, value));
        path.push(theta.clone());
        if value > best_estimate {
            best_estimate = value;
            best = theta.clone();
        }
    }

    Ok(SearchReport { best_policy: best, best_estimate, evaluations, trace, path, converged })
}

/// Random-perturbation hill climbing.
///
/// Proposes `theta + perturb_scale * u` with `u` a seeded standard-normal vector and
/// accepts iff the estimate strictly improves.
pub fn hill_climb<F>(
    mut estimator: F,
    theta0: &[f64],
    perturb_scale: f64,
    iters: usize,
    seed: u64,
) -> Result<SearchReport<Vec<f64>>, SearchError>
where
    F: FnMut(&[f64]) -> f64,
{
    if iters == 0 {
        return Err(SearchError::Domain("iters must be at least 1".into()));
    }
    let mut gen = rng::stream(seed, 0);
    let mut theta = theta0.to_vec();
    let mut value = estimator(&theta);
    let mut trace = vec![(0, value)];
    let mut path = vec![theta.clone()];
    let mut proposal = theta.clone();
    for k in 1..=iters {
        for (p, t) in proposal.iter_mut().zip(&theta) {
            *p = t + perturb_scale * rng::standard_normal(&mut gen);
        }
        let v = estimator(&proposal);
        trace.push((k, v));
        if v > value {
            value = v;
            theta.copy_from_slice(&proposal);
            path.push(theta.clone());
        }
    }
    Ok(SearchReport { best_policy: theta, best_estimate: value, evaluations: iters + 1, trace, path, converged: false })
}
