use std::fmt;

use super::{SimError, SimModel};
use crate::rng;

/// Observed versus expected frequency for one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeCheck<S> {
    pub outcome: S,
    pub expected: f64,
    pub observed: usize,
    /// Binomial z-score of the observed count.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport<S> {
    pub n: usize,
    pub passed: bool,
    pub outcomes: Vec<OutcomeCheck<S>>,
    /// Outcomes observed outside the reference support, with counts.
    pub unexpected: Vec<(S, usize)>,
}

impl<S: fmt::Debug> fmt::Display for FidelityReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fidelity n={} passed={}", self.n, self.passed)?;
        for o in &self.outcomes {
            writeln!(f, "  {:?}: expected={:.6} observed={} z={:.3}", o.outcome, o.expected, o.observed, o.z)?;
        }
        for (s, c) in &self.unexpected {
            writeln!(f, "  {s:?}: outside reference support, observed={c}")?;
        }
        Ok(())
    }
}

/// Merges duplicate outcomes by summing their probabilities.
fn merge_reference<S: PartialEq + Clone>(reference: &[(S, f64)]) -> Vec<(S, f64)> {
    let mut merged: Vec<(S, f64)> = Vec::new();
    for (s, p) in reference {
        match merged.iter_mut().find(|(t, _)| t == s) {
            Some((_, q)) => *q += p,
            None => merged.push((s.clone(), *p)),
        }
    }
    merged
}

/// Compares sampled outcomes against a finite reference distribution.
///
/// Passes iff every count is within 3 binomial standard deviations of its
/// expectation and nothing outside the reference support was observed. Duplicate
/// reference outcomes are merged first.
pub fn frequency_check<S, I>(samples: I, reference: &[(S, f64)]) -> FidelityReport<S>
where
    S: PartialEq + Clone,
    I: IntoIterator<Item = S>,
{
    let reference = merge_reference(reference);
    let mut counts = vec![0usize; reference.len()];
    let mut unexpected: Vec<(S, usize)> = Vec::new();
    let mut n = 0usize;
    for s in samples {
        n += 1;
        match reference.iter().position(|(t, _)| *t == s) {
            Some(k) => counts[k] += 1,
            None => match unexpected.iter_mut().find(|(t, _)| *t == s) {
                Some((_, c)) => *c += 1,
                None => unexpected.push((s, 1)),
            },
        }
    }
    let nf = n as f64;
    let outcomes: Vec<OutcomeCheck<S>> = reference
        .into_iter()
        .zip(counts)
        .map(|((outcome, q), observed)| {
            let var = nf * q * (1.0 - q);
            let dev = observed as f64 - nf * q;
            let z = if var > 0.0 {
                dev / var.sqrt()
            } else if dev.abs() < 0.5 {
                0.0
            } else {
                f64::INFINITY.copysign(dev)
            };
            OutcomeCheck { outcome, expected: q, observed, z }
        })
        .collect();
    let passed = unexpected.is_empty() && outcomes.iter().all(|o| o.z.abs() <= 3.0);
    FidelityReport { n, passed, outcomes, unexpected }
}

/// Draws `n` uniform noise vectors, tabulates `transition(s, a, p)` and compares the
/// frequencies with `reference`.
pub fn fidelity_check<M: SimModel>(
    model: &M,
    state: &M::State,
    action: &M::Action,
    reference: &[(M::State, f64)],
    n: usize,
    seed: u64,
) -> Result<FidelityReport<M::State>, SimError> {
    if n < 1000 {
        return Err(SimError::Domain(format!("fidelity check needs n >= 1000, got {n}")));
    }
    let total: f64 = reference.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 || reference.iter().any(|(_, p)| !(*p >= 0.0)) {
        return Err(SimError::InvalidDistribution(format!("reference sums to {total}")));
    }
    let width = model.noise_dim();
    let mut gen = rng::stream(seed, 0);
    let mut p = vec![0.0; width];
    let samples = (0..n).map(|_| {
        for x in p.iter_mut() {
            *x = rng::uniform01(&mut gen);
        }
        model.transition(state, action, &p)
    });
    Ok(frequency_check(samples, reference))
}
