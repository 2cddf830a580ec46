use super::SimError;

/// Piecewise-constant inverse CDF of a finite distribution.
///
/// Outcome `k` is selected iff `cumulative[k-1] < p <= cumulative[k]`; `p = 0` maps to
/// the first outcome and `p = 1` to the last.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdf<T> {
    outcomes: Vec<T>,
    cumulative: Vec<f64>,
}

impl<T> InverseCdf<T> {
    /// Builds the map from `(outcome, probability)` pairs in the given order.
    pub fn new(table: Vec<(T, f64)>) -> Result<Self, SimError> {
        if table.is_empty() {
            return Err(SimError::InvalidDistribution("empty table".into()));
        }
        let mut outcomes = Vec::with_capacity(table.len());
        let mut cumulative = Vec::with_capacity(table.len());
        let mut acc = 0.0;
        for (outcome, prob) in table {
            if !(prob > 0.0 && prob.is_finite()) {
                return Err(SimError::InvalidDistribution(format!("probability {prob} is not positive")));
            }
            acc += prob;
            outcomes.push(outcome);
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-12 {
            return Err(SimError::InvalidDistribution(format!("probabilities sum to {acc}")));
        }
        *cumulative.last_mut().expect("nonempty") = 1.0;
        Ok(Self { outcomes, cumulative })
    }

    pub fn index_of(&self, p: f64) -> usize {
        let k = self.cumulative.partition_point(|&c| c < p);
        k.min(self.outcomes.len() - 1)
    }

    pub fn sample(&self, p: f64) -> &T {
        &self.outcomes[self.index_of(p)]
    }

    pub fn outcomes(&self) -> &[T] {
        &self.outcomes
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn closed_on_the_left_boundary_list() {
        let cdf = InverseCdf::new(vec![("a", 1.0 / 3.0), ("b", 2.0 / 3.0)]).unwrap();
        assert_eq!(*cdf.sample(0.2), "a");
        assert_eq!(*cdf.sample(0.5), "b");
        assert_eq!(*cdf.sample(1.0 / 3.0), "a");
        assert_eq!(*cdf.sample(0.0), "a");
        assert_eq!(*cdf.sample(1.0), "b");
    }

    #[test]
    fn invalid_tables() {
        assert!(InverseCdf::<u8>::new(vec![]).is_err());
        assert!(InverseCdf::new(vec![(0, 0.5), (1, 0.4)]).is_err());
        assert!(InverseCdf::new(vec![(0, 0.0), (1, 1.0)]).is_err());
        assert!(InverseCdf::new(vec![(0, -0.5), (1, 1.5)]).is_err());
    }

    #[test]
    fn pushforward_matches_within_three_sigma() {
        let cdf = InverseCdf::new(vec![(0usize, 1.0 / 3.0), (1, 2.0 / 3.0)]).unwrap();
        let n = 100_000;
        let mut rng = rng::stream(11, 0);
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[*cdf.sample(rng::uniform01(&mut rng))] += 1;
        }
        for (k, q) in [1.0 / 3.0, 2.0 / 3.0].iter().enumerate() {
            let sd = (n as f64 * q * (1.0 - q)).sqrt();
            assert!((counts[k] as f64 - n as f64 * q).abs() <= 3.0 * sd);
        }
    }
}
