use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::TheoryError;

/// Finite union of closed intervals in `[0, 1]` with exact rational endpoints.
///
/// Always stored in canonical form: sorted, pairwise separated by a positive gap,
/// each interval of positive length. Overlapping or touching input intervals are
/// merged by [`IntervalUnion::new`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalUnion {
    intervals: Vec<(BigRational, BigRational)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut intervals: Vec<(BigRational, BigRational)>) -> Result<Self, TheoryError> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        for (a, b) in &intervals {
            if !(a < b) {
                return Err(TheoryError::InvalidInterval(format!("[{a}, {b}] has nonpositive length")));
            }
            if *a < zero || *b > one {
                return Err(TheoryError::InvalidInterval(format!("[{a}, {b}] is not inside [0, 1]")));
            }
        }
        intervals.sort();
        let mut merged: Vec<(BigRational, BigRational)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some((_, hi)) if a <= *hi => {
                    if b > *hi {
                        *hi = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        Ok(Self { intervals: merged })
    }

    /// Builds from intervals already known to be canonical.
    pub(crate) fn from_canonical(intervals: Vec<(BigRational, BigRational)>) -> Self {
        debug_assert!(intervals.iter().all(|(a, b)| a < b));
        debug_assert!(intervals.windows(2).all(|w| w[0].1 < w[1].0));
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(BigRational, BigRational)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length, computed exactly.
    pub fn measure(&self) -> BigRational {
        self.intervals.iter().fold(BigRational::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        // first interval whose right end is >= x
        let k = self.intervals.partition_point(|(_, b)| b < x);
        k < self.intervals.len() && self.intervals[k].0 <= *x
    }

    /// Membership of the exact value of a finite float. Non-finite values are never members.
    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(q) => self.contains(&q),
            None => false,
        }
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, (a, b)) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " u ")?;
            }
            write!(f, "[{a}, {b}]")?;
        }
        Ok(())
    }
}
