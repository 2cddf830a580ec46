use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{index_of_union, union_from_index, IntervalUnion, TheoryError};
use crate::rng::SplitMix64;
use crate::sim::{draw_scenarios, estimate_value, DiscountMode, SimModel};

/// A union of measure 1/2 containing none of `points`, with its enumeration index.
///
/// The points are read as the exact rationals their floats denote. For the smallest
/// `K >= 1` that leaves enough room, each gap between consecutive points (and the
/// stretches to 0 and 1) receives the largest closed interval with endpoints on the
/// grid `j / 2^K` that avoids both neighbours; these are taken left to right and the
/// last one is trimmed so the total is exactly 1/2.
pub fn find_evading_union(points: &[f64]) -> Result<(IntervalUnion, BigUint), TheoryError> {
    let mut xs = Vec::with_capacity(points.len());
    for &p in points {
        if !(0.0..=1.0).contains(&p) {
            return Err(TheoryError::Domain(format!("point {p} is not in [0, 1]")));
        }
        xs.push(BigRational::from_float(p).expect("finite"));
    }
    xs.sort();
    xs.dedup();

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut k = 1u32;
    loop {
        let scale = BigInt::one() << k;
        let grid = BigRational::from_integer(scale.clone());
        let cell = BigRational::new(BigInt::one(), scale.clone());
        // candidate intervals as integer grid positions [lo, hi]
        let mut candidates: Vec<(BigInt, BigInt)> = Vec::with_capacity(xs.len() + 1);
        let mut lo = BigInt::zero();
        for x in &xs {
            let scaled = x * &grid;
            let hi = scaled.ceil().to_integer() - 1;
            let next = scaled.floor().to_integer() + 1;
            if lo < hi {
                candidates.push((std::mem::replace(&mut lo, next), hi));
            } else {
                lo = next;
            }
        }
        if lo < scale {
            candidates.push((lo, scale.clone()));
        }
        let room: BigInt = candidates.iter().map(|(l, h)| h - l).sum();
        if BigRational::from_integer(room) * &cell < half {
            k += 1;
            continue;
        }

        let mut need = BigRational::from_integer(scale.clone()) * &half;
        let mut intervals = Vec::new();
        for (l, h) in candidates {
            if need.is_zero() {
                break;
            }
            let width = BigRational::from_integer(&h - &l);
            let take = if width < need { width } else { need.clone() };
            need -= &take;
            let a = BigRational::from_integer(l) * &cell;
            let b = &a + take * &cell;
            intervals.push((a, b));
        }
        let union = IntervalUnion::from_canonical(intervals);
        let index = index_of_union(&union)?;
        return Ok((union, index));
    }
}

/// States of the four-state counterexample MDP; `R(s_i) = i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CxState {
    Minus,
    Start,
    Plus,
    Absorbing,
}

impl CxState {
    pub fn reward(self) -> i64 {
        match self {
            CxState::Minus => -1,
            CxState::Plus => 1,
            CxState::Start | CxState::Absorbing => 0,
        }
    }
}

/// Action `a_i`: the enumeration index together with its decoded union `U_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionAction {
    pub index: BigUint,
    pub union: IntervalUnion,
}

impl UnionAction {
    /// Decodes `U_index`.
    pub fn from_index(index: BigUint) -> Result<Self, TheoryError> {
        let union = union_from_index(&index)?;
        Ok(Self { index, union })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CounterexampleDynamics {
    /// `g(s_0, a_i, p) = s_{-1}` iff `p` lies in `U_i`.
    #[default]
    Adversarial,
    /// `g(s_0, a, p) = s_{-1}` iff `p <= 1/2`, whatever the action.
    Threshold,
}

/// From `s_0` the process moves to `s_{-1}` or `s_1` with probability 1/2 each, then
/// to the absorbing state. Undiscounted: the model reports `gamma = 1`, which is
/// harmless because every episode ends after two transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CounterexampleMdp {
    pub dynamics: CounterexampleDynamics,
}

impl CounterexampleMdp {
    pub fn new(dynamics: CounterexampleDynamics) -> Self {
        Self { dynamics }
    }

    /// Exact probability of reaching `s_{-1}` under action `a`.
    pub fn minus_probability(&self, a: &UnionAction) -> BigRational {
        match self.dynamics {
            CounterexampleDynamics::Adversarial => a.union.measure(),
            CounterexampleDynamics::Threshold => BigRational::new(BigInt::one(), BigInt::from(2)),
        }
    }

    /// Exact value of the constant policy `a` over `h >= 1` steps.
    pub fn exact_value(&self, a: &UnionAction) -> BigRational {
        let minus = self.minus_probability(a);
        let plus = BigRational::one() - &minus;
        plus - minus
    }
}

impl SimModel for CounterexampleMdp {
    type State = CxState;
    type Action = Arc<UnionAction>;

    fn noise_dim(&self) -> usize {
        1
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn r_max(&self) -> f64 {
        1.0
    }

    fn transition(&self, state: &CxState, action: &Arc<UnionAction>, p: &[f64]) -> CxState {
        match state {
            CxState::Start => {
                let minus = match self.dynamics {
                    CounterexampleDynamics::Adversarial => action.union.contains_f64(p[0]),
                    CounterexampleDynamics::Threshold => p[0] <= 0.5,
                };
                if minus {
                    CxState::Minus
                } else {
                    CxState::Plus
                }
            }
            _ => CxState::Absorbing,
        }
    }

    fn reward(&self, state: &CxState) -> f64 {
        state.reward() as f64
    }

    fn initial(&self, _rng: &mut SplitMix64) -> CxState {
        CxState::Start
    }

    fn is_absorbing(&self, state: &CxState) -> bool {
        *state == CxState::Absorbing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub m: usize,
    pub policy_index: BigUint,
    pub v_hat: f64,
    pub v_true: f64,
    pub gap: f64,
    /// Measure of the chosen policy's union, exactly.
    pub measure: BigRational,
}

/// Draws `m` scenarios, picks the action whose union evades every first noise entry,
/// and scores the constant policy with the generic estimator and exactly.
pub fn counterexample_demo(m: usize, h: usize, seed: u64) -> Result<CounterexampleReport, TheoryError> {
    if m == 0 || h == 0 {
        return Err(TheoryError::Domain(format!("need m >= 1 and h >= 1, got m={m}, h={h}")));
    }
    let model = CounterexampleMdp::new(CounterexampleDynamics::Adversarial);
    let scenarios = draw_scenarios(&model, m, h, seed)?;
    let firsts: Vec<f64> = scenarios.iter().map(|s| s.row(0)[0]).collect();
    let (_, index) = find_evading_union(&firsts)?;
    // the action is rebuilt from its index alone
    let action = Arc::new(UnionAction::from_index(index)?);
    let policy = |_: &CxState| action.clone();
    let v_hat = estimate_value(&model, &policy, &scenarios, h, DiscountMode::Discrete)?.value;
    let v_true = model.exact_value(&action).to_f64().expect("bounded");
    Ok(CounterexampleReport {
        m,
        policy_index: action.index.clone(),
        v_hat,
        v_true,
        gap: (v_hat - v_true).abs(),
        measure: action.union.measure(),
    })
}

/// `max_i |V_hat(pi_i) - V(pi_i)|` over the constant policies `a_1..a_{n_policies}` on
/// `m` fresh scenarios.
pub fn max_deviation(
    dynamics: CounterexampleDynamics,
    m: usize,
    n_policies: usize,
    seed: u64,
) -> Result<f64, TheoryError> {
    if m == 0 || n_policies == 0 {
        return Err(TheoryError::Domain("need m >= 1 and at least one policy".into()));
    }
    let model = CounterexampleMdp::new(dynamics);
    let scenarios = draw_scenarios(&model, m, 2, seed)?;
    let mut worst: f64 = 0.0;
    for i in 1..=n_policies {
        let action = Arc::new(UnionAction::from_index(BigUint::from(i))?);
        let policy = |_: &CxState| action.clone();
        let v_hat = estimate_value(&model, &policy, &scenarios, 2, DiscountMode::Discrete)?.value;
        let v_true = model.exact_value(&action).to_f64().expect("bounded");
        worst = worst.max((v_hat - v_true).abs());
    }
    Ok(worst)
}
