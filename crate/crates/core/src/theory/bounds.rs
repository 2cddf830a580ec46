use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use super::TheoryError;

/// Inputs shared by the capacity and sample-size calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub delta: f64,
    /// Pseudo-dimension bound of each coordinate family.
    pub d: u32,
    pub d_s: u32,
    pub d_p: u32,
    /// Lipschitz bound of the dynamics.
    pub b: f64,
    /// Lipschitz bound of the reward.
    pub b_r: f64,
    pub h_eps: u32,
    /// Reward bound.
    pub m_big: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<(), TheoryError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(TheoryError::Domain(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("m_big", self.m_big)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TheoryError::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.d_s == 0 || self.d_p == 0 {
            return Err(TheoryError::Domain("d_s and d_p must be at least 1".into()));
        }
        for (name, x) in [("b", self.b), ("b_r", self.b_r)] {
            if !(x >= 1.0 && x.is_finite()) {
                return Err(TheoryError::Domain(format!("{name} must be finite and at least 1, got {x}")));
            }
        }
        Ok(())
    }

    /// Lipschitz bound of one composed step, `(d_s + h_eps d_p) b`.
    pub fn b0(&self) -> f64 {
        (self.d_s as f64 + self.h_eps as f64 * self.d_p as f64) * self.b
    }
}

fn check_covering(epsilon: f64, m_big: f64) -> Result<(), TheoryError> {
    if !(epsilon > 0.0 && m_big.is_finite() && epsilon <= m_big) {
        return Err(TheoryError::Domain(format!("need 0 < epsilon <= M, got epsilon={epsilon}, M={m_big}")));
    }
    Ok(())
}

/// `ln` of the covering-number bound `2 ((2eM/eps) ln(2eM/eps))^d`.
pub fn covering_log_bound(epsilon: f64, m_big: f64, d: u32) -> Result<f64, TheoryError> {
    check_covering(epsilon, m_big)?;
    let log_u = LN_2 + 1.0 + m_big.ln() - epsilon.ln();
    Ok(LN_2 + d as f64 * (log_u + log_u.ln()))
}

/// `2 ((2eM/eps) ln(2eM/eps))^d`; infinite if it overflows.
pub fn covering_bound(epsilon: f64, m_big: f64, d: u32) -> Result<f64, TheoryError> {
    covering_log_bound(epsilon, m_big, d).map(f64::exp)
}

/// `ln` of `2^{d_S H} (2e (d_S + H d_P)(H + 1) B0^H B_R / eps)^{2 d d_S H}` with
/// `H = h_eps`, evaluated term by term in log space.
pub fn capacity_log_bound(inputs: &BoundInputs) -> Result<f64, TheoryError> {
    inputs.validate()?;
    let h = inputs.h_eps as f64;
    let d_s = inputs.d_s as f64;
    let inner =
        LN_2 + 1.0 + (d_s + h * inputs.d_p as f64).ln() + (h + 1.0).ln() + h * inputs.b0().ln() + inputs.b_r.ln()
            - inputs.epsilon.ln();
    Ok(d_s * h * LN_2 + 2.0 * inputs.d as f64 * d_s * h * inner)
}

/// Scenario count before rounding up.
///
/// The accuracy and confidence are split over the `h_eps + 1` per-step reward
/// estimates: `eps' = eps / (2 (h_eps + 1))` and `delta' = delta / (h_eps + 1)`. Then
/// `m = 64 (2M)^2 / eps'^2 (ln(1/delta') + ln 4 + ln C(eps'/16))`, which for `M = 1`
/// has the leading constant 256.
pub fn sample_size_real(inputs: &BoundInputs) -> Result<f64, TheoryError> {
    inputs.validate()?;
    let steps = inputs.h_eps as f64 + 1.0;
    let eps_step = inputs.epsilon / (2.0 * steps);
    let delta_step = inputs.delta / steps;
    let capacity = capacity_log_bound(&BoundInputs { epsilon: eps_step / 16.0, ..*inputs })?;
    let range = 2.0 * inputs.m_big;
    let lead = 64.0 * range * range / (eps_step * eps_step);
    Ok(lead * (-delta_step.ln() + 2.0 * LN_2 + capacity))
}

pub fn sample_size_bound(inputs: &BoundInputs) -> Result<u64, TheoryError> {
    let m = sample_size_real(inputs)?;
    if !(m.is_finite() && m < u64::MAX as f64) {
        return Err(TheoryError::Domain(format!("sample size {m} is not representable")));
    }
    Ok(m.ceil() as u64)
}

/// Second evaluation of the three calculators that avoids the log-space shortcuts:
/// literal powers and products, and the capacity as a sum over its `h_eps` steps.
pub mod reference {
    use super::*;

    pub fn covering_bound(epsilon: f64, m_big: f64, d: u32) -> f64 {
        let u = 2.0 * E * m_big / epsilon;
        2.0 * (u * u.ln()).powi(d as i32)
    }

    pub fn capacity_log_bound(inputs: &BoundInputs) -> f64 {
        let h = inputs.h_eps;
        let d_s = inputs.d_s as f64;
        let b0_pow = (0..h).fold(1.0, |acc, _| acc * inputs.b0());
        let base =
            2.0 * E * (d_s + h as f64 * inputs.d_p as f64) * (h as f64 + 1.0) * b0_pow * inputs.b_r / inputs.epsilon;
        let per_step = d_s * 2f64.ln() + 2.0 * inputs.d as f64 * d_s * base.ln();
        (0..h).map(|_| per_step).sum()
    }

    pub fn sample_size_real(inputs: &BoundInputs) -> f64 {
        let steps = inputs.h_eps as f64 + 1.0;
        let eps_step = inputs.epsilon / 2.0 / steps;
        let delta_step = inputs.delta / steps;
        let reduced = BoundInputs { epsilon: eps_step / 16.0, ..*inputs };
        let log_c = capacity_log_bound(&reduced);
        256.0 * inputs.m_big.powi(2) / eps_step.powi(2) * ((1.0 / delta_step).ln() + 4f64.ln() + log_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(h_eps: u32, epsilon: f64) -> BoundInputs {
        BoundInputs { epsilon, delta: 0.1, d: 1, d_s: 1, d_p: 1, b: 1.0, b_r: 1.0, h_eps, m_big: 1.0 }
    }

    #[test]
    fn covering_examples() {
        assert_eq!(covering_bound(1.0, 1.0, 0).unwrap(), 2.0);
        // 2 * (2e ln 2e)
        let v = covering_bound(1.0, 1.0, 1).unwrap();
        assert!((v - 18.409_804_855_291_06).abs() < 1e-9, "{v}");
        assert!(covering_bound(2.0, 1.0, 1).is_err());
        assert!(covering_bound(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn capacity_example() {
        // ln(2 (16e)^2) with B0 = 2
        let v = capacity_log_bound(&unit(1, 1.0)).unwrap();
        let expect = (2.0 * (16.0 * E).powi(2)).ln();
        assert!((v - expect).abs() < 1e-12);
        // 512 e^2 = 3783.197
        assert!((v.exp() - 3783.197).abs() < 1e-3);
    }

    #[test]
    fn capacity_is_finite_for_large_inputs() {
        let inputs = BoundInputs {
            epsilon: 0.01,
            delta: 0.1,
            d: 10,
            d_s: 6,
            d_p: 1,
            b: 10.0,
            b_r: 10.0,
            h_eps: 100,
            m_big: 1.0,
        };
        assert!(capacity_log_bound(&inputs).unwrap().is_finite());
        assert!(sample_size_bound(&inputs).is_err() || sample_size_real(&inputs).unwrap().is_finite());
    }

    #[test]
    fn validation() {
        let mut bad = unit(3, 0.5);
        bad.b = 0.5;
        assert!(capacity_log_bound(&bad).is_err());
        let mut bad = unit(3, 0.5);
        bad.delta = 1.0;
        assert!(sample_size_bound(&bad).is_err());
        assert!(capacity_log_bound(&unit(3, -1.0)).is_err());
    }
}
