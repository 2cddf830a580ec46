use std::f64::consts::PI;

/// Tilt beyond which the bicycle has fallen.
pub const FALL_ANGLE: f64 = PI / 15.0;
/// Handlebar stop, 80 degrees.
pub const MAX_HANDLEBAR: f64 = 1.3963;

const C: f64 = 0.66;
const D_CM: f64 = 0.30;
const H: f64 = 0.94;
const L: f64 = 1.11;
const M_C: f64 = 15.0;
const M_D: f64 = 1.7;
const M_P: f64 = 60.0;
const M: f64 = M_C + M_P;
const R: f64 = 0.34;
const G: f64 = 9.82;
/// Forward speed, 10 km/h.
pub const SPEED: f64 = 10.0 / 3.6;
const SIGMA_DOT: f64 = SPEED / R;
const I_BC: f64 = 13.0 / 3.0 * M_C * H * H + M_P * (H + D_CM) * (H + D_CM);
const I_DC: f64 = M_D * R * R;
const I_DV: f64 = 1.5 * M_D * R * R;
const I_DL: f64 = 0.5 * M_D * R * R;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BikeState {
    /// Tilt from vertical (rad).
    pub omega: f64,
    pub omega_dot: f64,
    /// Handlebar angle (rad).
    pub theta: f64,
    pub theta_dot: f64,
    /// Heading, measured from the +y axis towards +x (rad).
    pub psi: f64,
    pub x: f64,
    pub y: f64,
    pub fallen: bool,
    pub at_goal: bool,
    /// Progress towards the goal made by the step that produced this state (m).
    pub progress: f64,
}

impl BikeState {
    pub fn is_terminal(&self) -> bool {
        self.fallen || self.at_goal
    }

    /// Mirror image: tilt, steering and heading negated, `x` reflected.
    pub fn mirrored(&self) -> Self {
        Self {
            omega: -self.omega,
            omega_dot: -self.omega_dot,
            theta: -self.theta,
            theta_dot: -self.theta_dot,
            psi: -self.psi,
            x: -self.x,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BikeAction {
    /// Handlebar torque (N m).
    pub tau: f64,
    /// Rider displacement (m).
    pub nu: f64,
}

/// Integrates one step of length `dt`.
///
/// The displacement actually applied is `nu + noise_halfwidth * (2p - 1)`. Rates are
/// updated before angles (semi-implicit Euler); the heading follows the rear-wheel
/// kinematics `psi' = v tan(theta) / l`. Fallen states are returned unchanged.
pub fn bike_step(state: &BikeState, action: &BikeAction, p: f64, dt: f64, noise_halfwidth: f64) -> BikeState {
    if state.fallen {
        return *state;
    }
    let d = action.nu + noise_halfwidth * (2.0 * p - 1.0);
    let phi = state.omega + (d / H).atan();
    let theta = state.theta;
    let (sin_t, tan_t) = (theta.sin(), theta.tan());
    // signed curvatures of the front wheel, back wheel and centre of mass paths
    let inv_front = sin_t / L;
    let inv_back = tan_t / L;
    let inv_cm = tan_t / ((L - C) * (L - C) * tan_t * tan_t + L * L).sqrt();
    let omega_ddot = (M * H * G * phi.sin()
        - phi.cos()
            * (I_DC * SIGMA_DOT * state.theta_dot
                + SPEED * SPEED * (M_D * R * (inv_front + inv_back) + M * H * inv_cm)))
        / I_BC;
    let theta_ddot = (action.tau - I_DV * SIGMA_DOT * state.omega_dot) / I_DL;

    let omega_dot = state.omega_dot + dt * omega_ddot;
    let omega = state.omega + dt * omega_dot;
    let theta_dot = state.theta_dot + dt * theta_ddot;
    let theta = (state.theta + dt * theta_dot).clamp(-MAX_HANDLEBAR, MAX_HANDLEBAR);
    let psi = state.psi + dt * SPEED * theta.tan() / L;
    let x = state.x + dt * SPEED * psi.sin();
    let y = state.y + dt * SPEED * psi.cos();

    BikeState {
        omega,
        omega_dot,
        theta,
        theta_dot,
        psi,
        x,
        y,
        fallen: omega.abs() > FALL_ANGLE,
        at_goal: state.at_goal,
        progress: 0.0,
    }
}

pub const N_FEATURES: usize = 15;

/// `[1, w, w', t, t', psi, w t, w t', w' t, sin psi, cos psi, w^2, t^2, w w', t t']`
/// with `w` the tilt, `t` the handlebar angle and `psi` the heading error.
pub fn features(state: &BikeState, heading_error: f64) -> [f64; N_FEATURES] {
    let (w, wd, t, td) = (state.omega, state.omega_dot, state.theta, state.theta_dot);
    let psi = heading_error;
    [1.0, w, wd, t, td, psi, w * t, w * td, wd * t, psi.sin(), psi.cos(), w * w, t * t, w * wd, t * td]
}

/// Parameters of the two sigmoid units, one per action component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BikeWeights {
    pub w1: [f64; N_FEATURES],
    pub w2: [f64; N_FEATURES],
}

impl Default for BikeWeights {
    fn default() -> Self {
        Self { w1: [0.0; N_FEATURES], w2: [0.0; N_FEATURES] }
    }
}

impl BikeWeights {
    pub const LEN: usize = 2 * N_FEATURES;

    /// `w1` followed by `w2`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.w2).copied().collect()
    }

    pub fn from_slice(theta: &[f64]) -> Option<Self> {
        if theta.len() != Self::LEN || theta.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut w = Self::default();
        w.w1.copy_from_slice(&theta[..N_FEATURES]);
        w.w2.copy_from_slice(&theta[N_FEATURES..]);
        Some(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBounds {
    pub tau_min: f64,
    pub tau_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `tau = sigma(w1 . x)(tau_max - tau_min) + tau_min`, and likewise `nu` from `w2`.
pub fn sigmoid_policy(weights: &BikeWeights, bounds: &ActionBounds, x: &[f64; N_FEATURES]) -> BikeAction {
    let dot = |w: &[f64; N_FEATURES]| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    BikeAction {
        tau: sigmoid(dot(&weights.w1)) * (bounds.tau_max - bounds.tau_min) + bounds.tau_min,
        nu: sigmoid(dot(&weights.w2)) * (bounds.nu_max - bounds.nu_min) + bounds.nu_min,
    }
}

fn distance(x: f64, y: f64, goal: (f64, f64)) -> f64 {
    (x - goal.0).hypot(y - goal.1)
}

/// `scale * (dist(prev) - dist(next))`.
pub fn shaping_reward(prev: &BikeState, next: &BikeState, goal: (f64, f64), scale: f64) -> f64 {
    scale * (distance(prev.x, prev.y, goal) - distance(next.x, next.y, goal))
}

/// Fraction of the straight segment `prev -> next` travelled when it first reaches
/// distance `radius` from `goal`. `None` unless `prev` is outside and `next` inside.
pub fn goal_entry_fraction(prev: &BikeState, next: &BikeState, goal: (f64, f64), radius: f64) -> Option<f64> {
    let d_prev = distance(prev.x, prev.y, goal);
    let d_next = distance(next.x, next.y, goal);
    if !(d_prev > radius && d_next <= radius) {
        return None;
    }
    let (px, py) = (prev.x - goal.0, prev.y - goal.1);
    let (dx, dy) = (next.x - prev.x, next.y - prev.y);
    let a = dx * dx + dy * dy;
    let b = 2.0 * (px * dx + py * dy);
    let c = px * px + py * py - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    // c > 0 and b < 0 here, so this form of the smaller root does not cancel
    let tau = 2.0 * c / (-b + disc.sqrt());
    Some(tau.clamp(0.0, 1.0))
}
