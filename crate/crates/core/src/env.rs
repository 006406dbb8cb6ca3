//! Inverted pendulum on a cart, built from scratch.
//!
//! Standard frictionless cart-pole equations of motion (uniform pole of mass
//! `pole_mass` and half-length `pole_half_length`, pivoted on the cart), with
//! the pole angle `phi` measured from upright. Integration is one classical
//! fourth-order Runge-Kutta step per environment step with the force held
//! constant, which keeps zero-force rollouts close enough to energy
//! conservation to use a mechanical-energy oracle in tests.
//!
//! The default task is stabilization from near-upright: reward 1 per step,
//! termination on leaving the angle or track envelope, horizon 1000. The
//! swingup variant starts hanging down, scores `(1 + cos phi) / 2` per step
//! and never terminates on angle.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskMode {
    #[default]
    Stabilize,
    Swingup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub pole_half_length: f64,
    pub gravity: f64,
    /// Force applied at action = +/-1 (newtons).
    pub force_max: f64,
    pub track_limit: f64,
    pub track_limit_enabled: bool,
    pub angle_limit: f64,
    pub horizon: u32,
    pub dt: f64,
    pub init_angle_spread: f64,
    pub mode: TaskMode,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            gravity: 9.81,
            force_max: 10.0,
            track_limit: 1.0,
            track_limit_enabled: true,
            angle_limit: 0.2,
            horizon: 1000,
            dt: 0.02,
            init_angle_spread: 0.05,
            mode: TaskMode::Stabilize,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positives = [
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("pole_half_length", self.pole_half_length),
            ("gravity", self.gravity),
            ("force_max", self.force_max),
            ("track_limit", self.track_limit),
            ("angle_limit", self.angle_limit),
            ("dt", self.dt),
        ];
        for (name, value) in positives {
            if !(value > 0.0 && value.is_finite()) {
                return Err(EnvError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if self.init_angle_spread < 0.0 || !self.init_angle_spread.is_finite() {
            return Err(EnvError::InvalidParams(format!(
                "init_angle_spread must be non-negative, got {}",
                self.init_angle_spread
            )));
        }
        if self.horizon < 1 {
            return Err(EnvError::InvalidParams("horizon must be at least 1".into()));
        }
        if self.angle_limit >= std::f64::consts::FRAC_PI_2 {
            return Err(EnvError::InvalidParams(format!(
                "angle_limit must be below pi/2, got {}",
                self.angle_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub x: f64,
    pub x_dot: f64,
    /// Pole angle from upright (radians).
    pub phi: f64,
    pub phi_dot: f64,
    pub step_count: u32,
}

/// What the controller sees. The angle is split into sine and cosine so a full
/// revolution has no discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub x_dot: f64,
    pub sin_phi: f64,
    pub cos_phi: f64,
    pub phi_dot: f64,
}

impl Observation {
    pub fn from_state(s: &EnvState) -> Self {
        Self {
            x: s.x,
            x_dot: s.x_dot,
            sin_phi: s.phi.sin(),
            cos_phi: s.phi.cos(),
            phi_dot: s.phi_dot,
        }
    }

    /// Signed angle reconstructed from its sine/cosine encoding.
    pub fn phi(&self) -> f64 {
        self.sin_phi.atan2(self.cos_phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub x_dot: f64,
    pub x_ddot: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("environment step on a terminal state")]
    EpisodeOver,
    #[error("invalid environment parameters: {0}")]
    InvalidParams(String),
}

/// Time derivatives of the cart-pole state under a constant applied force.
pub fn cartpole_dynamics(s: &EnvState, force: f64, p: &EnvParams) -> Derivatives {
    let total_mass = p.cart_mass + p.pole_mass;
    let (sin_phi, cos_phi) = (s.phi.sin(), s.phi.cos());
    let length = p.pole_half_length;
    let temp = (force + p.pole_mass * length * s.phi_dot * s.phi_dot * sin_phi) / total_mass;
    let phi_ddot = (p.gravity * sin_phi - cos_phi * temp)
        / (length * (4.0 / 3.0 - p.pole_mass * cos_phi * cos_phi / total_mass));
    let x_ddot = temp - p.pole_mass * length * phi_ddot * cos_phi / total_mass;
    Derivatives { x_dot: s.x_dot, x_ddot, phi_dot: s.phi_dot, phi_ddot }
}

/// One RK4 step of the dynamics; the step counter is untouched.
pub fn rk4_step(s: &EnvState, force: f64, dt: f64, p: &EnvParams) -> EnvState {
    let eval = |base: &EnvState, d: &Derivatives, h: f64| EnvState {
        x: base.x + h * d.x_dot,
        x_dot: base.x_dot + h * d.x_ddot,
        phi: base.phi + h * d.phi_dot,
        phi_dot: base.phi_dot + h * d.phi_ddot,
        step_count: base.step_count,
    };
    let k1 = cartpole_dynamics(s, force, p);
    let k2 = cartpole_dynamics(&eval(s, &k1, dt / 2.0), force, p);
    let k3 = cartpole_dynamics(&eval(s, &k2, dt / 2.0), force, p);
    let k4 = cartpole_dynamics(&eval(s, &k3, dt), force, p);
    EnvState {
        x: s.x + dt / 6.0 * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
        x_dot: s.x_dot + dt / 6.0 * (k1.x_ddot + 2.0 * k2.x_ddot + 2.0 * k3.x_ddot + k4.x_ddot),
        phi: s.phi + dt / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot),
        phi_dot: s.phi_dot + dt / 6.0 * (k1.phi_ddot + 2.0 * k2.phi_ddot + 2.0 * k3.phi_ddot + k4.phi_ddot),
        step_count: s.step_count,
    }
}

/// Fresh episode: cart centred and at rest, pole angle drawn uniformly around
/// the mode's base angle (upright, or hanging down for swingup).
pub fn reset(p: &EnvParams, rng: &mut impl Rng) -> (EnvState, Observation) {
    let base = match p.mode {
        TaskMode::Stabilize => 0.0,
        TaskMode::Swingup => std::f64::consts::PI,
    };
    let offset = if p.init_angle_spread > 0.0 {
        rng.gen_range(-p.init_angle_spread..=p.init_angle_spread)
    } else {
        0.0
    };
    let mut phi = base + offset;
    if phi > std::f64::consts::PI {
        phi -= 2.0 * std::f64::consts::PI;
    }
    let state = EnvState { x: 0.0, x_dot: 0.0, phi, phi_dot: 0.0, step_count: 0 };
    let obs = Observation::from_state(&state);
    (state, obs)
}

pub fn is_terminal(s: &EnvState, p: &EnvParams) -> bool {
    if s.step_count >= p.horizon {
        return true;
    }
    if p.track_limit_enabled && s.x.abs() > p.track_limit {
        return true;
    }
    match p.mode {
        TaskMode::Stabilize => s.phi.abs() > p.angle_limit,
        TaskMode::Swingup => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
}

/// Advance one environment step. The action is clipped to [-1, 1] and scaled
/// by `force_max`; stepping an already-terminal state is an error.
pub fn step(s: &EnvState, action: f64, p: &EnvParams) -> Result<StepOutcome, EnvError> {
    if is_terminal(s, p) {
        return Err(EnvError::EpisodeOver);
    }
    let force = action.clamp(-1.0, 1.0) * p.force_max;
    let mut state = rk4_step(s, force, p.dt, p);
    state.step_count = s.step_count + 1;
    let reward = match p.mode {
        TaskMode::Stabilize => 1.0,
        TaskMode::Swingup => 0.5 * (1.0 + state.phi.cos()),
    };
    let done = is_terminal(&state, p);
    let obs = Observation::from_state(&state);
    Ok(StepOutcome { state, obs, reward, done })
}
