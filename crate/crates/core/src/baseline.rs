//! Proportional-derivative reference controller, used as the acceptance
//! comparator: it holds the pole for full episodes under the default
//! environment, so any trained circuit can be measured against it.

use rand_chacha::ChaCha8Rng;

use crate::env::{self, EnvParams, Observation};
use crate::search::{RolloutOutcome, RolloutRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    pub k_p: f64,
    pub k_d: f64,
}

impl Default for PdGains {
    // stiff enough that the residual cart drift stays well inside the track
    // limit over a full default-length episode
    fn default() -> Self {
        Self { k_p: 20.0, k_d: 1.0 }
    }
}

/// `clip(k_p * phi + k_d * phi_dot, -1, 1)`.
pub fn pd_action(obs: &Observation, gains: &PdGains) -> f64 {
    (gains.k_p * obs.phi() + gains.k_d * obs.phi_dot).clamp(-1.0, 1.0)
}

/// Closed-loop PD episode in the same outcome shape as a circuit rollout;
/// the potentials column group is empty because no circuit is involved.
pub fn pd_rollout(
    params: &EnvParams,
    gains: &PdGains,
    rng: &mut ChaCha8Rng,
    record_trace: bool,
) -> RolloutOutcome {
    let (mut state, mut obs) = env::reset(params, rng);
    let mut outcome = RolloutOutcome { total_return: 0.0, steps: 0, diverged: false, trace: Vec::new() };
    if record_trace {
        outcome.trace.push(RolloutRecord { env: state, potentials: vec![], action: 0.0, reward: 0.0 });
    }
    while !env::is_terminal(&state, params) {
        let action = pd_action(&obs, gains);
        let step = env::step(&state, action, params).expect("loop only steps non-terminal states");
        outcome.total_return += step.reward;
        outcome.steps += 1;
        if record_trace {
            outcome.trace.push(RolloutRecord {
                env: step.state,
                potentials: vec![],
                action,
                reward: step.reward,
            });
        }
        state = step.state;
        obs = step.obs;
        if step.done {
            break;
        }
    }
    outcome
}
