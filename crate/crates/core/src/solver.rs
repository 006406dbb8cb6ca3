//! Fixed-step integration of the circuit dynamics.
//!
//! The production integrator is a semi-implicit (linearly implicit) Euler
//! update: presynaptic potentials, and therefore all conductances, are frozen
//! at the previous step, which makes every membrane equation linear in its own
//! potential and reduces the implicit solve to one scalar division per neuron.
//! The denominator `C/dt + G_Leak + sum of conductances` is strictly positive,
//! so the update is a convex combination of the previous potential and the
//! attracting potentials; the leak-only system contracts toward `V_Leak` for
//! any positive step size.
//!
//! A forward-Euler reference integrator is provided for testing only; it is
//! conditionally stable and intended to be run at a much finer step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    chemical_conductance, membrane_derivative, CircuitError, CircuitState, CircuitTopology,
    NeuronId, NeuronRole, SigmoidSign,
};
use crate::params::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Integration step (seconds).
    pub dt: f64,
    /// Circuit steps per environment step.
    pub substeps_per_env_step: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 0.01, substeps_per_env_step: 2 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.substeps_per_env_step < 1 {
            return Err(SolverError::Config("substeps_per_env_step must be at least 1".into()));
        }
        Ok(())
    }
}

/// Clamped potentials of the sensory neurons for the duration of a step.
pub type ClampMap = BTreeMap<NeuronId, f64>;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("clamp map does not match the sensory neurons: {0}")]
    ClampMismatch(String),
    #[error("non-finite potential for neuron `{name}` at t = {t}")]
    NonFinite { name: String, t: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn validate_clamps(topo: &CircuitTopology, clamped: &ClampMap) -> Result<(), SolverError> {
    for id in topo.sensory_ids() {
        if !clamped.contains_key(&id) {
            return Err(SolverError::ClampMismatch(format!(
                "sensory neuron `{}` has no clamp value",
                topo.name(id)
            )));
        }
    }
    for id in clamped.keys() {
        if id.0 >= topo.n_neurons() || topo.role(*id) != NeuronRole::Sensory {
            return Err(SolverError::ClampMismatch(format!(
                "clamp entry for non-sensory neuron id {id}"
            )));
        }
    }
    Ok(())
}

fn check_finite(topo: &CircuitTopology, v: &[f64], t: f64) -> Result<(), SolverError> {
    for (i, value) in v.iter().enumerate() {
        if !value.is_finite() {
            return Err(SolverError::NonFinite { name: topo.name(NeuronId(i)).to_string(), t });
        }
    }
    Ok(())
}

/// One semi-implicit Euler step. Sensory potentials are set to their clamp
/// values; every other neuron solves its linear update with presynaptic
/// quantities evaluated at the previous step.
pub fn step_implicit(
    state: &CircuitState,
    topo: &CircuitTopology,
    theta: &ParameterVector,
    clamped: &ClampMap,
    dt: f64,
    sign: SigmoidSign,
) -> Result<CircuitState, SolverError> {
    validate_clamps(topo, clamped)?;
    debug_assert!(theta.matches(topo));
    let old = &state.v;
    let mut v = vec![0.0; topo.n_neurons()];
    for id in topo.ids() {
        if topo.role(id) == NeuronRole::Sensory {
            v[id.0] = clamped[&id];
            continue;
        }
        let np = theta.neuron(id);
        let c_over_dt = np.c_m / dt;
        let mut numerator = c_over_dt * old[id.0] + np.g_leak * np.v_leak;
        let mut denominator = c_over_dt + np.g_leak;
        for &j in topo.incoming_chem(id) {
            let syn = topo.chem()[j];
            let g = chemical_conductance(old[syn.pre.0], theta.chem_weight(j), theta.chem_sigma(j), sign);
            numerator += g * syn.polarity.reversal_potential();
            denominator += g;
        }
        for &j in topo.incident_gaps(id) {
            let gj = topo.gaps()[j];
            let other = if gj.a == id { gj.b } else { gj.a };
            let w = theta.gap_weight(j);
            numerator += w * old[other.0];
            denominator += w;
        }
        v[id.0] = numerator / denominator;
    }
    let t = state.t + dt;
    check_finite(topo, &v, t)?;
    Ok(CircuitState { v, t })
}

/// One forward-Euler step, for oracle comparisons at fine step sizes.
pub fn step_explicit_reference(
    state: &CircuitState,
    topo: &CircuitTopology,
    theta: &ParameterVector,
    clamped: &ClampMap,
    dt: f64,
    sign: SigmoidSign,
) -> Result<CircuitState, SolverError> {
    validate_clamps(topo, clamped)?;
    let mut v = vec![0.0; topo.n_neurons()];
    for id in topo.ids() {
        if topo.role(id) == NeuronRole::Sensory {
            v[id.0] = clamped[&id];
        } else {
            v[id.0] = state.v[id.0] + dt * membrane_derivative(id, state, topo, theta, sign)?;
        }
    }
    let t = state.t + dt;
    check_finite(topo, &v, t)?;
    Ok(CircuitState { v, t })
}

/// Run the implicit integrator for `duration` seconds under constant clamps.
/// Returns the full trajectory, starting with the input state.
pub fn simulate(
    state: &CircuitState,
    topo: &CircuitTopology,
    theta: &ParameterVector,
    clamped: &ClampMap,
    duration: f64,
    config: &SolverConfig,
    sign: SigmoidSign,
) -> Result<Vec<CircuitState>, SolverError> {
    config.validate()?;
    if duration < 0.0 {
        return Err(SolverError::Config(format!("duration must be non-negative, got {duration}")));
    }
    // tolerance guards the exact-multiple case against fp noise in the quotient
    let steps = ((duration / config.dt) - 1e-9).ceil().max(0.0) as usize;
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(state.clone());
    for _ in 0..steps {
        let next = step_implicit(trajectory.last().unwrap(), topo, theta, clamped, config.dt, sign)?;
        trajectory.push(next);
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GapJunction, Neuron};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn isolated() -> CircuitTopology {
        CircuitTopology::new(
            vec![Neuron { name: "N".into(), role: NeuronRole::Inter }],
            vec![],
            vec![],
        )
        .unwrap()
    }

    fn isolated_theta(topo: &CircuitTopology, c_m: f64, g_leak: f64, v_leak: f64) -> ParameterVector {
        let mut theta = ParameterVector::midpoint(topo);
        theta.set_neuron(NeuronId(0), c_m, g_leak, v_leak);
        theta
    }

    #[test]
    fn implicit_fixed_point_at_leak() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.3, 2.0, -0.055);
        let state = CircuitState { v: vec![-0.055], t: 0.0 };
        for dt in [1e-4, 0.01, 1.0, 10.0] {
            let next = step_implicit(&state, &topo, &theta, &ClampMap::new(), dt, SigmoidSign::Increasing).unwrap();
            assert!((next.v[0] - (-0.055)).abs() < 1e-15, "dt = {dt}");
        }
    }

    #[test]
    fn implicit_hand_computed_step() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.1, 1.0, -0.070);
        let state = CircuitState { v: vec![-0.020], t: 0.0 };
        let next = step_implicit(&state, &topo, &theta, &ClampMap::new(), 0.1, SigmoidSign::Increasing).unwrap();
        // (0.1/0.1 * -0.02 + 1 * -0.07) / (0.1/0.1 + 1) = -0.045
        assert!((next.v[0] - (-0.045)).abs() < 1e-15, "v = {}", next.v[0]);
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn implicit_contracts_for_any_dt() {
        let topo = isolated();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let theta = isolated_theta(
                &topo,
                rng.gen_range(1e-3..=1.0),
                rng.gen_range(50e-3..=5.0),
                rng.gen_range(-0.090..=0.0),
            );
            let v0 = rng.gen_range(-0.110..=0.020);
            let dt = rng.gen_range(1e-6..=10.0);
            let state = CircuitState { v: vec![v0], t: 0.0 };
            let next = step_implicit(&state, &topo, &theta, &ClampMap::new(), dt, SigmoidSign::Increasing).unwrap();
            let v_leak = theta.neuron(NeuronId(0)).v_leak;
            assert!(
                (next.v[0] - v_leak).abs() <= (v0 - v_leak).abs(),
                "no contraction: v0 = {v0}, v1 = {}, v_leak = {v_leak}, dt = {dt}",
                next.v[0]
            );
        }
    }

    #[test]
    fn explicit_diverges_beyond_stability_limit_where_implicit_does_not() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.1, 1.0, -0.070);
        // stability limit for the leak ODE is dt = 2 C / G = 0.2 s
        let dt = 0.5;
        let mut exp_state = CircuitState { v: vec![-0.020], t: 0.0 };
        let mut imp_state = exp_state.clone();
        let mut exp_dev = Vec::new();
        for _ in 0..30 {
            exp_state =
                step_explicit_reference(&exp_state, &topo, &theta, &ClampMap::new(), dt, SigmoidSign::Increasing)
                    .unwrap();
            imp_state =
                step_implicit(&imp_state, &topo, &theta, &ClampMap::new(), dt, SigmoidSign::Increasing).unwrap();
            exp_dev.push((exp_state.v[0] - (-0.070)).abs());
            assert!((imp_state.v[0] - (-0.070)).abs() <= 0.05);
        }
        assert!(exp_dev.last().unwrap() > &1.0, "explicit Euler should blow up at dt = 0.5");
    }

    #[test]
    fn explicit_matches_closed_form_leak_decay() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.1, 1.0, -0.070);
        let mut state = CircuitState { v: vec![-0.020], t: 0.0 };
        let dt: f64 = 1e-6;
        let horizon: f64 = 0.1;
        let steps = (horizon / dt).round() as usize;
        for _ in 0..steps {
            state = step_explicit_reference(&state, &topo, &theta, &ClampMap::new(), dt, SigmoidSign::Increasing)
                .unwrap();
        }
        let tau = 0.1 / 1.0;
        let exact = -0.070 + (-0.020 - (-0.070)) * (-horizon / tau).exp();
        assert!((state.v[0] - exact).abs() < 1e-6, "got {}, want {exact}", state.v[0]);
    }

    #[test]
    fn explicit_zero_derivative_leaves_state_unchanged() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.1, 1.0, -0.070);
        let state = CircuitState { v: vec![-0.070], t: 0.0 };
        let next = step_explicit_reference(&state, &topo, &theta, &ClampMap::new(), 0.5, SigmoidSign::Increasing)
            .unwrap();
        assert_eq!(next.v, state.v);
    }

    #[test]
    fn explicit_single_step_two_neuron_hand_values() {
        let topo = CircuitTopology::new(
            vec![
                Neuron { name: "A".into(), role: NeuronRole::Inter },
                Neuron { name: "B".into(), role: NeuronRole::Inter },
            ],
            vec![],
            vec![GapJunction { a: NeuronId(0), b: NeuronId(1) }],
        )
        .unwrap();
        let mut theta = ParameterVector::midpoint(&topo);
        theta.set_neuron(NeuronId(0), 0.2, 0.5, -0.080);
        theta.set_neuron(NeuronId(1), 0.2, 0.5, -0.080);
        theta.set_gap_weight(0, 2.0);
        let state = CircuitState { v: vec![-0.060, -0.030], t: 0.0 };
        let next = step_explicit_reference(&state, &topo, &theta, &ClampMap::new(), 0.001, SigmoidSign::Increasing)
            .unwrap();
        // derivatives are +0.25 and -0.425 V/s, both applied to the old state
        assert!((next.v[0] - (-0.05975)).abs() < 1e-15);
        assert!((next.v[1] - (-0.030425)).abs() < 1e-15);
    }

    #[test]
    fn clamp_validation_rejects_mismatches() {
        let topo = CircuitTopology::new(
            vec![
                Neuron { name: "S".into(), role: NeuronRole::Sensory },
                Neuron { name: "I".into(), role: NeuronRole::Inter },
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let theta = ParameterVector::midpoint(&topo);
        let state = CircuitState { v: vec![-0.070, -0.070], t: 0.0 };

        let missing = ClampMap::new();
        assert!(matches!(
            step_implicit(&state, &topo, &theta, &missing, 0.01, SigmoidSign::Increasing),
            Err(SolverError::ClampMismatch(_))
        ));

        let mut extra = ClampMap::new();
        extra.insert(NeuronId(0), -0.070);
        extra.insert(NeuronId(1), -0.070);
        assert!(matches!(
            step_implicit(&state, &topo, &theta, &extra, 0.01, SigmoidSign::Increasing),
            Err(SolverError::ClampMismatch(_))
        ));
    }

    #[test]
    fn clamped_neurons_held_exactly() {
        let topo = CircuitTopology::new(
            vec![
                Neuron { name: "S".into(), role: NeuronRole::Sensory },
                Neuron { name: "I".into(), role: NeuronRole::Inter },
            ],
            vec![crate::circuit::ChemicalSynapse {
                pre: NeuronId(0),
                post: NeuronId(1),
                polarity: crate::circuit::Polarity::Excitatory,
            }],
            vec![],
        )
        .unwrap();
        let theta = ParameterVector::midpoint(&topo);
        let mut clamps = ClampMap::new();
        clamps.insert(NeuronId(0), -0.033);
        let mut state = CircuitState { v: vec![-0.070, -0.070], t: 0.0 };
        for _ in 0..50 {
            state = step_implicit(&state, &topo, &theta, &clamps, 0.01, SigmoidSign::Increasing).unwrap();
            assert_eq!(state.v[0], -0.033);
        }
    }

    #[test]
    fn implicit_is_deterministic() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.37, 1.234, -0.0612);
        let state = CircuitState { v: vec![-0.041], t: 0.0 };
        let a = step_implicit(&state, &topo, &theta, &ClampMap::new(), 0.01, SigmoidSign::Increasing).unwrap();
        let b = step_implicit(&state, &topo, &theta, &ClampMap::new(), 0.01, SigmoidSign::Increasing).unwrap();
        assert_eq!(a.v, b.v);
        assert_eq!(a.t, b.t);
    }

    #[test]
    fn simulate_counts_states() {
        let topo = isolated();
        let theta = isolated_theta(&topo, 0.1, 1.0, -0.070);
        let state = CircuitState { v: vec![-0.020], t: 0.0 };
        let config = SolverConfig { dt: 0.01, substeps_per_env_step: 1 };

        let single = simulate(&state, &topo, &theta, &ClampMap::new(), 0.0, &config, SigmoidSign::Increasing)
            .unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0], state);

        let traj = simulate(&state, &topo, &theta, &ClampMap::new(), 10.0 * 0.01, &config, SigmoidSign::Increasing)
            .unwrap();
        assert_eq!(traj.len(), 11);
        for pair in traj.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
    }

    #[test]
    fn simulate_converges_to_steady_state_under_constant_clamps() {
        let topo = CircuitTopology::new(
            vec![
                Neuron { name: "S".into(), role: NeuronRole::Sensory },
                Neuron { name: "I".into(), role: NeuronRole::Inter },
                Neuron { name: "M".into(), role: NeuronRole::Motor },
            ],
            vec![
                crate::circuit::ChemicalSynapse {
                    pre: NeuronId(0),
                    post: NeuronId(1),
                    polarity: crate::circuit::Polarity::Excitatory,
                },
                crate::circuit::ChemicalSynapse {
                    pre: NeuronId(1),
                    post: NeuronId(2),
                    polarity: crate::circuit::Polarity::Excitatory,
                },
            ],
            vec![GapJunction { a: NeuronId(1), b: NeuronId(2) }],
        )
        .unwrap();
        let theta = ParameterVector::midpoint(&topo);
        let mut clamps = ClampMap::new();
        clamps.insert(NeuronId(0), -0.030);
        let state = CircuitState { v: vec![-0.070, -0.070, -0.070], t: 0.0 };
        let config = SolverConfig::default();
        let traj = simulate(&state, &topo, &theta, &clamps, 60.0, &config, SigmoidSign::Increasing).unwrap();
        let last = &traj[traj.len() - 1];
        let prev = &traj[traj.len() - 2];
        let dev = last
            .v
            .iter()
            .zip(&prev.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(dev < 1e-9, "successive max deviation {dev}");
    }
}
