//! Neuron, chemical-synapse and gap-junction models for a wired circuit.
//!
//! Neurons follow a continuous leaky-integrator membrane equation (no
//! spike/reset): `C_m dv/dt = G_Leak (V_Leak - v) + sum of input currents`.
//! Chemical synapses contribute `g(V_pre) * (E_rev - V_post)` where the
//! conductance is a logistic function of the presynaptic potential, and gap
//! junctions contribute an ohmic `w * (v_other - v_self)`.
//!
//! All potentials are stored in volts. The synaptic steepness `sigma` is
//! dimensioned per millivolt (see [`chemical_conductance`]), which is the
//! scale at which the [0.05, 0.5] steepness range produces a usable sigmoid
//! over the [-70 mV, -20 mV] activity band.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ParameterVector;

/// Reversal potential of an excitatory chemical synapse (volts).
pub const E_REV_EXCITATORY: f64 = 0.0;
/// Reversal potential of an inhibitory chemical synapse (volts).
pub const E_REV_INHIBITORY: f64 = -0.090;
/// Midpoint of the synaptic activation sigmoid (volts). Fixed, not optimized.
pub const SIGMOID_MIDPOINT: f64 = -0.040;

/// Sanity envelope for non-clamped membrane potentials (volts). Leaving it
/// signals numerical blow-up, not normal dynamics.
pub const POTENTIAL_ENVELOPE: (f64, f64) = (-0.110, 0.020);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeuronId(pub usize);

impl std::fmt::Display for NeuronId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronRole {
    /// Potential is clamped from the environment; no intrinsic dynamics.
    Sensory,
    Inter,
    /// Read out by the motor mapping; must not have outgoing chemical synapses.
    Motor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}

impl Polarity {
    pub fn reversal_potential(self) -> f64 {
        match self {
            Polarity::Excitatory => E_REV_EXCITATORY,
            Polarity::Inhibitory => E_REV_INHIBITORY,
        }
    }
}

/// Direction of the synaptic activation sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmoidSign {
    /// Conductance grows as the presynaptic neuron depolarizes (default).
    #[default]
    Increasing,
    /// Conductance shrinks as the presynaptic neuron depolarizes.
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neuron {
    pub name: String,
    pub role: NeuronRole,
}

/// Directed chemical synapse. Its conductance and steepness live in the
/// optimized [`ParameterVector`]; the wiring only fixes endpoints and polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChemicalSynapse {
    pub pre: NeuronId,
    pub post: NeuronId,
    pub polarity: Polarity,
}

/// Bidirectional ohmic coupling; the endpoint pair is unordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapJunction {
    pub a: NeuronId,
    pub b: NeuronId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("duplicate neuron name `{0}`")]
    DuplicateName(String),
    #[error("empty neuron name")]
    EmptyName,
    #[error("edge references neuron id {0} but only {1} neurons are declared")]
    EndpointOutOfRange(usize, usize),
    #[error("chemical synapse connects `{0}` to itself")]
    ChemSelfLoop(String),
    #[error("gap junction connects `{0}` to itself")]
    GapSelfLoop(String),
    #[error("chemical synapse targets sensory neuron `{0}`")]
    ChemIntoSensory(String),
    #[error("chemical synapse leaves motor neuron `{0}`")]
    ChemOutOfMotor(String),
    #[error("gap junction touches sensory neuron `{0}`")]
    GapOnSensory(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("neuron `{0}` is sensory; clamped neurons have no intrinsic dynamics")]
    SensoryDerivative(String),
}

/// Immutable wiring of a circuit: neurons with roles, chemical synapses with
/// polarity, gap junctions. Validated on construction; sensory neurons accept
/// no incoming edges of either kind and motor neurons have no outgoing
/// chemical synapses.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTopology {
    neurons: Vec<Neuron>,
    chem: Vec<ChemicalSynapse>,
    gaps: Vec<GapJunction>,
    // adjacency, precomputed for the solver hot path
    incoming_chem: Vec<Vec<usize>>,
    incident_gaps: Vec<Vec<usize>>,
}

impl CircuitTopology {
    pub fn new(
        neurons: Vec<Neuron>,
        chem: Vec<ChemicalSynapse>,
        gaps: Vec<GapJunction>,
    ) -> Result<Self, TopologyError> {
        let n = neurons.len();
        let mut seen = std::collections::HashSet::new();
        for neuron in &neurons {
            if neuron.name.is_empty() {
                return Err(TopologyError::EmptyName);
            }
            if !seen.insert(neuron.name.clone()) {
                return Err(TopologyError::DuplicateName(neuron.name.clone()));
            }
        }
        let check = |id: NeuronId| {
            if id.0 >= n {
                Err(TopologyError::EndpointOutOfRange(id.0, n))
            } else {
                Ok(())
            }
        };
        for syn in &chem {
            check(syn.pre)?;
            check(syn.post)?;
            if syn.pre == syn.post {
                return Err(TopologyError::ChemSelfLoop(neurons[syn.pre.0].name.clone()));
            }
            if neurons[syn.post.0].role == NeuronRole::Sensory {
                return Err(TopologyError::ChemIntoSensory(
                    neurons[syn.post.0].name.clone(),
                ));
            }
            if neurons[syn.pre.0].role == NeuronRole::Motor {
                return Err(TopologyError::ChemOutOfMotor(
                    neurons[syn.pre.0].name.clone(),
                ));
            }
        }
        for gj in &gaps {
            check(gj.a)?;
            check(gj.b)?;
            if gj.a == gj.b {
                return Err(TopologyError::GapSelfLoop(neurons[gj.a.0].name.clone()));
            }
            for end in [gj.a, gj.b] {
                if neurons[end.0].role == NeuronRole::Sensory {
                    return Err(TopologyError::GapOnSensory(neurons[end.0].name.clone()));
                }
            }
        }
        let mut incoming_chem = vec![Vec::new(); n];
        for (j, syn) in chem.iter().enumerate() {
            incoming_chem[syn.post.0].push(j);
        }
        let mut incident_gaps = vec![Vec::new(); n];
        for (j, gj) in gaps.iter().enumerate() {
            incident_gaps[gj.a.0].push(j);
            incident_gaps[gj.b.0].push(j);
        }
        Ok(Self {
            neurons,
            chem,
            gaps,
            incoming_chem,
            incident_gaps,
        })
    }

    pub fn n_neurons(&self) -> usize {
        self.neurons.len()
    }

    pub fn neurons(&self) -> &[Neuron] {
        &self.neurons
    }

    pub fn chem(&self) -> &[ChemicalSynapse] {
        &self.chem
    }

    pub fn gaps(&self) -> &[GapJunction] {
        &self.gaps
    }

    pub fn name(&self, id: NeuronId) -> &str {
        &self.neurons[id.0].name
    }

    pub fn role(&self, id: NeuronId) -> NeuronRole {
        self.neurons[id.0].role
    }

    pub fn neuron_id(&self, name: &str) -> Option<NeuronId> {
        self.neurons
            .iter()
            .position(|n| n.name == name)
            .map(NeuronId)
    }

    pub fn ids(&self) -> impl Iterator<Item = NeuronId> {
        (0..self.neurons.len()).map(NeuronId)
    }

    pub fn sensory_ids(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.ids()
            .filter(|id| self.role(*id) == NeuronRole::Sensory)
    }

    /// Indices into `chem()` of synapses terminating on `id`.
    pub fn incoming_chem(&self, id: NeuronId) -> &[usize] {
        &self.incoming_chem[id.0]
    }

    /// Indices into `gaps()` of junctions touching `id`.
    pub fn incident_gaps(&self, id: NeuronId) -> &[usize] {
        &self.incident_gaps[id.0]
    }
}

/// Membrane potentials of every neuron (volts) at elapsed time `t` (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitState {
    pub v: Vec<f64>,
    pub t: f64,
}

impl CircuitState {
    /// Resting state: non-sensory neurons at their leak potential, sensory
    /// neurons at the rest end of the activity band (they are clamped on the
    /// first step anyway).
    pub fn resting(topo: &CircuitTopology, theta: &ParameterVector) -> Self {
        let v = topo
            .ids()
            .map(|id| match topo.role(id) {
                NeuronRole::Sensory => crate::mapping::POTENTIAL_REST,
                _ => theta.neuron(id).v_leak,
            })
            .collect();
        Self { v, t: 0.0 }
    }
}

/// Synaptic conductance as a function of the presynaptic potential.
///
/// Logistic in `v_pre`, centred at [`SIGMOID_MIDPOINT`], with `sigma`
/// applied to the potential expressed in millivolts. Bounded in `[0, weight]`
/// for every input, including infinite potentials.
pub fn chemical_conductance(v_pre: f64, weight: f64, sigma: f64, sign: SigmoidSign) -> f64 {
    let activation_mv = (v_pre - SIGMOID_MIDPOINT) * 1000.0;
    let exponent = match sign {
        SigmoidSign::Increasing => -sigma * activation_mv,
        SigmoidSign::Decreasing => sigma * activation_mv,
    };
    weight / (1.0 + exponent.exp())
}

/// Current injected into the postsynaptic neuron by a chemical synapse.
pub fn chemical_current(
    v_pre: f64,
    v_post: f64,
    weight: f64,
    sigma: f64,
    e_rev: f64,
    sign: SigmoidSign,
) -> f64 {
    chemical_conductance(v_pre, weight, sigma, sign) * (e_rev - v_post)
}

/// Current flowing into the `self` side of a gap junction. Antisymmetric
/// under swapping the two potentials.
pub fn gap_current(v_self: f64, v_other: f64, weight: f64) -> f64 {
    weight * (v_other - v_self)
}

/// Rate of change of a non-sensory neuron's membrane potential (volts/second):
/// leak plus all incoming chemical currents plus all incident gap currents,
/// divided by the membrane capacitance.
pub fn membrane_derivative(
    id: NeuronId,
    state: &CircuitState,
    topo: &CircuitTopology,
    theta: &ParameterVector,
    sign: SigmoidSign,
) -> Result<f64, CircuitError> {
    if topo.role(id) == NeuronRole::Sensory {
        return Err(CircuitError::SensoryDerivative(topo.name(id).to_string()));
    }
    let np = theta.neuron(id);
    let v = state.v[id.0];
    let mut current = np.g_leak * (np.v_leak - v);
    for &j in topo.incoming_chem(id) {
        let syn = topo.chem()[j];
        current += chemical_current(
            state.v[syn.pre.0],
            v,
            theta.chem_weight(j),
            theta.chem_sigma(j),
            syn.polarity.reversal_potential(),
            sign,
        );
    }
    for &j in topo.incident_gaps(id) {
        let gj = topo.gaps()[j];
        let other = if gj.a == id { gj.b } else { gj.a };
        current += gap_current(v, state.v[other.0], theta.gap_weight(j));
    }
    Ok(current / np.c_m)
}
