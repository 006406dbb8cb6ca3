//! The optimizable parameter vector and its box constraints.
//!
//! Flattened layout, fixed by the topology's declaration order:
//! `[C_m, G_Leak, V_Leak]` per neuron, then `[weight, sigma]` per chemical
//! synapse, then `weight` per gap junction. Reversal potentials and the
//! sigmoid midpoint are fixed wiring properties, never part of the vector.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitTopology, NeuronId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn width(self) -> f64 {
        self.max - self.min
    }

    pub fn contains(self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn clamp(self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }

    pub fn midpoint(self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

/// Membrane capacitance (farads).
pub const CAPACITANCE: Bounds = Bounds { min: 1e-3, max: 1.0 };
/// Leak conductance (siemens).
pub const LEAK_CONDUCTANCE: Bounds = Bounds { min: 50e-3, max: 5.0 };
/// Leak potential (volts).
pub const LEAK_POTENTIAL: Bounds = Bounds { min: -0.090, max: 0.0 };
/// Chemical synapse maximum conductance (siemens).
pub const SYNAPSE_WEIGHT: Bounds = Bounds { min: 0.0, max: 3.0 };
/// Chemical synapse sigmoid steepness (per millivolt).
pub const SYNAPSE_SIGMA: Bounds = Bounds { min: 0.05, max: 0.5 };
/// Gap junction conductance (siemens).
pub const GAP_WEIGHT: Bounds = Bounds { min: 0.0, max: 3.0 };

const PER_NEURON: usize = 3;
const PER_SYNAPSE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Capacitance(usize),
    LeakConductance(usize),
    LeakPotential(usize),
    SynapseWeight(usize),
    SynapseSigma(usize),
    GapWeight(usize),
}

impl Component {
    pub fn bounds(self) -> Bounds {
        match self {
            Component::Capacitance(_) => CAPACITANCE,
            Component::LeakConductance(_) => LEAK_CONDUCTANCE,
            Component::LeakPotential(_) => LEAK_POTENTIAL,
            Component::SynapseWeight(_) => SYNAPSE_WEIGHT,
            Component::SynapseSigma(_) => SYNAPSE_SIGMA,
            Component::GapWeight(_) => GAP_WEIGHT,
        }
    }
}

/// Per-neuron parameters drawn out of the flattened vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    pub c_m: f64,
    pub g_leak: f64,
    pub v_leak: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter vector has {found} components, topology requires {expected}")]
    DimensionMismatch { found: usize, expected: usize },
    #[error("component {index} ({describe}) = {value} outside [{min}, {max}]")]
    OutOfBounds {
        index: usize,
        describe: String,
        value: f64,
        min: f64,
        max: f64,
    },
}

/// The optimized vector, tagged with the circuit dimensions it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    values: Vec<f64>,
    n_neurons: usize,
    n_chem: usize,
    n_gaps: usize,
}

impl ParameterVector {
    pub fn dim_for(topo: &CircuitTopology) -> usize {
        topo.n_neurons() * PER_NEURON + topo.chem().len() * PER_SYNAPSE + topo.gaps().len()
    }

    /// Every component drawn uniformly within its bounds.
    pub fn uniform_random(topo: &CircuitTopology, rng: &mut impl Rng) -> Self {
        let mut out = Self::midpoint(topo);
        for i in 0..out.dim() {
            let b = out.component(i).bounds();
            out.values[i] = rng.gen_range(b.min..=b.max);
        }
        out
    }

    /// Every component at the midpoint of its bounds.
    pub fn midpoint(topo: &CircuitTopology) -> Self {
        let n_neurons = topo.n_neurons();
        let n_chem = topo.chem().len();
        let n_gaps = topo.gaps().len();
        let mut out = Self {
            values: vec![0.0; n_neurons * PER_NEURON + n_chem * PER_SYNAPSE + n_gaps],
            n_neurons,
            n_chem,
            n_gaps,
        };
        for i in 0..out.dim() {
            out.values[i] = out.component(i).bounds().midpoint();
        }
        out
    }

    /// Rebuild a vector from its flattened values (the unflatten direction).
    pub fn from_flat(topo: &CircuitTopology, values: Vec<f64>) -> Result<Self, ParamError> {
        let expected = Self::dim_for(topo);
        if values.len() != expected {
            return Err(ParamError::DimensionMismatch {
                found: values.len(),
                expected,
            });
        }
        let out = Self {
            values,
            n_neurons: topo.n_neurons(),
            n_chem: topo.chem().len(),
            n_gaps: topo.gaps().len(),
        };
        out.check_bounds()?;
        Ok(out)
    }

    /// The flattened values (the flatten direction).
    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn matches(&self, topo: &CircuitTopology) -> bool {
        self.n_neurons == topo.n_neurons()
            && self.n_chem == topo.chem().len()
            && self.n_gaps == topo.gaps().len()
    }

    pub fn component(&self, index: usize) -> Component {
        let neuron_span = self.n_neurons * PER_NEURON;
        let chem_span = self.n_chem * PER_SYNAPSE;
        if index < neuron_span {
            match index % PER_NEURON {
                0 => Component::Capacitance(index / PER_NEURON),
                1 => Component::LeakConductance(index / PER_NEURON),
                _ => Component::LeakPotential(index / PER_NEURON),
            }
        } else if index < neuron_span + chem_span {
            let rel = index - neuron_span;
            if rel % PER_SYNAPSE == 0 {
                Component::SynapseWeight(rel / PER_SYNAPSE)
            } else {
                Component::SynapseSigma(rel / PER_SYNAPSE)
            }
        } else {
            Component::GapWeight(index - neuron_span - chem_span)
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        self.values[index] = value;
    }

    pub fn neuron(&self, id: NeuronId) -> NeuronParams {
        let base = id.0 * PER_NEURON;
        NeuronParams {
            c_m: self.values[base],
            g_leak: self.values[base + 1],
            v_leak: self.values[base + 2],
        }
    }

    pub fn set_neuron(&mut self, id: NeuronId, c_m: f64, g_leak: f64, v_leak: f64) {
        let base = id.0 * PER_NEURON;
        self.values[base] = c_m;
        self.values[base + 1] = g_leak;
        self.values[base + 2] = v_leak;
    }

    pub fn chem_weight(&self, syn: usize) -> f64 {
        self.values[self.n_neurons * PER_NEURON + syn * PER_SYNAPSE]
    }

    pub fn chem_sigma(&self, syn: usize) -> f64 {
        self.values[self.n_neurons * PER_NEURON + syn * PER_SYNAPSE + 1]
    }

    pub fn set_chem(&mut self, syn: usize, weight: f64, sigma: f64) {
        let base = self.n_neurons * PER_NEURON + syn * PER_SYNAPSE;
        self.values[base] = weight;
        self.values[base + 1] = sigma;
    }

    pub fn gap_weight(&self, gap: usize) -> f64 {
        self.values[self.n_neurons * PER_NEURON + self.n_chem * PER_SYNAPSE + gap]
    }

    pub fn set_gap_weight(&mut self, gap: usize, weight: f64) {
        let base = self.n_neurons * PER_NEURON + self.n_chem * PER_SYNAPSE;
        self.values[base + gap] = weight;
    }

    pub fn check_bounds(&self) -> Result<(), ParamError> {
        for (i, &value) in self.values.iter().enumerate() {
            let c = self.component(i);
            let b = c.bounds();
            if !b.contains(value) {
                return Err(ParamError::OutOfBounds {
                    index: i,
                    describe: format!("{c:?}"),
                    value,
                    min: b.min,
                    max: b.max,
                });
            }
        }
        Ok(())
    }

    pub fn within_bounds(&self) -> bool {
        self.check_bounds().is_ok()
    }
}
