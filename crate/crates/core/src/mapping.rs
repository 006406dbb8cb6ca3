//! Piecewise-linear translation between environment variables and the
//! [-70 mV, -20 mV] neuron activity band.
//!
//! Each observed variable feeds a pair of sensory neurons: the positive
//! neuron ramps up over `(0, x_max]`, the negative neuron over `[x_min, 0)`,
//! and both rest at -70 mV on their inactive side. The motor readout is the
//! mirror image: each motor neuron's potential ramps its half of the action
//! range, and the two halves are summed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitTopology, NeuronId, NeuronRole};
use crate::env::Observation;
use crate::solver::ClampMap;

/// Resting potential of the activity band (volts).
pub const POTENTIAL_REST: f64 = -0.070;
/// Fully-active potential of the activity band (volts).
pub const POTENTIAL_ACTIVE: f64 = -0.020;
/// Width of the activity band (volts).
pub const POTENTIAL_SPAN: f64 = POTENTIAL_ACTIVE - POTENTIAL_REST;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservedVariable {
    Phi,
    PhiDot,
}

impl ObservedVariable {
    pub fn extract(self, obs: &Observation) -> f64 {
        match self {
            ObservedVariable::Phi => obs.phi(),
            ObservedVariable::PhiDot => obs.phi_dot,
        }
    }
}

/// One observed variable driving a (positive, negative) sensory neuron pair
/// over the range `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensoryMapping {
    pub variable: ObservedVariable,
    pub pos_neuron: NeuronId,
    pub neg_neuron: NeuronId,
    pub x_min: f64,
    pub x_max: f64,
}

/// The (positive, negative) motor neuron pair producing an action in
/// `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorMapping {
    pub pos_neuron: NeuronId,
    pub neg_neuron: NeuronId,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MappingError {
    #[error("mapping range must satisfy min < 0 < max, got [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("neuron `{0}` mapped more than once")]
    DoublyMapped(String),
    #[error("sensory neuron `{0}` is not mapped")]
    UnmappedSensory(String),
    #[error("neuron `{0}` does not have the {1} role required by the mapping")]
    WrongRole(String, &'static str),
    #[error("mapping pairs neuron `{0}` with itself")]
    SelfPair(String),
}

/// Potential of the positive-side sensory neuron (Eq. 1 shape): rest at or
/// below zero, linear up to the fully-active potential at `x_max`, saturated
/// beyond.
pub fn sensory_positive(x: f64, m: &SensoryMapping) -> f64 {
    if x <= 0.0 {
        POTENTIAL_REST
    } else if x >= m.x_max {
        POTENTIAL_ACTIVE
    } else {
        POTENTIAL_REST + POTENTIAL_SPAN * (x / m.x_max)
    }
}

/// Mirror image of [`sensory_positive`] over `[x_min, 0]`.
pub fn sensory_negative(x: f64, m: &SensoryMapping) -> f64 {
    if x >= 0.0 {
        POTENTIAL_REST
    } else if x <= m.x_min {
        POTENTIAL_ACTIVE
    } else {
        POTENTIAL_REST + POTENTIAL_SPAN * (x / m.x_min)
    }
}

/// Action produced by the motor pair: the positive neuron ramps `[0, y_max]`,
/// the negative neuron ramps `[0, y_min]`, and the halves are summed.
pub fn motor_output(m_p: f64, m_n: f64, m: &MotorMapping) -> f64 {
    ramp(m_p, m.y_max) + ramp(m_n, m.y_min)
}

fn ramp(potential: f64, y_sat: f64) -> f64 {
    if potential <= POTENTIAL_REST {
        0.0
    } else if potential >= POTENTIAL_ACTIVE {
        y_sat
    } else {
        y_sat * (potential - POTENTIAL_REST) / POTENTIAL_SPAN
    }
}

fn validate_range(min: f64, max: f64) -> Result<(), MappingError> {
    if !(min < 0.0 && 0.0 < max) || !min.is_finite() || !max.is_finite() {
        return Err(MappingError::InvalidRange(min, max));
    }
    Ok(())
}

/// Check a sensory mapping set against a topology: every sensory neuron is
/// driven by exactly one mapping slot, every slot names a sensory neuron, and
/// ranges straddle zero.
pub fn validate_sensory_mappings(
    mappings: &[SensoryMapping],
    topo: &CircuitTopology,
) -> Result<(), MappingError> {
    let mut seen = BTreeMap::new();
    for m in mappings {
        validate_range(m.x_min, m.x_max)?;
        if m.pos_neuron == m.neg_neuron {
            return Err(MappingError::SelfPair(topo.name(m.pos_neuron).to_string()));
        }
        for id in [m.pos_neuron, m.neg_neuron] {
            if topo.role(id) != NeuronRole::Sensory {
                return Err(MappingError::WrongRole(topo.name(id).to_string(), "sensory"));
            }
            if seen.insert(id, ()).is_some() {
                return Err(MappingError::DoublyMapped(topo.name(id).to_string()));
            }
        }
    }
    for id in topo.sensory_ids() {
        if !seen.contains_key(&id) {
            return Err(MappingError::UnmappedSensory(topo.name(id).to_string()));
        }
    }
    Ok(())
}

pub fn validate_motor_mapping(m: &MotorMapping, topo: &CircuitTopology) -> Result<(), MappingError> {
    validate_range(m.y_min, m.y_max)?;
    if m.pos_neuron == m.neg_neuron {
        return Err(MappingError::SelfPair(topo.name(m.pos_neuron).to_string()));
    }
    for id in [m.pos_neuron, m.neg_neuron] {
        if topo.role(id) != NeuronRole::Motor {
            return Err(MappingError::WrongRole(topo.name(id).to_string(), "motor"));
        }
    }
    Ok(())
}

/// Clamp potentials for every sensory neuron, validating mapping coverage.
pub fn clamp_sensory(
    obs: &Observation,
    mappings: &[SensoryMapping],
    topo: &CircuitTopology,
) -> Result<ClampMap, MappingError> {
    validate_sensory_mappings(mappings, topo)?;
    Ok(clamp_sensory_unchecked(obs, mappings))
}

fn clamp_sensory_unchecked(obs: &Observation, mappings: &[SensoryMapping]) -> ClampMap {
    let mut clamps = ClampMap::new();
    for m in mappings {
        let x = m.variable.extract(obs);
        clamps.insert(m.pos_neuron, sensory_positive(x, m));
        clamps.insert(m.neg_neuron, sensory_negative(x, m));
    }
    clamps
}

/// A validated sensory + motor interface bound to one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    sensory: Vec<SensoryMapping>,
    motor: MotorMapping,
}

impl Interface {
    pub fn new(
        sensory: Vec<SensoryMapping>,
        motor: MotorMapping,
        topo: &CircuitTopology,
    ) -> Result<Self, MappingError> {
        validate_sensory_mappings(&sensory, topo)?;
        validate_motor_mapping(&motor, topo)?;
        Ok(Self { sensory, motor })
    }

    pub fn sensory(&self) -> &[SensoryMapping] {
        &self.sensory
    }

    pub fn motor(&self) -> &MotorMapping {
        &self.motor
    }

    pub fn clamps(&self, obs: &Observation) -> ClampMap {
        clamp_sensory_unchecked(obs, &self.sensory)
    }

    pub fn action(&self, v: &[f64]) -> f64 {
        motor_output(v[self.motor.pos_neuron.0], v[self.motor.neg_neuron.0], &self.motor)
    }
}
