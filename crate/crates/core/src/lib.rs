//! Deterministic model of the tap-withdrawal neural circuit of *C. elegans*,
//! re-purposed as a cart-pole controller and trained by random search.
//!
//! The pieces, bottom up:
//!
//! - [`circuit`]: leaky-integrator neurons, sigmoidal chemical synapses,
//!   ohmic gap junctions, and the wired topology.
//! - [`params`]: the bounded parameter vector the search optimizes.
//! - [`solver`]: semi-implicit fixed-step integration (plus a forward-Euler
//!   reference used as a testing oracle).
//! - [`env`]: a from-scratch inverted-pendulum-on-a-cart environment.
//! - [`mapping`]: piecewise-linear sensory and motor interfaces between
//!   environment variables and the [-70 mV, -20 mV] activity band.
//! - [`search`]: closed-loop rollouts, worst-case objective estimation, and
//!   the random-search training loop.
//! - [`wiring`], [`config`], [`checkpoint`], [`trace`], [`baseline`]:
//!   circuit description files, run configuration, resumable training state,
//!   CSV artifacts, and the PD reference controller.

pub mod baseline;
pub mod checkpoint;
pub mod circuit;
pub mod config;
pub mod env;
pub mod mapping;
pub mod params;
pub mod search;
pub mod solver;
pub mod trace;
pub mod wiring;
