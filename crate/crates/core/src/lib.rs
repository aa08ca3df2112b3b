//! Photon-gas optomechanical piston.
//!
//! Two photon gases, one in each half of a cavity, tunnel through a
//! partially transmissive membrane whose position couples to the photon
//! number imbalance. This crate provides
//!
//! * [`model`]: parameter sets, initial-state specifications, scenario files;
//! * [`statistics`]: initial photon-number moments of the gases;
//! * [`response`]: the membrane's driven, damped oscillator response;
//! * [`analytic`]: first-order-in-coupling observables in closed form;
//! * [`oracle`]: exact propagation on a truncated occupation basis.
//!
//! All quantities use ħ = 1; rates are angular frequencies in s⁻¹ and
//! energies are reported in the same units.

pub mod analytic;
pub mod config;
pub mod error;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod response;
pub mod statistics;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    paper_params, validate, Engine, GasFamily, GasSpec, MembraneSpec, Observable, ScenarioConfig,
    SystemParams, TimeGrid, TimeSeries, ValidatedScenario,
};
