//! Discrete-time simulation of a central chilled water plant: an aggregate
//! cooling coil, a stratified chilled-water thermal energy storage tank,
//! heterogeneous electric chillers and variable-speed cooling towers, tied
//! together by primary-secondary chilled water and cooling water loops.
//!
//! The distinguishing feature of the component models is that every heat
//! exchanger's capacity is enforced through small bounded optimization
//! problems solved at each step, so states stay physically plausible even
//! when control inputs are far outside normal operating range. That makes
//! the model safe to use as an offline environment for learning-based
//! supervisory controllers, which explore aggressively during training.
//!
//! Units throughout: temperatures in °C, flow rates in kg/s, heat rates and
//! electric power in kW, energy in kWh, time in seconds.

// Parameter checks use the negated form (`!(x > 0.0)`) so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chiller;
pub mod coil;
pub mod controller;
pub mod core;
pub mod error;
pub mod io;
pub mod loops;
pub mod optim;
pub mod plant;
pub mod sim;
pub mod tes;
pub mod tower;

pub use error::ModelError;
