//! Aggregate cooling coil.
//!
//! A single coil stands in for all air-handling-unit coils served by the
//! chilled water loop. It delivers the demanded cooling up to a capacity
//! limited by the chilled water flow and the maximum allowable outlet water
//! temperature, with first-order return-temperature dynamics. Capping the
//! outlet temperature is what enforces the heat exchanger's capacity: when
//! the load exceeds it, only the maximum possible heat transfer is
//! delivered.

use crate::core::{FilterCoeff, SimConstants, MIN_FLOW};
use crate::error::ModelError;

/// Aggregate coil parameters.
#[derive(Debug, Clone, Copy)]
pub struct CoilParams {
    /// Return-temperature filter coefficient.
    pub a_cc: FilterCoeff,
    /// Maximum allowable outlet (load water return) temperature, °C.
    pub t_lwr_ub: f64,
    /// Maximum chilled water flow through the coil piping, kg/s.
    pub mdot_lw_ub: f64,
}

impl CoilParams {
    pub fn new(a_cc: FilterCoeff, t_lwr_ub: f64, mdot_lw_ub: f64) -> Result<Self, ModelError> {
        if !t_lwr_ub.is_finite() {
            return Err(ModelError::invalid_param(
                "coil outlet bound must be finite",
            ));
        }
        if !(mdot_lw_ub > 0.0) {
            return Err(ModelError::invalid_param(format!(
                "coil flow bound must be positive, got {mdot_lw_ub}"
            )));
        }
        Ok(CoilParams {
            a_cc,
            t_lwr_ub,
            mdot_lw_ub,
        })
    }
}

/// Coil state: load water return temperature, °C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilState {
    pub t_lwr: f64,
}

/// Commanded coil inputs.
#[derive(Debug, Clone, Copy)]
pub struct CoilInput {
    /// Load water supply temperature, °C.
    pub t_lws: f64,
    /// Chilled water flow through the coil, kg/s.
    pub mdot_lw: f64,
}

/// Exogenous cooling demand on the coil, kW.
#[derive(Debug, Clone, Copy)]
pub struct CoilDisturbance {
    pub qdot_load: f64,
}

/// One-step result: next state and the cooling actually delivered.
#[derive(Debug, Clone, Copy)]
pub struct CoilResult {
    pub next: CoilState,
    /// Cooling delivered, kW; never exceeds the demand or the capacity.
    pub qdot_cc: f64,
}

/// Validates the coil input constraints: no heating in the coil, demand
/// nonnegative, and flow within `(0, mdot_lw_ub]`.
pub fn validate_input(
    p: &CoilParams,
    u: &CoilInput,
    w: &CoilDisturbance,
) -> Result<(), ModelError> {
    if !(u.t_lws <= p.t_lwr_ub) {
        return Err(ModelError::infeasible(format!(
            "coil supply temperature {} exceeds outlet bound {} (would heat the coil)",
            u.t_lws, p.t_lwr_ub
        )));
    }
    if !(w.qdot_load >= 0.0) {
        return Err(ModelError::infeasible(format!(
            "cooling load must be nonnegative, got {}",
            w.qdot_load
        )));
    }
    if !(u.mdot_lw >= MIN_FLOW) {
        return Err(ModelError::infeasible(format!(
            "coil flow {} below minimum {MIN_FLOW} kg/s",
            u.mdot_lw
        )));
    }
    if u.mdot_lw > p.mdot_lw_ub {
        return Err(ModelError::infeasible(format!(
            "coil flow {} exceeds pipe bound {}",
            u.mdot_lw, p.mdot_lw_ub
        )));
    }
    Ok(())
}

/// Maximum possible heat exchange rate at the coil for the given input, kW:
/// `c_pw · ṁ · (T_outlet_bound − T_supply)`.
pub fn coil_capacity(c: &SimConstants, p: &CoilParams, u: &CoilInput) -> f64 {
    c.c_pw * u.mdot_lw * (p.t_lwr_ub - u.t_lws)
}

/// Steps the coil one sampling period.
pub fn coil_step(
    c: &SimConstants,
    p: &CoilParams,
    x: &CoilState,
    u: &CoilInput,
    w: &CoilDisturbance,
) -> Result<CoilResult, ModelError> {
    validate_input(p, u, w)?;
    let qdot_cc = w.qdot_load.min(coil_capacity(c, p, u));
    let target = qdot_cc / (c.c_pw * u.mdot_lw) + u.t_lws;
    Ok(CoilResult {
        next: CoilState {
            t_lwr: p.a_cc.lowpass(x.t_lwr, target),
        },
        qdot_cc,
    })
}
