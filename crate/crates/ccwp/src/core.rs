//! Shared physical constants, the first-order low-pass update used by every
//! dynamic equation, and the simulation time grid.
//!
//! Unit conventions: temperatures in °C, flows in kg/s, heat rates and power
//! in kW. The specific heat of water is carried in kJ/(kg·K) so that
//! `q̇ = c_pw · ṁ · ΔT` lands in kW with no conversion factors.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Specific heat of water, kJ/(kg·K).
pub const DEFAULT_C_PW: f64 = 4.186;

/// Default sampling period, seconds. Resolves the fastest filter dynamics
/// while keeping a 3-day run at 4320 steps.
pub const DEFAULT_T_S: f64 = 60.0;

/// Smallest water flow accepted by the feasibility layer, kg/s. Flows below
/// this are rejected rather than clamped.
pub const MIN_FLOW: f64 = 1e-6;

/// Physical constants and the sampling period shared by all equipment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConstants {
    /// Specific heat of water, kJ/(kg·K).
    pub c_pw: f64,
    /// Sampling period, seconds.
    pub t_s: f64,
}

impl SimConstants {
    pub fn new(c_pw: f64, t_s: f64) -> Result<Self, ModelError> {
        if !(c_pw > 0.0) || !c_pw.is_finite() {
            return Err(ModelError::invalid_param(format!(
                "specific heat must be positive, got {c_pw}"
            )));
        }
        if !(t_s > 0.0) || !t_s.is_finite() {
            return Err(ModelError::invalid_param(format!(
                "sampling period must be positive, got {t_s}"
            )));
        }
        Ok(SimConstants { c_pw, t_s })
    }
}

impl Default for SimConstants {
    fn default() -> Self {
        SimConstants {
            c_pw: DEFAULT_C_PW,
            t_s: DEFAULT_T_S,
        }
    }
}

/// First-order low-pass filter coefficient `a ∈ [0, 1)`.
///
/// `a = 0` is a zero-memory (instantaneous) response; values approaching 1
/// respond ever more slowly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FilterCoeff(f64);

impl FilterCoeff {
    /// Instantaneous response (no memory of the previous state).
    pub const INSTANT: FilterCoeff = FilterCoeff(0.0);

    pub fn new(a: f64) -> Result<Self, ModelError> {
        if !a.is_finite() || !(0.0..1.0).contains(&a) {
            return Err(ModelError::invalid_param(format!(
                "filter coefficient must lie in [0, 1), got {a}"
            )));
        }
        Ok(FilterCoeff(a))
    }

    /// Coefficient `exp(−t_s/τ)` for a process with time constant `τ`
    /// seconds sampled every `t_s` seconds. `τ = 0` gives an instantaneous
    /// response.
    pub fn from_time_constant(tau_s: f64, t_s: f64) -> Result<Self, ModelError> {
        if !tau_s.is_finite() || tau_s < 0.0 {
            return Err(ModelError::invalid_param(format!(
                "time constant must be nonnegative, got {tau_s}"
            )));
        }
        if !t_s.is_finite() || t_s <= 0.0 {
            return Err(ModelError::invalid_param(format!(
                "sampling period must be positive, got {t_s}"
            )));
        }
        if tau_s == 0.0 {
            return Ok(FilterCoeff(0.0));
        }
        FilterCoeff::new((-t_s / tau_s).exp())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// One filtered update toward `target`.
    pub fn lowpass(self, prev: f64, target: f64) -> f64 {
        lowpass(self, prev, target)
    }
}

/// First-order update `a·prev + (1−a)·target`.
///
/// A convex combination: the result always lies between `prev` and `target`,
/// and iterating with a fixed target converges geometrically with ratio `a`.
pub fn lowpass(a: FilterCoeff, prev: f64, target: f64) -> f64 {
    a.0 * prev + (1.0 - a.0) * target
}
