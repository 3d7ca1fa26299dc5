//! Water-cooled electric chiller with condenser saturation.
//!
//! The model follows the familiar electric EIR structure: empirical
//! biquadratic capacity and energy-input-ratio curves, a quadratic
//! part-load curve, and cycling below minimum part load. Evaporator and
//! condenser outlet temperatures respond with first-order dynamics.
//!
//! What the evaporator actually absorbs each step is decided by a small
//! bounded optimization: pick the evaporator heat rate in
//! `[0, min(required, capacity)]` that brings the chilled water supply as
//! close as possible to its setpoint, subject to the condenser return
//! temperature staying at or below its hard bound. That last constraint is
//! the saturation feature: without it (the legacy mode kept here for
//! comparison) a starved condenser water stream is predicted to leave at
//! arbitrarily high temperatures.

use crate::core::{FilterCoeff, SimConstants};
use crate::error::ModelError;
use crate::optim::{minimize_scalar, solve_monotone_threshold, Bracket, SolverSettings};

/// Whether the condenser outlet bound is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChillerMode {
    /// Condenser return temperature capped at its upper bound.
    Saturated,
    /// No condenser cap; reproduces the blow-up of the unmodified model.
    LegacyUnsaturated,
}

/// Chiller parameters: nominals, performance-curve coefficients, bounds,
/// filter coefficients, and the pump model.
#[derive(Debug, Clone)]
pub struct ChillerParams {
    /// Nominal evaporator capacity, kW.
    pub qdot_evap_nom: f64,
    /// Nominal electric power at reference conditions, kW.
    pub p_ch_nom: f64,
    /// Capacity modifier curve (biquadratic in supply/condenser-entering
    /// temperatures).
    pub cap_ft: [f64; 6],
    /// Energy-input-ratio modifier curve (same biquadratic form).
    pub eir_ft: [f64; 6],
    /// Energy-input-ratio part-load curve (quadratic in PLR).
    pub eir_fplr: [f64; 3],
    /// Minimum part load ratio; below it the chiller cycles.
    pub plr_lb: f64,
    /// Maximum part load ratio.
    pub plr_ub: f64,
    /// Fraction of electric power rejected as condenser waste heat.
    pub eta_waste_heat: f64,
    /// Evaporator outlet filter coefficient.
    pub a_ch: FilterCoeff,
    /// Condenser outlet filter coefficient.
    pub a_cd: FilterCoeff,
    /// Minimum chilled water supply setpoint, °C.
    pub t_chws_lb: f64,
    /// Hard bound on condenser return temperature, °C.
    pub t_cdwr_ub: f64,
    /// Nominal chilled water flow (primary pumping runs at this), kg/s.
    pub mdot_chw_nom: f64,
    /// Nominal condenser water flow, kg/s.
    pub mdot_cd_nom: f64,
    /// Chilled water pump coefficients for `a1·ln(1+a2·ṁ) + a3·ṁ + a4`.
    pub pump_a: [f64; 4],
    pub mode: ChillerMode,
}

impl ChillerParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.qdot_evap_nom > 0.0) {
            return Err(ModelError::invalid_param(format!(
                "nominal capacity must be positive, got {}",
                self.qdot_evap_nom
            )));
        }
        if !(self.p_ch_nom >= 0.0) {
            return Err(ModelError::invalid_param(
                "nominal power must be nonnegative",
            ));
        }
        if !(0.0 < self.plr_lb && self.plr_lb <= self.plr_ub) {
            return Err(ModelError::invalid_param(format!(
                "part-load bounds must satisfy 0 < lb <= ub, got [{}, {}]",
                self.plr_lb, self.plr_ub
            )));
        }
        if !(self.eta_waste_heat >= 0.0) {
            return Err(ModelError::invalid_param(
                "waste-heat fraction must be nonnegative",
            ));
        }
        if !(self.mdot_chw_nom > 0.0) || !(self.mdot_cd_nom > 0.0) {
            return Err(ModelError::invalid_param("nominal flows must be positive"));
        }
        Ok(())
    }
}

/// Chiller state: evaporator and condenser outlet temperatures, °C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChillerState {
    pub t_chws: f64,
    pub t_cdwr: f64,
}

/// Commanded chiller inputs.
#[derive(Debug, Clone, Copy)]
pub struct ChillerInput {
    /// Chilled water return temperature entering the evaporator, °C.
    pub t_chwr: f64,
    /// Chilled water flow through the evaporator, kg/s.
    pub mdot_chw: f64,
    /// Cooling water temperature entering the condenser, °C.
    pub t_cdws: f64,
    /// Cooling water flow through the condenser, kg/s.
    pub mdot_cd: f64,
    /// Chilled water supply setpoint, °C.
    pub t_chws_set: f64,
}

/// One-step result.
#[derive(Debug, Clone, Copy)]
pub struct ChillerResult {
    pub next: ChillerState,
    /// Heat absorbed at the evaporator, kW.
    pub qdot_evap: f64,
    /// Heat rejected at the condenser, kW.
    pub qdot_cond: f64,
    /// Chiller electric power, kW.
    pub p_ch: f64,
    /// Chilled water pump electric power, kW.
    pub p_chwp: f64,
    /// False when infeasible inputs forced the refrigerant loop inoperative
    /// and both water streams passed through unchanged.
    pub refrigerant_active: bool,
}

fn biquadratic(c: &[f64; 6], x: f64, y: f64) -> f64 {
    c[0] + c[1] * x + c[2] * x * x + c[3] * y + c[4] * y * y + c[5] * x * y
}

/// Capacity modifier as a function of chilled water supply and condenser
/// entering temperatures, clamped below at zero (negative capacity is
/// non-physical).
pub fn cap_fun_t(alpha: &[f64; 6], t_chws: f64, t_cdws: f64) -> f64 {
    biquadratic(alpha, t_chws, t_cdws).max(0.0)
}

/// Energy-input-ratio temperature modifier, clamped below at zero.
pub fn eir_fun_t(beta: &[f64; 6], t_chws: f64, t_cdws: f64) -> f64 {
    biquadratic(beta, t_chws, t_cdws).max(0.0)
}

/// Part load ratio (clamped to its bounds) and cycling ratio.
///
/// The cycling ratio uses the raw, unclamped ratio: once demand falls below
/// the minimum part load the chiller cycles, and the power scales with the
/// fraction of the period it runs. Computing it from the clamped PLR would
/// pin the cycling ratio at one and keep zero-load power from vanishing.
pub fn plr_and_cycling(
    qdot_evap: f64,
    qdot_evap_ub: f64,
    plr_lb: f64,
    plr_ub: f64,
) -> Result<(f64, f64), ModelError> {
    if !(qdot_evap_ub > 0.0) {
        return Err(ModelError::invalid_param(format!(
            "evaporator capacity must be positive, got {qdot_evap_ub}"
        )));
    }
    let raw = qdot_evap / qdot_evap_ub;
    let plr = raw.clamp(plr_lb, plr_ub);
    let cr = (raw / plr_lb).min(1.0);
    Ok((plr, cr))
}

/// Electric power draw: nominal power scaled by the capacity, EIR
/// temperature, and EIR part-load modifiers and the cycling ratio.
pub fn chiller_power(p: &ChillerParams, t_chws: f64, t_cdws: f64, plr: f64, cr: f64) -> f64 {
    let fplr = p.eir_fplr[0] + p.eir_fplr[1] * plr + p.eir_fplr[2] * plr * plr;
    (p.p_ch_nom
        * cap_fun_t(&p.cap_ft, t_chws, t_cdws)
        * eir_fun_t(&p.eir_ft, t_chws, t_cdws)
        * fplr
        * cr)
        .max(0.0)
}

/// Pump electric power `a1·ln(1+a2·ṁ) + a3·ṁ + a4`, clamped below at zero.
pub fn chw_pump_power(pump_a: &[f64; 4], mdot: f64) -> Result<f64, ModelError> {
    if mdot < 0.0 {
        return Err(ModelError::invalid_param(format!(
            "pump flow must be nonnegative, got {mdot}"
        )));
    }
    let arg = 1.0 + pump_a[1] * mdot;
    if arg <= 0.0 {
        return Err(ModelError::invalid_param(format!(
            "pump model log argument 1 + a2*mdot = {arg} is not positive"
        )));
    }
    Ok((pump_a[0] * arg.ln() + pump_a[2] * mdot + pump_a[3]).max(0.0))
}

/// Internal pieces of the per-step optimization, shared with the oracle
/// tests through `step_problem`.
pub struct StepProblem<'a> {
    p: &'a ChillerParams,
    x: ChillerState,
    u: ChillerInput,
    c_pw: f64,
    /// Required evaporator heat rate to bring return water to setpoint, kW.
    pub qdot_req: f64,
    /// Evaporator capacity at the current conditions, kW.
    pub qdot_ub: f64,
}

impl<'a> StepProblem<'a> {
    /// Electric power at evaporator heat rate `q`, handling the degenerate
    /// zero-capacity case.
    pub fn power(&self, q: f64) -> f64 {
        if self.qdot_ub <= 0.0 {
            return 0.0;
        }
        let raw = q / self.qdot_ub;
        let plr = raw.clamp(self.p.plr_lb, self.p.plr_ub);
        let cr = (raw / self.p.plr_lb).min(1.0);
        chiller_power(self.p, self.x.t_chws, self.u.t_cdws, plr, cr)
    }

    /// Condenser heat rejection at evaporator heat rate `q`, kW.
    pub fn qdot_cond(&self, q: f64) -> f64 {
        q + self.p.eta_waste_heat * self.power(q)
    }

    /// Next-step condenser return temperature at evaporator heat rate `q`.
    pub fn t_cdwr_next(&self, q: f64) -> f64 {
        self.p.a_cd.lowpass(
            self.x.t_cdwr,
            self.u.t_cdws + self.qdot_cond(q) / (self.c_pw * self.u.mdot_cd),
        )
    }

    /// Next-step chilled water supply temperature at evaporator heat rate
    /// `q`.
    pub fn t_chws_next(&self, q: f64) -> f64 {
        self.p.a_ch.lowpass(
            self.x.t_chws,
            self.u.t_chwr - q / (self.c_pw * self.u.mdot_chw),
        )
    }

    /// Setpoint-tracking objective minimized by the step.
    pub fn objective(&self, q: f64) -> f64 {
        let d = self.u.t_chws_set - self.t_chws_next(q);
        d * d
    }

    /// Largest evaporator heat rate in `[0, hi]` keeping the condenser
    /// return at or below its bound. `None` means the bound never binds on
    /// the interval.
    fn condenser_cap(&self, hi: f64) -> Option<f64> {
        let t_ub = self.p.t_cdwr_ub;
        if self.t_cdwr_next(hi) <= t_ub {
            return None;
        }
        // The rejection-vs-evaporator-rate map is increasing for sane curve
        // data; verify on a coarse grid before trusting bisection, and fall
        // back to a feasible-prefix scan if the data is pathological.
        let n = 33;
        let mut monotone = true;
        let mut prev = self.qdot_cond(0.0);
        for i in 1..n {
            let q = hi * i as f64 / (n - 1) as f64;
            let cur = self.qdot_cond(q);
            if cur < prev - 1e-9 * (1.0 + prev.abs()) {
                monotone = false;
                break;
            }
            prev = cur;
        }
        let tol = 1e-9 * hi.max(1.0);
        if monotone {
            let cap = solve_monotone_threshold(
                |q| self.t_cdwr_next(q),
                t_ub,
                Bracket { lo: 0.0, hi },
                tol,
            );
            return Some(cap);
        }
        // Largest contiguous feasible prefix from zero, boundary refined by
        // bisection between the last feasible and first infeasible samples.
        let n = 257;
        let mut last_ok = 0.0;
        let mut first_bad = hi;
        for i in 1..n {
            let q = hi * i as f64 / (n - 1) as f64;
            if self.t_cdwr_next(q) <= t_ub {
                last_ok = q;
            } else {
                first_bad = q;
                break;
            }
        }
        let (mut a, mut b) = (last_ok, first_bad);
        while (b - a) > tol {
            let mid = 0.5 * (a + b);
            if self.t_cdwr_next(mid) <= t_ub {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(a)
    }
}

/// Builds the per-step optimization problem without solving it. Exposed so
/// tests can brute-force the same objective and constraints.
pub fn step_problem<'a>(
    c: &SimConstants,
    p: &'a ChillerParams,
    x: &ChillerState,
    u: &ChillerInput,
) -> StepProblem<'a> {
    let qdot_req = c.c_pw * u.mdot_chw * (u.t_chwr - u.t_chws_set);
    let qdot_ub = p.qdot_evap_nom * cap_fun_t(&p.cap_ft, x.t_chws, u.t_cdws);
    StepProblem {
        p,
        x: *x,
        u: *u,
        c_pw: c.c_pw,
        qdot_req,
        qdot_ub,
    }
}

/// Steps the chiller one sampling period.
///
/// Inputs that would require heating the chilled water (setpoint above the
/// return temperature or below its floor) or an already-too-hot condenser
/// supply make the refrigerant loop inoperative: both streams pass through
/// unchanged and every heat/power output is zero.
pub fn chiller_step(
    c: &SimConstants,
    p: &ChillerParams,
    x: &ChillerState,
    u: &ChillerInput,
    solver: &SolverSettings,
) -> Result<ChillerResult, ModelError> {
    if !(u.mdot_chw > 0.0) || !(u.mdot_cd > 0.0) {
        return Err(ModelError::infeasible(format!(
            "chiller stepped with nonpositive flow (chw {}, cd {})",
            u.mdot_chw, u.mdot_cd
        )));
    }

    let setpoint_ok = p.t_chws_lb <= u.t_chws_set && u.t_chws_set <= u.t_chwr;
    let condenser_ok = u.t_cdws <= p.t_cdwr_ub;
    if !setpoint_ok || !condenser_ok {
        return Ok(ChillerResult {
            next: ChillerState {
                t_chws: u.t_chwr,
                t_cdwr: u.t_cdws,
            },
            qdot_evap: 0.0,
            qdot_cond: 0.0,
            p_ch: 0.0,
            p_chwp: 0.0,
            refrigerant_active: false,
        });
    }

    let prob = step_problem(c, p, x, u);
    let hi = prob.qdot_req.min(prob.qdot_ub).max(0.0);
    let cap = if p.mode == ChillerMode::Saturated && hi > 0.0 {
        prob.condenser_cap(hi).unwrap_or(hi)
    } else {
        hi
    };

    let (qdot_evap, _) =
        minimize_scalar(|q| prob.objective(q), Bracket { lo: 0.0, hi: cap }, solver)?;
    let p_ch = prob.power(qdot_evap);
    let qdot_cond = qdot_evap + p.eta_waste_heat * p_ch;
    let next = ChillerState {
        t_chws: prob.t_chws_next(qdot_evap),
        t_cdwr: prob.t_cdwr_next(qdot_evap),
    };
    let p_chwp = chw_pump_power(&p.pump_a, u.mdot_chw)?;

    Ok(ChillerResult {
        next,
        qdot_evap,
        qdot_cond,
        p_ch,
        p_chwp,
        refrigerant_active: true,
    })
}
