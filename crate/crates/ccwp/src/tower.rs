//! Variable-speed evaporative cooling tower with range saturation.
//!
//! The tower is described through three temperature differences: the scope
//! (return water over ambient wet bulb), the range (return over supply),
//! and the approach (supply over wet bulb), with range + approach = scope.
//! A 27-coefficient empirical correlation predicts the approach from the
//! wet bulb, the range, and the water-to-air flow ratio. Each step lands
//! in one of three regimes:
//!
//! 1. Scope below the smallest feasible range + approach: no evaporative
//!    transfer is possible and the water passes through uncooled.
//! 2. Scope above the largest feasible range + approach: the range pins at
//!    its maximum.
//! 3. Otherwise the range is solved from a bounded one-variable
//!    minimization of the correlation residual.
//!
//! Cases 1 and 2 assign the next supply temperature directly; case 3 goes
//! through the first-order outlet filter.

use crate::core::{FilterCoeff, SimConstants};
use crate::error::ModelError;
use crate::optim::{minimize_scalar, Bracket, SolverSettings};

/// Index into the 27-coefficient approach correlation, lexicographic in
/// (wet-bulb exponent, range exponent, flow-ratio exponent).
pub fn coeff_index(i: usize, j: usize, l: usize) -> usize {
    debug_assert!(i < 3 && j < 3 && l < 3);
    9 * i + 3 * j + l
}

/// Cooling tower parameters.
#[derive(Debug, Clone)]
pub struct TowerParams {
    /// Approach correlation coefficients, ordered by [`coeff_index`].
    pub coeffs: [f64; 27],
    /// Upper clamp on the liquid-to-gas flow ratio.
    pub lgr_ub: f64,
    /// Nominal cooling water flow, kg/s.
    pub mdot_cw_nom: f64,
    /// Nominal air flow, kg/s.
    pub mdot_oa_nom: f64,
    /// Range temperature bounds, °C.
    pub t_ran_lb: f64,
    pub t_ran_ub: f64,
    /// Approach temperature bounds, °C.
    pub t_app_lb: f64,
    pub t_app_ub: f64,
    /// Supply-temperature filter coefficient.
    pub a_ct: FilterCoeff,
    /// Nominal fan power, kW.
    pub p_ct_nom: f64,
    /// Cooling water pump coefficients for `g1·ln(1+g2·ṁ) + g3·ṁ + g4`.
    pub pump_g: [f64; 4],
}

impl TowerParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.t_ran_lb <= self.t_ran_ub) || !(self.t_app_lb <= self.t_app_ub) {
            return Err(ModelError::invalid_param(
                "tower range/approach bounds must be ordered".to_string(),
            ));
        }
        if !(self.mdot_cw_nom > 0.0) || !(self.mdot_oa_nom > 0.0) {
            return Err(ModelError::invalid_param(
                "tower nominal flows must be positive",
            ));
        }
        if !(self.lgr_ub > 0.0) {
            return Err(ModelError::invalid_param(
                "liquid-gas ratio bound must be positive",
            ));
        }
        if !(self.p_ct_nom >= 0.0) {
            return Err(ModelError::invalid_param("fan power must be nonnegative"));
        }
        Ok(())
    }
}

/// Tower state: cooling water supply temperature, °C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerState {
    pub t_cws: f64,
}

/// Commanded tower inputs.
#[derive(Debug, Clone, Copy)]
pub struct TowerInput {
    /// Cooling water return temperature entering the tower, °C.
    pub t_cwr: f64,
    /// Cooling water flow, kg/s.
    pub mdot_cw: f64,
    /// Air flow through the tower, kg/s.
    pub mdot_oa: f64,
}

/// Exogenous outdoor-air wet bulb temperature, °C.
#[derive(Debug, Clone, Copy)]
pub struct TowerDisturbance {
    pub t_oawb: f64,
}

/// Which of the three regimes the step landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerCase {
    /// Scope too small for evaporation; water passes through uncooled.
    NoCooling,
    /// Scope beyond the feasible total; range pinned at its maximum.
    RangeSaturated,
    /// Range solved from the approach correlation.
    Solved,
}

/// One-step result.
#[derive(Debug, Clone, Copy)]
pub struct TowerResult {
    pub next: TowerState,
    /// Solved (or pinned) range temperature, °C.
    pub t_ran: f64,
    /// Approach temperature implied by range + approach = scope, °C.
    pub t_app: f64,
    /// Heat rejected this step, from current-step temperatures, kW.
    pub qdot_ct: f64,
    /// Fan electric power, kW.
    pub p_ct: f64,
    /// Cooling water pump electric power, kW.
    pub p_cwp: f64,
    pub case: TowerCase,
}

/// Empirical approach correlation: triple sum of
/// `c[i,j,l] · T_wb^i · T_ran^j · LGR^l` over exponents 0..=2.
pub fn approach_hat(p: &TowerParams, t_ran: f64, t_oawb: f64, lgr: f64) -> f64 {
    let wb = [1.0, t_oawb, t_oawb * t_oawb];
    let rn = [1.0, t_ran, t_ran * t_ran];
    let lg = [1.0, lgr, lgr * lgr];
    let mut sum = 0.0;
    for (i, &wb_i) in wb.iter().enumerate() {
        for (j, &rn_j) in rn.iter().enumerate() {
            for (l, &lg_l) in lg.iter().enumerate() {
                sum += p.coeffs[coeff_index(i, j, l)] * wb_i * rn_j * lg_l;
            }
        }
    }
    sum
}

/// Liquid-to-gas ratio: the ratio of water and air flow fractions, clamped
/// at `lgr_ub`. Zero air flow is an error; callers treat a stopped fan as
/// the no-cooling regime before getting here.
pub fn liquid_gas_ratio(p: &TowerParams, mdot_cw: f64, mdot_oa: f64) -> Result<f64, ModelError> {
    if !(mdot_oa > 0.0) {
        return Err(ModelError::infeasible(format!(
            "liquid-gas ratio undefined at air flow {mdot_oa}"
        )));
    }
    let fr_wat = mdot_cw / p.mdot_cw_nom;
    let fr_air = mdot_oa / p.mdot_oa_nom;
    Ok((fr_wat / fr_air).min(p.lgr_ub))
}

/// Cooling water pump electric power, same log-linear form as the chilled
/// water pumps.
pub fn cw_pump_power(pump_g: &[f64; 4], mdot: f64) -> Result<f64, ModelError> {
    crate::chiller::chw_pump_power(pump_g, mdot)
}

/// Steps the tower one sampling period.
pub fn tower_step(
    c: &SimConstants,
    p: &TowerParams,
    x: &TowerState,
    u: &TowerInput,
    w: &TowerDisturbance,
    solver: &SolverSettings,
) -> Result<TowerResult, ModelError> {
    if u.mdot_cw < 0.0 || u.mdot_oa < 0.0 {
        return Err(ModelError::infeasible(format!(
            "tower flows must be nonnegative (cw {}, oa {})",
            u.mdot_cw, u.mdot_oa
        )));
    }

    let t_sco = u.t_cwr - w.t_oawb;
    let fan_off = u.mdot_oa == 0.0;

    let (next_t_cws, t_ran, case) = if fan_off || t_sco < p.t_ran_lb + p.t_app_lb {
        // Direct assignment, no filter: the water stream is untouched.
        (u.t_cwr, 0.0, TowerCase::NoCooling)
    } else if t_sco > p.t_ran_ub + p.t_app_ub {
        (u.t_cwr - p.t_ran_ub, p.t_ran_ub, TowerCase::RangeSaturated)
    } else {
        let lgr = liquid_gas_ratio(p, u.mdot_cw, u.mdot_oa)?;
        let lo = p.t_ran_lb.max(t_sco - p.t_app_ub);
        let hi = p.t_ran_ub.min(t_sco - p.t_app_lb);
        let bracket = Bracket::new(lo, hi)?;
        let obj = |t_ran: f64| {
            let resid = (t_sco - t_ran) - approach_hat(p, t_ran, w.t_oawb, lgr);
            resid * resid
        };
        let (t_ran, _) = minimize_scalar(obj, bracket, solver)?;
        (
            p.a_ct.lowpass(x.t_cws, u.t_cwr - t_ran),
            t_ran,
            TowerCase::Solved,
        )
    };

    let fr_air = u.mdot_oa / p.mdot_oa_nom;
    Ok(TowerResult {
        next: TowerState { t_cws: next_t_cws },
        t_ran,
        t_app: t_sco - t_ran,
        // Heat rejection reported from current-step temperatures, so it lags
        // the filtered state by one step; clamped to the physical direction.
        qdot_ct: (c.c_pw * u.mdot_cw * (u.t_cwr - x.t_cws)).max(0.0),
        p_ct: p.p_ct_nom * fr_air * fr_air * fr_air,
        p_cwp: cw_pump_power(&p.pump_g, u.mdot_cw)?,
        case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn consts() -> SimConstants {
        SimConstants::default()
    }

    fn zero_coeff_params() -> TowerParams {
        TowerParams {
            coeffs: [0.0; 27],
            lgr_ub: 8.0,
            mdot_cw_nom: 47.44,
            mdot_oa_nom: 39.53,
            t_ran_lb: 2.2,
            t_ran_ub: 22.2,
            t_app_lb: 0.0,
            t_app_ub: 40.0,
            a_ct: FilterCoeff::new(0.5).unwrap(),
            p_ct_nom: 15.0,
            pump_g: [0.0, 0.0, 0.0, 0.0],
        }
    }

    #[test]
    fn approach_constant_coefficient() {
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(0, 0, 0)] = 3.5;
        assert_eq!(approach_hat(&p, 5.0, 25.0, 1.2), 3.5);
        assert_eq!(approach_hat(&p, 20.0, -3.0, 0.1), 3.5);
    }

    #[test]
    fn approach_single_term_pickoff() {
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(1, 0, 0)] = 1.0;
        assert_eq!(approach_hat(&p, 5.0, 25.0, 1.2), 25.0);
    }

    #[test]
    fn approach_cross_term() {
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(1, 1, 1)] = 0.01;
        assert_relative_eq!(
            approach_hat(&p, 5.0, 25.0, 1.2),
            0.01 * 25.0 * 5.0 * 1.2,
            max_relative = 1e-12
        );
        assert_relative_eq!(approach_hat(&p, 5.0, 25.0, 1.2), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn lgr_nominal_point() {
        let p = zero_coeff_params();
        assert_relative_eq!(
            liquid_gas_ratio(&p, 47.44, 39.53).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn lgr_ratio_and_clamp() {
        let p = zero_coeff_params();
        let double_water = liquid_gas_ratio(&p, 2.0 * 47.44, 0.5 * 39.53).unwrap();
        assert_relative_eq!(double_water, 4.0, max_relative = 1e-12);
        let extreme = liquid_gas_ratio(&p, 10.0 * 47.44, 0.5 * 39.53).unwrap();
        assert_eq!(extreme, 8.0);
    }

    #[test]
    fn lgr_zero_air_flow_errors() {
        let p = zero_coeff_params();
        assert!(liquid_gas_ratio(&p, 47.44, 0.0).is_err());
    }

    #[test]
    fn case_1_no_cooling_passes_water_through() {
        let p = zero_coeff_params();
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 29.0 },
            &TowerInput {
                t_cwr: 26.0,
                mdot_cw: 47.44,
                mdot_oa: 39.53,
            },
            &TowerDisturbance { t_oawb: 25.5 },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(r.case, TowerCase::NoCooling);
        assert_eq!(r.next.t_cws, 26.0);
        assert_eq!(r.t_ran, 0.0);
    }

    #[test]
    fn fan_off_forces_no_cooling() {
        let p = zero_coeff_params();
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 29.0 },
            &TowerInput {
                t_cwr: 35.0,
                mdot_cw: 47.44,
                mdot_oa: 0.0,
            },
            &TowerDisturbance { t_oawb: 25.5 },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(r.case, TowerCase::NoCooling);
        assert_eq!(r.next.t_cws, 35.0);
        assert_eq!(r.p_ct, 0.0);
    }

    #[test]
    fn case_2_range_saturates() {
        let p = zero_coeff_params();
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 30.0 },
            &TowerInput {
                t_cwr: 95.0,
                mdot_cw: 47.44,
                mdot_oa: 39.53,
            },
            &TowerDisturbance { t_oawb: 20.0 },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(r.case, TowerCase::RangeSaturated);
        assert_relative_eq!(r.next.t_cws, 95.0 - 22.2, max_relative = 1e-12);
        assert_eq!(r.t_ran, 22.2);
    }

    #[test]
    fn case_3_constant_approach_solves_range() {
        // With approach pinned at 3.5 the residual zero is at
        // range = scope - 3.5.
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(0, 0, 0)] = 3.5;
        p.a_ct = FilterCoeff::INSTANT;
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 30.0 },
            &TowerInput {
                t_cwr: 35.0,
                mdot_cw: 47.44,
                mdot_oa: 39.53,
            },
            &TowerDisturbance { t_oawb: 25.5 },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(r.case, TowerCase::Solved);
        assert_relative_eq!(r.t_ran, 9.5 - 3.5, epsilon = 1e-6);
        assert_relative_eq!(r.t_app, 3.5, epsilon = 1e-6);
        assert_relative_eq!(r.next.t_cws, 35.0 - 6.0, epsilon = 1e-6);
    }

    #[test]
    fn case_3_filtered_update() {
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(0, 0, 0)] = 3.5;
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 30.0 },
            &TowerInput {
                t_cwr: 35.0,
                mdot_cw: 47.44,
                mdot_oa: 39.53,
            },
            &TowerDisturbance { t_oawb: 25.5 },
            &SolverSettings::default(),
        )
        .unwrap();
        // a = 0.5, target 29.0, previous 30.0
        assert_relative_eq!(r.next.t_cws, 29.5, epsilon = 1e-6);
    }

    #[test]
    fn fan_cubic_law() {
        let p = zero_coeff_params();
        let step = |fr: f64| {
            tower_step(
                &consts(),
                &p,
                &TowerState { t_cws: 29.0 },
                &TowerInput {
                    t_cwr: 35.0,
                    mdot_cw: 47.44,
                    mdot_oa: fr * 39.53,
                },
                &TowerDisturbance { t_oawb: 25.5 },
                &SolverSettings::default(),
            )
            .unwrap()
            .p_ct
        };
        let full = step(1.0);
        let half = step(0.5);
        assert_relative_eq!(full, 15.0, max_relative = 1e-12);
        assert_relative_eq!(full / half, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn cw_pump_power_examples() {
        assert_eq!(cw_pump_power(&[0.0, 0.0, 0.0, 0.0], 25.0).unwrap(), 0.0);
        assert_relative_eq!(
            cw_pump_power(&[0.0, 0.0, 2.0, 1.0], 4.0).unwrap(),
            9.0,
            max_relative = 1e-12
        );
        // 3*ln(2) + 1*2 + 0.5
        assert_relative_eq!(
            cw_pump_power(&[3.0, 0.5, 1.0, 0.5], 2.0).unwrap(),
            4.579441541679836,
            max_relative = 1e-12
        );
    }

    #[test]
    fn heat_rejection_uses_current_step_temperatures() {
        let p = zero_coeff_params();
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 29.0 },
            &TowerInput {
                t_cwr: 35.0,
                mdot_cw: 40.0,
                mdot_oa: 0.0,
            },
            &TowerDisturbance { t_oawb: 25.5 },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_relative_eq!(r.qdot_ct, 4.186 * 40.0 * 6.0, max_relative = 1e-12);
    }

    #[test]
    fn case_3_bracket_collapses_at_the_no_cooling_boundary() {
        // Just above the no-cooling threshold the feasible range interval
        // pinches to its lower bound, so the solved range lands there no
        // matter what the correlation says.
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(0, 0, 0)] = 3.5;
        let t_oawb = 25.5;
        let r = tower_step(
            &consts(),
            &p,
            &TowerState { t_cws: 29.0 },
            &TowerInput {
                t_cwr: t_oawb + p.t_ran_lb + 0.05,
                mdot_cw: 47.44,
                mdot_oa: 39.53,
            },
            &TowerDisturbance { t_oawb },
            &SolverSettings::default(),
        )
        .unwrap();
        assert_eq!(r.case, TowerCase::Solved);
        assert!(r.t_ran >= p.t_ran_lb - 1e-9 && r.t_ran <= p.t_ran_lb + 0.05 + 1e-9);
    }

    #[test]
    fn solved_range_stays_in_bounds_and_supply_above_wet_bulb() {
        let mut p = zero_coeff_params();
        p.coeffs[coeff_index(0, 0, 0)] = 2.0;
        p.coeffs[coeff_index(0, 1, 0)] = 0.15;
        p.coeffs[coeff_index(0, 0, 1)] = 0.4;
        for t_cwr in [28.0, 31.0, 34.0, 37.0] {
            for t_oawb in [20.0, 23.0, 25.5] {
                let r = tower_step(
                    &consts(),
                    &p,
                    &TowerState { t_cws: 29.0 },
                    &TowerInput {
                        t_cwr,
                        mdot_cw: 47.44,
                        mdot_oa: 39.53,
                    },
                    &TowerDisturbance { t_oawb },
                    &SolverSettings::default(),
                )
                .unwrap();
                assert!(r.t_ran >= 0.0 && r.t_ran <= p.t_ran_ub);
                if r.case == TowerCase::Solved {
                    let target = t_cwr - r.t_ran;
                    assert!(
                        target >= t_oawb - 1e-9,
                        "target {target} below wet bulb {t_oawb}"
                    );
                    assert!(target <= t_cwr + 1e-9);
                }
            }
        }
    }
}
