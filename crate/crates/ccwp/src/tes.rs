//! Chilled-water thermal energy storage.
//!
//! The tank is modeled as two virtual sub-tanks — warm above, cold below —
//! separated by a thermocline. Each carries a temperature and a mass
//! fraction; the fractions always sum to one. Positive tank flow charges
//! the cold sub-tank with chiller supply water while expelling warm water;
//! negative flow discharges cold water to the load and returns warm coil
//! water to the warm sub-tank. The tank is treated as perfectly insulated
//! with no mixing across the thermocline.

use crate::error::ModelError;

/// Storage tank parameters.
#[derive(Debug, Clone, Copy)]
pub struct TesParams {
    /// Total water mass in the tank, kg.
    pub m_tes: f64,
    /// Minimum mass fraction either sub-tank may hold.
    pub s_lb: f64,
    /// Maximum mass fraction either sub-tank may hold.
    pub s_ub: f64,
}

impl TesParams {
    pub fn new(m_tes: f64, s_lb: f64, s_ub: f64) -> Result<Self, ModelError> {
        if !(m_tes > 0.0) {
            return Err(ModelError::invalid_param(format!(
                "TES mass must be positive, got {m_tes}"
            )));
        }
        if !(0.0 <= s_lb && s_lb < s_ub && s_ub <= 1.0) {
            return Err(ModelError::invalid_param(format!(
                "fraction bounds must satisfy 0 <= lb < ub <= 1, got [{s_lb}, {s_ub}]"
            )));
        }
        Ok(TesParams { m_tes, s_lb, s_ub })
    }
}

/// Sub-tank temperatures and mass fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TesState {
    /// Cold sub-tank temperature, °C.
    pub t_twc: f64,
    /// Cold sub-tank mass fraction.
    pub s_twc: f64,
    /// Warm sub-tank temperature, °C.
    pub t_tww: f64,
    /// Warm sub-tank mass fraction.
    pub s_tww: f64,
}

impl TesState {
    pub fn new(t_twc: f64, s_twc: f64, t_tww: f64, s_tww: f64) -> Result<Self, ModelError> {
        if ((s_twc + s_tww) - 1.0).abs() > 1e-9 {
            return Err(ModelError::invalid_param(format!(
                "sub-tank fractions must sum to 1, got {s_twc} + {s_tww}"
            )));
        }
        Ok(TesState {
            t_twc,
            s_twc,
            t_tww,
            s_tww,
        })
    }
}

/// Tank boundary conditions for one step.
#[derive(Debug, Clone, Copy)]
pub struct TesInput {
    /// Chiller supply water temperature feeding the cold sub-tank when
    /// charging, °C.
    pub t_sw: f64,
    /// Coil return water temperature feeding the warm sub-tank when
    /// discharging, °C.
    pub t_lwr: f64,
    /// Tank flow, kg/s; positive charges the cold sub-tank, negative
    /// discharges it.
    pub mdot_tw: f64,
}

/// Checks that one step at flow `mdot_tw` keeps both fractions within
/// bounds and neither sub-tank over-drained. Returns the violation message
/// without committing anything.
pub fn check_flow(p: &TesParams, x: &TesState, mdot_tw: f64, t_s: f64) -> Result<(), ModelError> {
    let delta = mdot_tw * t_s / p.m_tes;
    let s_twc_next = x.s_twc + delta;
    let s_tww_next = x.s_tww - delta;
    if s_twc_next < p.s_lb || s_twc_next > p.s_ub {
        return Err(ModelError::infeasible(format!(
            "cold sub-tank fraction would become {s_twc_next:.6}, outside [{}, {}]",
            p.s_lb, p.s_ub
        )));
    }
    if s_tww_next < p.s_lb || s_tww_next > p.s_ub {
        return Err(ModelError::infeasible(format!(
            "warm sub-tank fraction would become {s_tww_next:.6}, outside [{}, {}]",
            p.s_lb, p.s_ub
        )));
    }
    // Heat-balance denominators: mass remaining in the donor sub-tank.
    if p.m_tes * x.s_tww - t_s * mdot_tw <= 0.0 {
        return Err(ModelError::infeasible(
            "warm sub-tank would be over-drained in one step".to_string(),
        ));
    }
    if p.m_tes * x.s_twc + t_s * mdot_tw <= 0.0 {
        return Err(ModelError::infeasible(
            "cold sub-tank would be over-drained in one step".to_string(),
        ));
    }
    Ok(())
}

/// Propagates the tank one sampling period of `t_s` seconds.
///
/// Mass balance moves `ṁ·t_s/M` of fraction between sub-tanks; the warm
/// temperature changes only while discharging (fed by coil return water)
/// and the cold temperature only while charging (fed by chiller supply),
/// each as a convex blend of old contents and incoming water.
pub fn tes_step(
    p: &TesParams,
    x: &TesState,
    u: &TesInput,
    t_s: f64,
) -> Result<TesState, ModelError> {
    check_flow(p, x, u.mdot_tw, t_s)?;
    let delta = u.mdot_tw * t_s / p.m_tes;
    let s_twc = x.s_twc + delta;
    let s_tww = x.s_tww - delta;
    let t_tww = x.t_tww
        + t_s * u.mdot_tw.min(0.0) / (p.m_tes * x.s_tww - t_s * u.mdot_tw) * (x.t_tww - u.t_lwr);
    let t_twc = x.t_twc
        + t_s * u.mdot_tw.max(0.0) / (p.m_tes * x.s_twc + t_s * u.mdot_tw) * (u.t_sw - x.t_twc);
    Ok(TesState {
        t_twc,
        s_twc,
        t_tww,
        s_tww,
    })
}

/// Temperature of the water the tank pushes out for a given flow direction:
/// cold sub-tank water when discharging (`ṁ < 0`), warm sub-tank water when
/// charging (`ṁ > 0`). At zero flow the value is unused; the cold
/// temperature is returned by convention.
pub fn tes_discharge_temp(x: &TesState, mdot_tw: f64) -> f64 {
    if mdot_tw > 0.0 {
        x.t_tww
    } else {
        x.t_twc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params() -> TesParams {
        TesParams::new(1000.0, 0.05, 0.95).unwrap()
    }

    fn state() -> TesState {
        TesState::new(6.0, 0.5, 13.0, 0.5).unwrap()
    }

    #[test]
    fn zero_flow_leaves_state_unchanged() {
        let x = state();
        let next = tes_step(
            &params(),
            &x,
            &TesInput {
                t_sw: 5.0,
                t_lwr: 14.0,
                mdot_tw: 0.0,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn charging_blends_cold_tank_toward_supply() {
        // S_twc' = 0.51, T_twc' = 6 + (10/510)(5 - 6)
        let next = tes_step(
            &params(),
            &state(),
            &TesInput {
                t_sw: 5.0,
                t_lwr: 14.0,
                mdot_tw: 10.0,
            },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(next.s_twc, 0.51, max_relative = 1e-12);
        assert_relative_eq!(next.s_tww, 0.49, max_relative = 1e-12);
        assert_relative_eq!(next.t_twc, 6.0 - 10.0 / 510.0, max_relative = 1e-12);
        assert_relative_eq!(next.t_twc, 5.980392156862745, max_relative = 1e-10);
        assert_eq!(next.t_tww, 13.0); // warm side untouched while charging
    }

    #[test]
    fn discharging_blends_warm_tank_toward_return() {
        // S_tww' = 0.51, T_tww' = 13 + (-10/510)(13 - 14)
        let next = tes_step(
            &params(),
            &state(),
            &TesInput {
                t_sw: 5.0,
                t_lwr: 14.0,
                mdot_tw: -10.0,
            },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(next.s_tww, 0.51, max_relative = 1e-12);
        assert_relative_eq!(next.t_tww, 13.0 + 10.0 / 510.0, max_relative = 1e-12);
        assert_relative_eq!(next.t_tww, 13.019607843137255, max_relative = 1e-10);
        assert_eq!(next.t_twc, 6.0); // cold side untouched while discharging
    }

    #[test]
    fn fraction_bound_violation_names_sub_tank() {
        let p = params();
        let x = TesState::new(6.0, 0.94, 13.0, 0.06).unwrap();
        // +10 kg/s for 10 s on a 1000 kg tank moves 0.1 of fraction
        let err = tes_step(
            &p,
            &x,
            &TesInput {
                t_sw: 5.0,
                t_lwr: 14.0,
                mdot_tw: 10.0,
            },
            10.0,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cold") || msg.contains("warm"), "{msg}");
    }

    #[test]
    fn discharge_temperature_follows_flow_direction() {
        let x = TesState::new(5.0, 0.5, 13.0, 0.5).unwrap();
        assert_eq!(tes_discharge_temp(&x, -10.0), 5.0);
        assert_eq!(tes_discharge_temp(&x, 10.0), 13.0);
        assert_eq!(tes_discharge_temp(&x, 0.0), 5.0);
    }

    #[test]
    fn long_charge_drives_cold_tank_to_supply_temperature() {
        let p = params();
        let mut x = TesState::new(5.15, 0.05, 13.0, 0.95).unwrap();
        let u = TesInput {
            t_sw: 5.0,
            t_lwr: 14.0,
            mdot_tw: 1.0,
        };
        // charge until the cold fraction is nearly full
        for _ in 0..899 {
            x = tes_step(&p, &x, &u, 1.0).unwrap();
        }
        assert!((x.t_twc - 5.0).abs() < 0.01, "t_twc = {}", x.t_twc);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn thermal_passivity(
            s_twc in 0.1..0.9f64,
            t_twc in 2.0..10.0f64,
            t_tww in 10.0..20.0f64,
            t_sw in 2.0..10.0f64,
            t_lwr in 10.0..20.0f64,
            mdot in -20.0..20.0f64,
        ) {
            let p = TesParams::new(10_000.0, 0.05, 0.95).unwrap();
            let x = TesState::new(t_twc, s_twc, t_tww, 1.0 - s_twc).unwrap();
            let u = TesInput { t_sw, t_lwr, mdot_tw: mdot };
            if let Ok(next) = tes_step(&p, &x, &u, 60.0) {
                if mdot > 0.0 {
                    prop_assert!(next.t_twc >= t_twc.min(t_sw) - 1e-9);
                    prop_assert!(next.t_twc <= t_twc.max(t_sw) + 1e-9);
                } else if mdot < 0.0 {
                    prop_assert!(next.t_tww >= t_tww.min(t_lwr) - 1e-9);
                    prop_assert!(next.t_tww <= t_tww.max(t_lwr) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn mass_conserved_over_many_random_steps() {
        // Deterministic xorshift so the walk is reproducible.
        let p = TesParams::new(1.413e5, 0.05, 0.95).unwrap();
        let mut x = TesState::new(6.0, 0.5, 13.0, 0.5).unwrap();
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut rand01 = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100_000 {
            let mdot = (rand01() - 0.5) * 80.0;
            let u = TesInput {
                t_sw: 4.0 + 4.0 * rand01(),
                t_lwr: 11.0 + 5.0 * rand01(),
                mdot_tw: mdot,
            };
            if let Ok(next) = tes_step(&p, &x, &u, 60.0) {
                x = next;
            }
            assert!(
                ((x.s_twc + x.s_tww) - 1.0).abs() <= 1e-12,
                "fraction sum drifted to {}",
                x.s_twc + x.s_tww
            );
        }
    }
}
