//! Water loop interconnection algebra.
//!
//! Primary-secondary pumping on the chilled water side: each running
//! chiller circulates its nominal flow, a one-way bypass returns whatever
//! the load and storage do not draw, and three-way valves blend storage
//! water into the supply and return streams. The cooling water side ties
//! chiller condensers to towers under a mass-conservation constraint.
//! Everything here is memoryless algebra over current-step values.

use crate::error::ModelError;

/// Per-chiller commands inside the chilled water loop input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChillerCommand {
    pub on: bool,
    /// Commanded evaporator flow, kg/s; validated against the nominal
    /// (on) or zero (off) dictated by primary-secondary pumping.
    pub mdot_chw: f64,
    /// Commanded condenser flow, kg/s.
    pub mdot_cd: f64,
}

/// Commanded inputs to the chilled water loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ChwLoopInput {
    /// Load (coil) water flow, kg/s.
    pub mdot_lw: f64,
    /// Storage tank flow, kg/s; positive charges the tank.
    pub mdot_tw: f64,
    /// Plantwide chilled water supply setpoint, °C.
    pub t_chws_set: f64,
    pub chillers: Vec<ChillerCommand>,
}

impl ChwLoopInput {
    pub fn any_chiller_on(&self) -> bool {
        self.chillers.iter().any(|c| c.on)
    }
}

/// Per-tower commands inside the cooling water loop input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TowerCommand {
    pub on: bool,
    /// Commanded cooling water flow, kg/s.
    pub mdot_cw: f64,
    /// Commanded air flow, kg/s.
    pub mdot_oa: f64,
}

/// Commanded inputs to the cooling water loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CwLoopInput {
    pub towers: Vec<TowerCommand>,
}

impl CwLoopInput {
    pub fn any_tower_on(&self) -> bool {
        self.towers.iter().any(|t| t.on)
    }

    pub fn total_flow(&self) -> f64 {
        self.towers.iter().filter(|t| t.on).map(|t| t.mdot_cw).sum()
    }
}

/// Chilled water loop outputs for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChwLoopOutputs {
    /// Supply water temperature at the load-side tee, °C.
    pub t_sw: f64,
    /// Return water temperature after the storage tee, °C.
    pub t_rw: f64,
    /// Plantwide chilled water return temperature, °C.
    pub t_chwr_bar: f64,
    /// Plantwide chilled water supply temperature, °C.
    pub t_chws_bar: f64,
    /// Secondary (supply) water flow, kg/s.
    pub mdot_sw: f64,
    /// Bypass flow, kg/s.
    pub mdot_bp: f64,
    /// Total primary chilled water flow, kg/s.
    pub mdot_chw: f64,
    /// Total condenser water flow, kg/s.
    pub mdot_cd: f64,
    /// Cooling delivered by the coil, kW.
    pub qdot_cc: f64,
    /// Total evaporator heat, kW.
    pub qdot_evap: f64,
    /// Total condenser heat, kW.
    pub qdot_cond: f64,
    /// Total chiller electric power, kW.
    pub p_ch: f64,
    /// Total chilled water pump electric power, kW.
    pub p_chwp: f64,
}

/// Cooling water loop outputs for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CwLoopOutputs {
    /// Total cooling water flow, kg/s.
    pub mdot_cw: f64,
    /// Plantwide cooling water supply temperature, °C.
    pub t_cws_bar: f64,
    /// Plantwide cooling water return temperature, °C.
    pub t_cwr_bar: f64,
    /// Total tower heat rejection, kW.
    pub qdot_ct: f64,
    /// Total tower fan electric power, kW.
    pub p_ct: f64,
    /// Total cooling water pump electric power, kW.
    pub p_cwp: f64,
}

/// Resolved chilled-water-side flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChwFlows {
    pub mdot_chw: f64,
    pub mdot_sw: f64,
    pub mdot_bp: f64,
    pub mdot_rw: f64,
}

/// Resolves the primary/secondary/bypass flow balance. Every running
/// chiller circulates its nominal flow; the bypass takes up the slack and
/// must not run backward.
pub fn chw_flow_balance(
    input: &ChwLoopInput,
    nominal_flows: &[f64],
) -> Result<ChwFlows, ModelError> {
    let mdot_chw: f64 = input
        .chillers
        .iter()
        .zip(nominal_flows)
        .filter(|(c, _)| c.on)
        .map(|(_, nom)| *nom)
        .sum();
    let mdot_sw = input.mdot_lw + input.mdot_tw;
    if mdot_sw < -1e-9 {
        return Err(ModelError::infeasible(format!(
            "storage discharge {} kg/s exceeds load flow {} kg/s (secondary flow would reverse)",
            input.mdot_tw, input.mdot_lw
        )));
    }
    let mdot_sw = mdot_sw.max(0.0);
    let mdot_bp = mdot_chw - mdot_sw;
    if mdot_bp < -1e-9 {
        return Err(ModelError::infeasible(format!(
            "secondary demand {mdot_sw} kg/s exceeds primary chiller flow {mdot_chw} kg/s \
             (bypass would reverse)"
        )));
    }
    Ok(ChwFlows {
        mdot_chw,
        mdot_sw,
        mdot_bp: mdot_bp.max(0.0),
        mdot_rw: mdot_sw,
    })
}

/// Load water supply temperature at the storage tee: the chiller supply
/// blended with any storage discharge. With every chiller off the load is
/// served straight from the cold sub-tank.
pub fn mix_t_lws(t_sw: f64, t_twc: f64, mdot_tw: f64, mdot_lw: f64, any_chiller_on: bool) -> f64 {
    if !any_chiller_on {
        return t_twc;
    }
    t_sw + mdot_tw.min(0.0) / mdot_lw * (t_sw - t_twc)
}

/// Return water temperature after the storage tee: coil return blended
/// with warm sub-tank water expelled while charging. A zero secondary flow
/// passes the coil return through.
pub fn mix_t_rw(t_lwr: f64, t_tww: f64, mdot_tw: f64, mdot_sw: f64, any_chiller_on: bool) -> f64 {
    if !any_chiller_on {
        return t_tww;
    }
    if mdot_sw == 0.0 {
        return t_lwr;
    }
    t_lwr + mdot_tw.max(0.0) / mdot_sw * (t_tww - t_lwr)
}

/// Plantwide chilled water return: return water blended with bypassed
/// supply water.
pub fn mix_t_chwr(
    t_rw: f64,
    t_chws_bar: f64,
    mdot_bp: f64,
    mdot_chw: f64,
    any_chiller_on: bool,
) -> f64 {
    if !any_chiller_on || mdot_chw == 0.0 {
        return t_rw;
    }
    t_rw + mdot_bp / mdot_chw * (t_chws_bar - t_rw)
}

/// Flow-weighted mean temperature over the active units; `fallback` when
/// none are active (or they carry no flow).
pub fn weighted_avg_temp(temps: &[f64], flows: &[f64], on: &[bool], fallback: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..temps.len() {
        if on[i] {
            num += temps[i] * flows[i];
            den += flows[i];
        }
    }
    if den > 0.0 {
        num / den
    } else {
        fallback
    }
}

/// Mass conservation where the condenser outlets meet the tower inlets:
/// total condenser flow must equal total tower flow.
pub fn cw_mass_check(mdot_cd_total: f64, mdot_cw_total: f64) -> Result<(), ModelError> {
    let scale = 1.0f64.max(mdot_cd_total.abs().max(mdot_cw_total.abs()));
    if (mdot_cd_total - mdot_cw_total).abs() > 1e-9 * scale {
        return Err(ModelError::infeasible(format!(
            "cooling water mass balance violated: condensers {mdot_cd_total} kg/s vs towers \
             {mdot_cw_total} kg/s"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cmd(on: bool, mdot_cd: f64) -> ChillerCommand {
        ChillerCommand {
            on,
            mdot_chw: 0.0,
            mdot_cd,
        }
    }

    #[test]
    fn flow_balance_all_off_tes_only() {
        let input = ChwLoopInput {
            mdot_lw: 20.0,
            mdot_tw: -20.0,
            t_chws_set: 7.0,
            chillers: vec![cmd(false, 0.0), cmd(false, 0.0)],
        };
        let f = chw_flow_balance(&input, &[31.86, 81.30]).unwrap();
        assert_eq!(f.mdot_sw, 0.0);
        assert_eq!(f.mdot_chw, 0.0);
        assert_eq!(f.mdot_bp, 0.0);
    }

    #[test]
    fn flow_balance_one_chiller() {
        let input = ChwLoopInput {
            mdot_lw: 20.0,
            mdot_tw: 5.0,
            t_chws_set: 7.0,
            chillers: vec![cmd(true, 47.44), cmd(false, 0.0)],
        };
        let f = chw_flow_balance(&input, &[31.86, 81.30]).unwrap();
        assert_relative_eq!(f.mdot_sw, 25.0, max_relative = 1e-12);
        assert_relative_eq!(f.mdot_bp, 6.86, max_relative = 1e-10);
        assert_relative_eq!(f.mdot_rw, 25.0, max_relative = 1e-12);
    }

    #[test]
    fn flow_balance_rejects_reversed_bypass() {
        let input = ChwLoopInput {
            mdot_lw: 40.0,
            mdot_tw: 0.0,
            t_chws_set: 7.0,
            chillers: vec![cmd(true, 47.44), cmd(false, 0.0)],
        };
        assert!(chw_flow_balance(&input, &[31.86, 81.30]).is_err());
    }

    #[test]
    fn lws_no_discharge_passes_supply() {
        assert_eq!(mix_t_lws(7.0, 5.0, 4.0, 20.0, true), 7.0);
        assert_eq!(mix_t_lws(7.0, 5.0, 0.0, 20.0, true), 7.0);
    }

    #[test]
    fn lws_discharge_blend_hand_value() {
        // 7 + (-10/20)(7 - 5) = 6
        assert_relative_eq!(
            mix_t_lws(7.0, 5.0, -10.0, 20.0, true),
            6.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn lws_all_off_serves_cold_tank() {
        assert_eq!(mix_t_lws(7.0, 5.0, -10.0, 20.0, false), 5.0);
    }

    #[test]
    fn rw_no_charge_passes_coil_return() {
        assert_eq!(mix_t_rw(12.0, 14.0, -3.0, 20.0, true), 12.0);
    }

    #[test]
    fn rw_equal_flow_blend_is_midpoint() {
        // charge flow equals load flow: weights are 1/2 each
        assert_relative_eq!(
            mix_t_rw(12.0, 14.0, 10.0, 20.0, true),
            13.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rw_hand_weighted_blend() {
        // 12 + (5/25)(14 - 12) = 12.4
        assert_relative_eq!(
            mix_t_rw(12.0, 14.0, 5.0, 25.0, true),
            12.4,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rw_zero_secondary_flow_guard() {
        assert_eq!(mix_t_rw(12.0, 14.0, 0.0, 0.0, true), 12.0);
    }

    #[test]
    fn rw_all_off_returns_warm_tank() {
        assert_eq!(mix_t_rw(12.0, 14.0, 0.0, 20.0, false), 14.0);
    }

    #[test]
    fn chwr_zero_bypass_passes_return() {
        assert_eq!(mix_t_chwr(12.0, 7.0, 0.0, 31.86, true), 12.0);
    }

    #[test]
    fn chwr_full_bypass_is_supply() {
        assert_relative_eq!(
            mix_t_chwr(12.0, 7.0, 31.86, 31.86, true),
            7.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn chwr_half_bypass_hand_value() {
        // 12 + 0.5(7 - 12) = 9.5
        assert_relative_eq!(
            mix_t_chwr(12.0, 7.0, 15.93, 31.86, true),
            9.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn weighted_avg_symmetry_and_weights() {
        assert_relative_eq!(
            weighted_avg_temp(&[6.0, 8.0], &[10.0, 10.0], &[true, true], 35.0),
            7.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            weighted_avg_temp(&[6.0, 8.0], &[30.0, 10.0], &[true, true], 35.0),
            6.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn weighted_avg_fallback_when_none_active() {
        assert_eq!(
            weighted_avg_temp(&[6.0, 8.0], &[10.0, 10.0], &[false, false], 35.0),
            35.0
        );
    }

    #[test]
    fn mass_check_accepts_split_and_rejects_mismatch() {
        assert!(cw_mass_check(47.44, 47.44).is_ok());
        assert!(cw_mass_check(47.44, 23.72 + 23.72).is_ok());
        assert!(cw_mass_check(47.44, 40.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn mixing_outputs_stay_in_convex_hull(
            t_sw in 2.0..15.0f64,
            t_twc in 2.0..15.0f64,
            t_lwr in 8.0..20.0f64,
            t_tww in 8.0..20.0f64,
            t_chws in 2.0..15.0f64,
            mdot_tw in -30.0..30.0f64,
            mdot_lw in 0.5..60.0f64,
            bp_frac in 0.0..1.0f64,
        ) {
            // Discharge cannot exceed the load flow or the supply blend
            // weight leaves the physical range.
            let mdot_tw = mdot_tw.max(-mdot_lw);
            let lws = mix_t_lws(t_sw, t_twc, mdot_tw, mdot_lw, true);
            prop_assert!(lws >= t_sw.min(t_twc) - 1e-9 && lws <= t_sw.max(t_twc) + 1e-9);

            let mdot_sw = mdot_lw + mdot_tw;
            let rw = mix_t_rw(t_lwr, t_tww, mdot_tw, mdot_sw, true);
            prop_assert!(rw >= t_lwr.min(t_tww) - 1e-9 && rw <= t_lwr.max(t_tww) + 1e-9);

            let mdot_chw = 50.0;
            let chwr = mix_t_chwr(rw, t_chws, bp_frac * mdot_chw, mdot_chw, true);
            prop_assert!(chwr >= rw.min(t_chws) - 1e-9 && chwr <= rw.max(t_chws) + 1e-9);
        }
    }
}
