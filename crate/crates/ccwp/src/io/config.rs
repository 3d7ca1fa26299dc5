//! Plant configuration file.
//!
//! A hierarchical TOML document describing constants, the coil, the storage
//! tank, a list of chillers, a list of towers, initial conditions, and the
//! rule-based controller block. Equipment coefficient sets are referenced
//! by name and resolved against the bundled dataset (or an additional curve
//! file). Unspecified bounds fall back to the usual catalog defaults.

use std::path::Path;

use serde::Deserialize;

use super::curves::CurveDb;
use super::IoError;
use crate::chiller::{ChillerMode, ChillerParams, ChillerState};
use crate::coil::{CoilParams, CoilState};
use crate::controller::RuleBasedConfig;
use crate::core::{FilterCoeff, SimConstants};
use crate::optim::SolverSettings;
use crate::plant::{PlantParams, PlantState};
use crate::tes::{TesParams, TesState};
use crate::tower::{TowerParams, TowerState};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    #[serde(default)]
    pub sim: SimSection,
    pub coil: CoilSection,
    #[serde(default)]
    pub tes: TesSection,
    #[serde(default)]
    pub cooling_water: CoolingWaterSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub chillers: Vec<ChillerSection>,
    pub towers: Vec<TowerSection>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub controller: RuleBasedConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_t_s")]
    pub t_s: f64,
    #[serde(default = "default_c_pw")]
    pub c_pw: f64,
}

fn default_t_s() -> f64 {
    crate::core::DEFAULT_T_S
}

fn default_c_pw() -> f64 {
    crate::core::DEFAULT_C_PW
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            t_s: default_t_s(),
            c_pw: default_c_pw(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilSection {
    /// Return-temperature time constant, seconds.
    #[serde(default = "default_coil_tau")]
    pub tau_s: f64,
    /// Maximum allowable coil outlet temperature, degC.
    #[serde(default = "default_t_lwr_ub")]
    pub t_lwr_ub: f64,
    /// Coil piping flow bound, kg/s.
    pub mdot_lw_ub: f64,
}

fn default_coil_tau() -> f64 {
    300.0
}

fn default_t_lwr_ub() -> f64 {
    15.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TesSection {
    /// Total water mass, kg.
    #[serde(default = "default_m_tes")]
    pub m_tes: f64,
    #[serde(default = "default_s_lb")]
    pub s_lb: f64,
    #[serde(default = "default_s_ub")]
    pub s_ub: f64,
}

fn default_m_tes() -> f64 {
    1.413e5
}

fn default_s_lb() -> f64 {
    0.05
}

fn default_s_ub() -> f64 {
    0.95
}

impl Default for TesSection {
    fn default() -> Self {
        TesSection {
            m_tes: default_m_tes(),
            s_lb: default_s_lb(),
            s_ub: default_s_ub(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingWaterSection {
    /// Cooling water return temperature reported when no chiller runs, degC.
    #[serde(default = "default_t_cwr_nom")]
    pub t_cwr_nom: f64,
}

fn default_t_cwr_nom() -> f64 {
    35.0
}

impl Default for CoolingWaterSection {
    fn default() -> Self {
        CoolingWaterSection {
            t_cwr_nom: default_t_cwr_nom(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default = "default_max_refine_iters")]
    pub max_refine_iters: usize,
}

fn default_grid_points() -> usize {
    257
}

fn default_refine_tol() -> f64 {
    1e-7
}

fn default_max_refine_iters() -> usize {
    100
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            grid_points: default_grid_points(),
            refine_tol: default_refine_tol(),
            max_refine_iters: default_max_refine_iters(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChillerSection {
    /// Name of the curve block providing coefficients and nominals.
    pub curves: String,
    /// Evaporator outlet time constant, seconds.
    #[serde(default = "default_chiller_tau")]
    pub tau_evap_s: f64,
    /// Condenser outlet time constant, seconds.
    #[serde(default = "default_chiller_tau")]
    pub tau_cond_s: f64,
    /// Minimum chilled water supply setpoint, degC.
    #[serde(default = "default_t_chws_lb")]
    pub t_chws_lb: f64,
    /// Condenser return hard bound, degC.
    #[serde(default = "default_t_cdwr_ub")]
    pub t_cdwr_ub: f64,
    /// Fraction of electric power rejected at the condenser.
    #[serde(default = "default_eta_waste_heat")]
    pub eta_waste_heat: f64,
    /// Chilled water pump model coefficients.
    pub pump_a: [f64; 4],
    #[serde(default)]
    pub mode: ModeSection,
    /// Optional overrides of the curve-block nominals.
    pub qdot_evap_nom_kw: Option<f64>,
    pub cop_nom: Option<f64>,
    pub mdot_chw_nom: Option<f64>,
    pub mdot_cd_nom: Option<f64>,
}

fn default_chiller_tau() -> f64 {
    180.0
}

fn default_t_chws_lb() -> f64 {
    4.0
}

fn default_t_cdwr_ub() -> f64 {
    40.0
}

fn default_eta_waste_heat() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeSection {
    #[default]
    Saturated,
    LegacyUnsaturated,
}

impl From<ModeSection> for ChillerMode {
    fn from(m: ModeSection) -> ChillerMode {
        match m {
            ModeSection::Saturated => ChillerMode::Saturated,
            ModeSection::LegacyUnsaturated => ChillerMode::LegacyUnsaturated,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSection {
    /// Name of the curve block providing the approach correlation.
    pub curves: String,
    /// Nominal cooling water flow, kg/s.
    pub mdot_cw_nom: f64,
    /// Nominal air flow, kg/s.
    pub mdot_oa_nom: f64,
    #[serde(default = "default_t_ran_lb")]
    pub t_ran_lb: f64,
    #[serde(default = "default_t_ran_ub")]
    pub t_ran_ub: f64,
    #[serde(default = "default_t_app_lb")]
    pub t_app_lb: f64,
    #[serde(default = "default_t_app_ub")]
    pub t_app_ub: f64,
    /// Supply-temperature time constant, seconds.
    #[serde(default = "default_tower_tau")]
    pub tau_s: f64,
    /// Nominal fan power, kW.
    pub p_ct_nom_kw: f64,
    /// Cooling water pump model coefficients.
    pub pump_g: [f64; 4],
}

fn default_t_ran_lb() -> f64 {
    2.2
}

fn default_t_ran_ub() -> f64 {
    22.2
}

fn default_t_app_lb() -> f64 {
    0.0
}

fn default_t_app_ub() -> f64 {
    40.0
}

fn default_tower_tau() -> f64 {
    240.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "default_t_lwr_init")]
    pub t_lwr: f64,
    #[serde(default = "default_t_twc_init")]
    pub t_twc: f64,
    #[serde(default = "default_s_twc_init")]
    pub s_twc: f64,
    #[serde(default = "default_t_tww_init")]
    pub t_tww: f64,
    #[serde(default = "default_t_chws_init")]
    pub t_chws: f64,
    #[serde(default = "default_t_cdwr_init")]
    pub t_cdwr: f64,
    #[serde(default = "default_t_cws_init")]
    pub t_cws: f64,
}

fn default_t_lwr_init() -> f64 {
    12.0
}

fn default_t_twc_init() -> f64 {
    6.0
}

fn default_s_twc_init() -> f64 {
    0.5
}

fn default_t_tww_init() -> f64 {
    13.0
}

fn default_t_chws_init() -> f64 {
    7.0
}

fn default_t_cdwr_init() -> f64 {
    35.0
}

fn default_t_cws_init() -> f64 {
    29.44
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            t_lwr: default_t_lwr_init(),
            t_twc: default_t_twc_init(),
            s_twc: default_s_twc_init(),
            t_tww: default_t_tww_init(),
            t_chws: default_t_chws_init(),
            t_cdwr: default_t_cdwr_init(),
            t_cws: default_t_cws_init(),
        }
    }
}

/// Parses a plant config file.
pub fn load_config(path: &Path) -> Result<PlantConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::read(path, e))?;
    let cfg: PlantConfig =
        toml::from_str(&text).map_err(|e| IoError::parse(path, e.to_string()))?;
    Ok(cfg)
}

impl PlantConfig {
    /// Resolves curve references and builds the validated parameter set,
    /// collecting every validation failure instead of stopping at the
    /// first.
    pub fn build(&self, db: &CurveDb) -> Result<(PlantParams, PlantState), IoError> {
        let mut failures = Vec::new();

        let constants = SimConstants::new(self.sim.c_pw, self.sim.t_s)
            .map_err(|e| failures.push(e.to_string()))
            .ok();

        if self.chillers.is_empty() {
            failures.push("at least one chiller is required".to_string());
        }
        if self.towers.is_empty() {
            failures.push("at least one tower is required".to_string());
        }
        if !(self.tes.s_lb < self.tes.s_ub) {
            failures.push(format!(
                "storage fraction bounds must satisfy lb < ub, got [{}, {}]",
                self.tes.s_lb, self.tes.s_ub
            ));
        }
        if !(self.initial.s_twc >= self.tes.s_lb && self.initial.s_twc <= self.tes.s_ub) {
            failures.push(format!(
                "initial cold fraction {} outside [{}, {}]",
                self.initial.s_twc, self.tes.s_lb, self.tes.s_ub
            ));
        }

        let coil = FilterCoeff::from_time_constant(self.coil.tau_s, self.sim.t_s)
            .and_then(|a| CoilParams::new(a, self.coil.t_lwr_ub, self.coil.mdot_lw_ub))
            .map_err(|e| failures.push(format!("coil: {e}")))
            .ok();

        let tes = TesParams::new(self.tes.m_tes, self.tes.s_lb, self.tes.s_ub)
            .map_err(|e| failures.push(format!("storage: {e}")))
            .ok();

        let mut chillers = Vec::new();
        for (i, section) in self.chillers.iter().enumerate() {
            match self.build_chiller(section, db) {
                Ok(params) => chillers.push(params),
                Err(e) => failures.push(format!("chiller {}: {e}", i + 1)),
            }
        }

        let mut towers = Vec::new();
        for (j, section) in self.towers.iter().enumerate() {
            match self.build_tower(section, db) {
                Ok(params) => towers.push(params),
                Err(e) => failures.push(format!("tower {}: {e}", j + 1)),
            }
        }

        let solver = SolverSettings::new(
            self.solver.grid_points,
            self.solver.refine_tol,
            self.solver.max_refine_iters,
        )
        .map_err(|e| failures.push(format!("solver: {e}")))
        .ok();

        if !failures.is_empty() {
            return Err(IoError::Validation {
                path: "<config>".to_string(),
                failures,
            });
        }

        let params = PlantParams {
            constants: constants.unwrap(),
            coil: coil.unwrap(),
            tes: tes.unwrap(),
            chillers,
            towers,
            t_cwr_nom: self.cooling_water.t_cwr_nom,
            solver: solver.unwrap(),
        };
        params.validate()?;

        let state = PlantState {
            coil: CoilState {
                t_lwr: self.initial.t_lwr,
            },
            tes: TesState::new(
                self.initial.t_twc,
                self.initial.s_twc,
                self.initial.t_tww,
                1.0 - self.initial.s_twc,
            )?,
            chillers: vec![
                ChillerState {
                    t_chws: self.initial.t_chws,
                    t_cdwr: self.initial.t_cdwr,
                };
                params.n_chillers()
            ],
            towers: vec![
                TowerState {
                    t_cws: self.initial.t_cws,
                };
                params.n_towers()
            ],
        };

        Ok((params, state))
    }

    fn build_chiller(
        &self,
        section: &ChillerSection,
        db: &CurveDb,
    ) -> Result<ChillerParams, IoError> {
        let curves = db.chiller(&section.curves)?;
        let qdot_evap_nom = section.qdot_evap_nom_kw.unwrap_or(curves.qdot_evap_nom_kw);
        let cop = section.cop_nom.unwrap_or(curves.cop_nom);
        let params = ChillerParams {
            qdot_evap_nom,
            p_ch_nom: qdot_evap_nom / cop,
            cap_ft: curves.alpha,
            eir_ft: curves.beta,
            eir_fplr: curves.gamma_plr,
            plr_lb: curves.plr_lb,
            plr_ub: curves.plr_ub,
            eta_waste_heat: section.eta_waste_heat,
            a_ch: FilterCoeff::from_time_constant(section.tau_evap_s, self.sim.t_s)?,
            a_cd: FilterCoeff::from_time_constant(section.tau_cond_s, self.sim.t_s)?,
            t_chws_lb: section.t_chws_lb,
            t_cdwr_ub: section.t_cdwr_ub,
            mdot_chw_nom: section.mdot_chw_nom.unwrap_or(curves.mdot_chw_nom),
            mdot_cd_nom: section.mdot_cd_nom.unwrap_or(curves.mdot_cd_nom),
            pump_a: section.pump_a,
            mode: section.mode.into(),
        };
        params.validate()?;
        Ok(params)
    }

    fn build_tower(&self, section: &TowerSection, db: &CurveDb) -> Result<TowerParams, IoError> {
        let curves = db.tower(&section.curves)?;
        if curves.c.len() != 27 {
            return Err(IoError::UnknownCurves(format!(
                "{} (expected 27 coefficients, got {})",
                section.curves,
                curves.c.len()
            )));
        }
        let params = TowerParams {
            coeffs: curves.coeff_array(),
            lgr_ub: curves.lgr_ub,
            mdot_cw_nom: section.mdot_cw_nom,
            mdot_oa_nom: section.mdot_oa_nom,
            t_ran_lb: section.t_ran_lb,
            t_ran_ub: section.t_ran_ub,
            t_app_lb: section.t_app_lb,
            t_app_ub: section.t_app_ub,
            a_ct: FilterCoeff::from_time_constant(section.tau_s, self.sim.t_s)?,
            p_ct_nom: section.p_ct_nom_kw,
            pump_g: section.pump_g,
        };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [coil]
        mdot_lw_ub = 100.0

        [[chillers]]
        curves = "carrier_19xr_823kw"
        pump_a = [2.0, 0.3, 0.25, 0.6]

        [[chillers]]
        curves = "york_yt_2100kw"
        pump_a = [4.0, 0.3, 0.22, 1.0]

        [[towers]]
        curves = "yorkcalc"
        mdot_cw_nom = 47.44
        mdot_oa_nom = 39.53
        p_ct_nom_kw = 15.0
        pump_g = [2.5, 0.25, 0.18, 0.5]

        [[towers]]
        curves = "yorkcalc"
        mdot_cw_nom = 121.05
        mdot_oa_nom = 100.88
        p_ct_nom_kw = 38.0
        pump_g = [4.5, 0.25, 0.15, 0.75]
    "#;

    #[test]
    fn minimal_config_fills_catalog_defaults() {
        let cfg: PlantConfig = toml::from_str(MINIMAL).unwrap();
        let (params, state) = cfg.build(&CurveDb::bundled()).unwrap();
        assert_eq!(params.constants.t_s, 60.0);
        assert_eq!(params.coil.t_lwr_ub, 15.0);
        assert_eq!(params.tes.m_tes, 1.413e5);
        assert_eq!(params.tes.s_lb, 0.05);
        assert_eq!(params.tes.s_ub, 0.95);
        assert_eq!(params.t_cwr_nom, 35.0);
        assert_eq!(params.chillers[0].t_cdwr_ub, 40.0);
        assert_eq!(params.chillers[0].qdot_evap_nom, 823.0);
        assert_eq!(params.chillers[1].qdot_evap_nom, 2100.0);
        assert_eq!(params.towers[0].t_ran_lb, 2.2);
        assert_eq!(params.towers[0].t_ran_ub, 22.2);
        assert_eq!(state.dim(), 10);
    }

    #[test]
    fn missing_curve_set_is_an_error() {
        let text = MINIMAL.replace("carrier_19xr_823kw", "not_a_chiller");
        let cfg: PlantConfig = toml::from_str(&text).unwrap();
        let err = cfg.build(&CurveDb::bundled()).unwrap_err();
        assert!(err.to_string().contains("not_a_chiller"), "{err}");
    }

    #[test]
    fn inverted_fraction_bounds_fail_validation() {
        let text = format!("{MINIMAL}\n[tes]\ns_lb = 0.9\ns_ub = 0.1\n");
        let cfg: PlantConfig = toml::from_str(&text).unwrap();
        let err = cfg.build(&CurveDb::bundled()).unwrap_err();
        match err {
            IoError::Validation { failures, .. } => {
                assert!(
                    failures.iter().any(|f| f.contains("lb < ub")),
                    "{failures:?}"
                )
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn legacy_mode_parses() {
        let text = MINIMAL.replace(
            "curves = \"carrier_19xr_823kw\"",
            "curves = \"carrier_19xr_823kw\"\nmode = \"legacy_unsaturated\"",
        );
        let cfg: PlantConfig = toml::from_str(&text).unwrap();
        let (params, _) = cfg.build(&CurveDb::bundled()).unwrap();
        assert_eq!(
            params.chillers[0].mode,
            crate::chiller::ChillerMode::LegacyUnsaturated
        );
    }
}
