//! Named performance-curve dataset.
//!
//! Coefficient sets are resolved by name against a bundled dataset compiled
//! into the binary; an additional curve file can be loaded to extend or
//! override entries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::IoError;

/// Dataset shipped with the crate.
pub const BUNDLED_CURVES: &str = include_str!("../../data/equipment_curves.toml");

/// One chiller curve block: biquadratic capacity/EIR modifiers, quadratic
/// part-load curve, part-load bounds, and reference nominals.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChillerCurves {
    pub display_name: String,
    /// Nominal evaporator capacity, kW.
    pub qdot_evap_nom_kw: f64,
    /// Rated coefficient of performance; nominal power is capacity / COP.
    pub cop_nom: f64,
    /// Nominal chilled water flow, kg/s.
    pub mdot_chw_nom: f64,
    /// Nominal condenser water flow, kg/s.
    pub mdot_cd_nom: f64,
    pub alpha: [f64; 6],
    pub beta: [f64; 6],
    pub gamma_plr: [f64; 3],
    pub plr_lb: f64,
    pub plr_ub: f64,
}

/// One tower curve block: the 27-coefficient approach correlation in
/// lexicographic (wet-bulb, range, liquid-gas-ratio) exponent order and the
/// liquid-gas ratio clamp.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerCurves {
    pub display_name: String,
    pub lgr_ub: f64,
    pub c: Vec<f64>,
}

/// All named curve sets available for config resolution.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct CurveDb {
    #[serde(default)]
    pub chillers: BTreeMap<String, ChillerCurves>,
    #[serde(default)]
    pub towers: BTreeMap<String, TowerCurves>,
}

impl CurveDb {
    /// The dataset compiled into the binary.
    pub fn bundled() -> CurveDb {
        let db: CurveDb = toml::from_str(BUNDLED_CURVES).expect("bundled curve dataset must parse");
        db.validated("<bundled>")
            .expect("bundled curve dataset must validate")
    }

    /// Loads an external curve file and merges it over the bundled
    /// dataset (external entries win on name collisions).
    pub fn bundled_with(path: &Path) -> Result<CurveDb, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::read(path, e))?;
        let extra: CurveDb =
            toml::from_str(&text).map_err(|e| IoError::parse(path, e.to_string()))?;
        let extra = extra.validated(&path.display().to_string())?;
        let mut db = CurveDb::bundled();
        db.chillers.extend(extra.chillers);
        db.towers.extend(extra.towers);
        Ok(db)
    }

    fn validated(self, origin: &str) -> Result<CurveDb, IoError> {
        let mut failures = Vec::new();
        for (name, ch) in &self.chillers {
            if !(ch.qdot_evap_nom_kw > 0.0) {
                failures.push(format!("chiller '{name}': capacity must be positive"));
            }
            if !(ch.cop_nom > 0.0) {
                failures.push(format!("chiller '{name}': COP must be positive"));
            }
            if !(ch.mdot_chw_nom > 0.0) || !(ch.mdot_cd_nom > 0.0) {
                failures.push(format!("chiller '{name}': nominal flows must be positive"));
            }
            if !(0.0 < ch.plr_lb && ch.plr_lb <= ch.plr_ub) {
                failures.push(format!("chiller '{name}': bad part-load bounds"));
            }
        }
        for (name, t) in &self.towers {
            if t.c.len() != 27 {
                failures.push(format!(
                    "tower '{name}': expected 27 approach coefficients, got {}",
                    t.c.len()
                ));
            }
            if !(t.lgr_ub > 0.0) {
                failures.push(format!("tower '{name}': liquid-gas clamp must be positive"));
            }
        }
        if failures.is_empty() {
            Ok(self)
        } else {
            Err(IoError::Validation {
                path: origin.to_string(),
                failures,
            })
        }
    }

    pub fn chiller(&self, name: &str) -> Result<&ChillerCurves, IoError> {
        self.chillers
            .get(name)
            .ok_or_else(|| IoError::UnknownCurves(name.to_string()))
    }

    pub fn tower(&self, name: &str) -> Result<&TowerCurves, IoError> {
        self.towers
            .get(name)
            .ok_or_else(|| IoError::UnknownCurves(name.to_string()))
    }
}

impl TowerCurves {
    pub fn coeff_array(&self) -> [f64; 27] {
        let mut arr = [0.0; 27];
        arr.copy_from_slice(&self.c);
        arr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bundled_dataset_parses_and_has_expected_entries() {
        let db = CurveDb::bundled();
        assert!(db.chillers.contains_key("carrier_19xr_823kw"));
        assert!(db.chillers.contains_key("york_yt_2100kw"));
        assert!(db.chillers.contains_key("mcquay_wsc_471kw"));
        assert!(db.towers.contains_key("yorkcalc"));
        let carrier = db.chiller("carrier_19xr_823kw").unwrap();
        assert_eq!(carrier.qdot_evap_nom_kw, 823.0);
        assert_eq!(carrier.mdot_chw_nom, 31.86);
        assert_eq!(carrier.mdot_cd_nom, 47.44);
    }

    #[test]
    fn bundled_curves_normalized_near_reference() {
        // The biquadratic modifiers should evaluate to ~1 at the reference
        // point (6.67 degC leaving chilled water, 29.44 degC entering
        // condenser water).
        let db = CurveDb::bundled();
        let ch = db.chiller("carrier_19xr_823kw").unwrap();
        let cap = crate::chiller::cap_fun_t(&ch.alpha, 6.67, 29.44);
        let eir = crate::chiller::eir_fun_t(&ch.beta, 6.67, 29.44);
        assert_relative_eq!(cap, 1.0, epsilon = 0.01);
        assert_relative_eq!(eir, 1.0, epsilon = 0.01);
        let plr_sum: f64 = ch.gamma_plr.iter().sum();
        assert_relative_eq!(plr_sum, 1.0, epsilon = 0.01);
    }

    #[test]
    fn unknown_name_is_an_error() {
        let db = CurveDb::bundled();
        assert!(matches!(
            db.chiller("no_such_chiller"),
            Err(IoError::UnknownCurves(_))
        ));
    }

    #[test]
    fn yorkcalc_block_has_27_coefficients() {
        let db = CurveDb::bundled();
        let t = db.tower("yorkcalc").unwrap();
        assert_eq!(t.c.len(), 27);
        assert_eq!(t.lgr_ub, 8.0);
    }
}
