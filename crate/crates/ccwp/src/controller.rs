//! Supervisory controllers for closed-loop simulation.
//!
//! A controller maps the current observation (plant state, last outputs,
//! exogenous load/weather/price) to the next plant input. Three
//! implementations are provided: a price-aware rule-based controller, a
//! constant-input controller, and a replay controller fed from a CSV of
//! precomputed inputs (useful for open-loop tests and for driving the
//! plant from controllers written in other languages).

use std::collections::VecDeque;
use std::path::Path;

use serde::Deserialize;

use crate::io::IoError;
use crate::loops::{ChillerCommand, ChwLoopInput, CwLoopInput, TowerCommand};
use crate::plant::{PlantInput, PlantOutput, PlantParams, PlantState};

/// Everything a controller sees at one step.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub step: usize,
    pub state: &'a PlantState,
    /// Outputs from the previous step, absent at the first step.
    pub last_output: Option<&'a PlantOutput>,
    /// Current cooling demand, kW.
    pub qdot_load: f64,
    /// Current outdoor-air wet bulb, °C.
    pub t_oawb: f64,
    /// Current electricity price, currency/kWh.
    pub price: f64,
}

/// Supervisory control policy.
pub trait Controller {
    fn next_input(&mut self, params: &PlantParams, obs: &Observation) -> PlantInput;
}

/// Tuning for the built-in rule-based controller.
///
/// The policy: stage chillers so combined nominal capacity covers the
/// current load with margin; set the coil flow from the load at a design
/// temperature split; charge the storage tank when electricity is cheaper
/// than its rolling-window quantile and spare chiller capacity exists;
/// discharge when it is expensive and the tank holds charge. Tower water
/// flows match the condenser flows they must absorb, with air flow tracking
/// the water flow fraction.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleBasedConfig {
    /// Quantile of the rolling price window separating cheap from
    /// expensive hours.
    #[serde(default = "default_price_quantile")]
    pub price_quantile: f64,
    /// Rolling price window length, hours.
    #[serde(default = "default_price_window_hours")]
    pub price_window_hours: f64,
    /// Staged capacity must cover `margin × load`.
    #[serde(default = "default_stage_margin")]
    pub stage_margin: f64,
    /// Storage charge flow magnitude, kg/s.
    #[serde(default = "default_tes_flow")]
    pub tes_charge_mdot: f64,
    /// Storage discharge flow magnitude, kg/s.
    #[serde(default = "default_tes_flow")]
    pub tes_discharge_mdot: f64,
    /// Keep-out band above/below the storage fraction bounds.
    #[serde(default = "default_soc_margin")]
    pub soc_margin: f64,
    /// Design coil temperature split used to size charge reserves, K.
    #[serde(default = "default_design_delta_t")]
    pub design_delta_t: f64,
    /// Smallest coil temperature split assumed when scheduling flow, K.
    #[serde(default = "default_min_coil_delta_t")]
    pub min_coil_delta_t: f64,
    /// Explicit staging thresholds: run `i` chillers once the load
    /// fraction of total capacity crosses the `i`-th entry. Empty means
    /// automatic staging by cumulative capacity with `stage_margin`.
    #[serde(default)]
    pub staging_fractions: Vec<f64>,
    /// Chilled water supply setpoint, °C.
    #[serde(default = "default_t_chws_set")]
    pub t_chws_set: f64,
    /// Coil flow floor, kg/s.
    #[serde(default = "default_min_coil_flow")]
    pub min_coil_flow: f64,
    /// Tower air flow fraction as a multiple of the water flow fraction.
    #[serde(default = "default_air_flow_ratio")]
    pub air_flow_ratio: f64,
}

fn default_price_quantile() -> f64 {
    0.5
}

fn default_price_window_hours() -> f64 {
    24.0
}

fn default_stage_margin() -> f64 {
    1.1
}

fn default_tes_flow() -> f64 {
    40.0
}

fn default_soc_margin() -> f64 {
    0.05
}

fn default_design_delta_t() -> f64 {
    8.0
}

fn default_min_coil_delta_t() -> f64 {
    1.0
}

fn default_t_chws_set() -> f64 {
    7.0
}

fn default_min_coil_flow() -> f64 {
    0.5
}

fn default_air_flow_ratio() -> f64 {
    1.0
}

impl Default for RuleBasedConfig {
    fn default() -> Self {
        RuleBasedConfig {
            price_quantile: default_price_quantile(),
            price_window_hours: default_price_window_hours(),
            stage_margin: default_stage_margin(),
            tes_charge_mdot: default_tes_flow(),
            tes_discharge_mdot: default_tes_flow(),
            soc_margin: default_soc_margin(),
            design_delta_t: default_design_delta_t(),
            min_coil_delta_t: default_min_coil_delta_t(),
            staging_fractions: Vec::new(),
            t_chws_set: default_t_chws_set(),
            min_coil_flow: default_min_coil_flow(),
            air_flow_ratio: default_air_flow_ratio(),
        }
    }
}

/// Price-aware rule-based controller. Clamps every command against the
/// plant bounds before returning, so its inputs pass the feasibility gate
/// by construction.
pub struct RuleBasedController {
    cfg: RuleBasedConfig,
    price_window: VecDeque<f64>,
}

impl RuleBasedController {
    pub fn new(cfg: RuleBasedConfig) -> Self {
        RuleBasedController {
            cfg,
            price_window: VecDeque::new(),
        }
    }

    fn price_threshold(&mut self, price: f64, t_s: f64) -> f64 {
        let window_steps = ((self.cfg.price_window_hours * 3600.0 / t_s).round() as usize).max(1);
        self.price_window.push_back(price);
        while self.price_window.len() > window_steps {
            self.price_window.pop_front();
        }
        let mut sorted: Vec<f64> = self.price_window.iter().copied().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = ((sorted.len() - 1) as f64 * self.cfg.price_quantile).round() as usize;
        sorted[idx]
    }
}

impl Controller for RuleBasedController {
    fn next_input(&mut self, params: &PlantParams, obs: &Observation) -> PlantInput {
        let c_pw = params.constants.c_pw;
        let t_s = params.constants.t_s;
        let load = obs.qdot_load.max(0.0);

        let threshold = self.price_threshold(obs.price, t_s);
        let cheap = obs.price <= threshold;
        let cfg = &self.cfg;

        // Storage headroom in flow units for one step.
        let tes = &params.tes;
        let soc = obs.state.tes.s_twc;
        let max_charge = ((tes.s_ub - cfg.soc_margin - soc) * tes.m_tes / t_s).max(0.0);
        let max_discharge = ((soc - tes.s_lb - cfg.soc_margin) * tes.m_tes / t_s).max(0.0);
        let want_charge = cheap && max_charge > 0.0;
        let want_discharge = !cheap && max_discharge > 0.0 && load > 0.0;

        // Stage chillers in declared order: either by explicit load-fraction
        // thresholds, or until cumulative capacity covers the load with
        // margin plus a reserve for charging.
        let charge_reserve = if want_charge {
            c_pw * cfg.tes_charge_mdot * cfg.design_delta_t
        } else {
            0.0
        };
        let mut n_on = if cfg.staging_fractions.is_empty() {
            let needed = cfg.stage_margin * load + charge_reserve;
            let mut count = 0;
            let mut staged_cap = 0.0;
            for ch in &params.chillers {
                if needed > 0.0 && staged_cap < needed {
                    staged_cap += ch.qdot_evap_nom;
                    count += 1;
                }
            }
            count
        } else {
            let fraction = load / params.total_capacity();
            cfg.staging_fractions
                .iter()
                .filter(|&&f| fraction > f)
                .count()
                .min(params.chillers.len())
        };

        // Coil flow: deliver the load against the supply temperature the
        // coil will actually see, saturating at the pipe bound.
        let t_sw_est = if n_on == 0 {
            obs.state.tes.t_twc
        } else {
            let num: f64 = obs.state.chillers[..n_on]
                .iter()
                .zip(&params.chillers[..n_on])
                .map(|(s, p)| s.t_chws * p.mdot_chw_nom)
                .sum();
            let den: f64 = params.chillers[..n_on].iter().map(|p| p.mdot_chw_nom).sum();
            num / den
        };
        let delta_t = (params.coil.t_lwr_ub - t_sw_est).max(cfg.min_coil_delta_t);
        let mut mdot_lw =
            (load / (c_pw * delta_t)).clamp(cfg.min_coil_flow, params.coil.mdot_lw_ub);

        // Storage-only service needs the tank to actually cover the coil
        // flow at a usable temperature.
        if n_on == 0 && (max_discharge < mdot_lw || obs.state.tes.t_twc > params.coil.t_lwr_ub) {
            n_on = 1;
        }

        let staged_flow: f64 = params.chillers[..n_on].iter().map(|c| c.mdot_chw_nom).sum();
        let staged_cap: f64 = params.chillers[..n_on]
            .iter()
            .map(|c| c.qdot_evap_nom)
            .sum();

        let mdot_tw = if n_on == 0 {
            // All chilled water comes from the tank; the secondary loop
            // carries no chiller water.
            -mdot_lw
        } else {
            mdot_lw = mdot_lw.min(staged_flow);
            if want_charge {
                let headroom = (staged_flow - mdot_lw).max(0.0);
                let spare_kw = (staged_cap - load).max(0.0);
                let flow_from_cap = spare_kw / (c_pw * cfg.design_delta_t);
                cfg.tes_charge_mdot
                    .min(headroom)
                    .min(max_charge)
                    .min(flow_from_cap)
                    .max(0.0)
            } else if want_discharge {
                -cfg.tes_discharge_mdot.min(mdot_lw).min(max_discharge)
            } else {
                0.0
            }
        };

        let chillers: Vec<ChillerCommand> = params
            .chillers
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                if i < n_on {
                    ChillerCommand {
                        on: true,
                        mdot_chw: ch.mdot_chw_nom,
                        mdot_cd: ch.mdot_cd_nom,
                    }
                } else {
                    ChillerCommand {
                        on: false,
                        mdot_chw: 0.0,
                        mdot_cd: 0.0,
                    }
                }
            })
            .collect();
        let total_cd: f64 = chillers.iter().filter(|c| c.on).map(|c| c.mdot_cd).sum();

        // Stage towers until their nominal flow covers the condenser flow,
        // then split it proportionally to nominal.
        let mut towers = vec![
            TowerCommand {
                on: false,
                mdot_cw: 0.0,
                mdot_oa: 0.0,
            };
            params.towers.len()
        ];
        if total_cd > 0.0 {
            let mut staged = 0;
            let mut staged_nom = 0.0;
            for t in &params.towers {
                staged += 1;
                staged_nom += t.mdot_cw_nom;
                if staged_nom >= total_cd {
                    break;
                }
            }
            for (j, t) in params.towers.iter().take(staged).enumerate() {
                let mdot_cw = total_cd * t.mdot_cw_nom / staged_nom;
                let fr_wat = mdot_cw / t.mdot_cw_nom;
                let fr_air = (cfg.air_flow_ratio * fr_wat).clamp(0.0, 1.0);
                towers[j] = TowerCommand {
                    on: true,
                    mdot_cw,
                    mdot_oa: fr_air * t.mdot_oa_nom,
                };
            }
        }

        PlantInput {
            chw: ChwLoopInput {
                mdot_lw,
                mdot_tw,
                t_chws_set: cfg.t_chws_set,
                chillers,
            },
            cw: CwLoopInput { towers },
        }
    }
}

/// Replays the same input every step.
pub struct ConstantController {
    input: PlantInput,
}

impl ConstantController {
    pub fn new(input: PlantInput) -> Self {
        ConstantController { input }
    }

    /// Everything off; the coil circulates `mdot_lw` drawn from the
    /// storage tank.
    pub fn all_off(params: &PlantParams, mdot_lw: f64) -> Self {
        ConstantController {
            input: PlantInput {
                chw: ChwLoopInput {
                    mdot_lw,
                    mdot_tw: -mdot_lw,
                    t_chws_set: 7.0,
                    chillers: vec![
                        ChillerCommand {
                            on: false,
                            mdot_chw: 0.0,
                            mdot_cd: 0.0,
                        };
                        params.n_chillers()
                    ],
                },
                cw: CwLoopInput {
                    towers: vec![
                        TowerCommand {
                            on: false,
                            mdot_cw: 0.0,
                            mdot_oa: 0.0,
                        };
                        params.n_towers()
                    ],
                },
            },
        }
    }
}

impl Controller for ConstantController {
    fn next_input(&mut self, _params: &PlantParams, _obs: &Observation) -> PlantInput {
        self.input.clone()
    }
}

/// Replays a precomputed input trace; steps beyond the last row repeat it.
pub struct ExternalCsvController {
    rows: Vec<PlantInput>,
}

/// Header for the external input format with `n_ch` chillers and `n_ct`
/// towers.
pub fn input_csv_header(n_ch: usize, n_ct: usize) -> String {
    let mut cols: Vec<String> = vec!["mdot_lw".into(), "mdot_tw".into(), "T_chws_set".into()];
    for i in 1..=n_ch {
        cols.push(format!("on_ch_{i}"));
        cols.push(format!("mdot_chw_{i}"));
        cols.push(format!("mdot_cd_{i}"));
    }
    for j in 1..=n_ct {
        cols.push(format!("on_ct_{j}"));
        cols.push(format!("mdot_cw_{j}"));
        cols.push(format!("mdot_oa_{j}"));
    }
    cols.join(",")
}

impl ExternalCsvController {
    pub fn from_file(path: &Path, n_ch: usize, n_ct: usize) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::read(path, e))?;
        let mut lines = text.lines().filter(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let header = lines
            .next()
            .ok_or_else(|| IoError::parse(path, "empty input file"))?;
        let expected = input_csv_header(n_ch, n_ct);
        if header.trim() != expected {
            return Err(IoError::parse(
                path,
                format!("expected header '{expected}', got '{}'", header.trim()),
            ));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .trim()
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| IoError::parse(path, format!("line {}: {e}", lineno + 2)))?;
            let expected_len = 3 + 3 * n_ch + 3 * n_ct;
            if fields.len() != expected_len {
                return Err(IoError::parse(
                    path,
                    format!(
                        "line {}: expected {expected_len} fields, got {}",
                        lineno + 2,
                        fields.len()
                    ),
                ));
            }
            let mut chillers = Vec::with_capacity(n_ch);
            for i in 0..n_ch {
                let base = 3 + 3 * i;
                chillers.push(ChillerCommand {
                    on: fields[base] != 0.0,
                    mdot_chw: fields[base + 1],
                    mdot_cd: fields[base + 2],
                });
            }
            let mut towers = Vec::with_capacity(n_ct);
            for j in 0..n_ct {
                let base = 3 + 3 * n_ch + 3 * j;
                towers.push(TowerCommand {
                    on: fields[base] != 0.0,
                    mdot_cw: fields[base + 1],
                    mdot_oa: fields[base + 2],
                });
            }
            rows.push(PlantInput {
                chw: ChwLoopInput {
                    mdot_lw: fields[0],
                    mdot_tw: fields[1],
                    t_chws_set: fields[2],
                    chillers,
                },
                cw: CwLoopInput { towers },
            });
        }
        if rows.is_empty() {
            return Err(IoError::parse(path, "input file has no rows"));
        }
        Ok(ExternalCsvController { rows })
    }
}

impl Controller for ExternalCsvController {
    fn next_input(&mut self, _params: &PlantParams, obs: &Observation) -> PlantInput {
        let idx = obs.step.min(self.rows.len() - 1);
        self.rows[idx].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_header_layout() {
        assert_eq!(
            input_csv_header(1, 1),
            "mdot_lw,mdot_tw,T_chws_set,on_ch_1,mdot_chw_1,mdot_cd_1,on_ct_1,mdot_cw_1,mdot_oa_1"
        );
    }

    #[test]
    fn external_csv_parses_and_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inputs.csv");
        std::fs::write(
            &path,
            format!(
                "{}\n20,0,7,1,31.86,47.44,1,47.44,39.53\n25,5,7,1,31.86,47.44,1,47.44,39.53\n",
                input_csv_header(1, 1)
            ),
        )
        .unwrap();
        let ctrl = ExternalCsvController::from_file(&path, 1, 1).unwrap();
        assert_eq!(ctrl.rows.len(), 2);
        assert_eq!(ctrl.rows[0].chw.mdot_lw, 20.0);
        assert!(ctrl.rows[1].chw.chillers[0].on);
    }

    #[test]
    fn external_csv_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inputs.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(ExternalCsvController::from_file(&path, 1, 1).is_err());
    }
}
