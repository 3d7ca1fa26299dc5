//! Full plant composition: state/input/disturbance/output vectors, the
//! input feasibility gate, and the one-step state propagation.
//!
//! The step is synchronous: every cross-equipment coupling (mixing
//! temperatures, loop fan-outs) is evaluated at current-step values, so
//! propagation is a pure function with no inner fixed-point iteration. The
//! one-step transport lag this introduces is of the same order as the
//! equipment filter dynamics.

use crate::chiller::{self, ChillerInput, ChillerParams, ChillerState};
use crate::coil::{self, CoilDisturbance, CoilInput, CoilParams, CoilState};
use crate::core::{SimConstants, MIN_FLOW};
use crate::error::ModelError;
use crate::loops::{self, ChwLoopInput, ChwLoopOutputs, CwLoopInput, CwLoopOutputs};
use crate::optim::SolverSettings;
use crate::tes::{self, TesInput, TesParams, TesState};
use crate::tower::{self, TowerDisturbance, TowerInput, TowerParams, TowerState};

/// Condenser water return temperature above which piping and tower fill
/// are at risk; monitored (not enforced) during simulation.
pub const T_WATER_SAFE_UB: f64 = 48.9;

/// Complete plant parameter set.
#[derive(Debug, Clone)]
pub struct PlantParams {
    pub constants: SimConstants,
    pub coil: CoilParams,
    pub tes: TesParams,
    pub chillers: Vec<ChillerParams>,
    pub towers: Vec<TowerParams>,
    /// Cooling water return temperature reported when no chiller runs, °C.
    pub t_cwr_nom: f64,
    pub solver: SolverSettings,
}

impl PlantParams {
    pub fn n_chillers(&self) -> usize {
        self.chillers.len()
    }

    pub fn n_towers(&self) -> usize {
        self.towers.len()
    }

    /// Combined nominal evaporator capacity, kW.
    pub fn total_capacity(&self) -> f64 {
        self.chillers.iter().map(|c| c.qdot_evap_nom).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.chillers.is_empty() {
            return Err(ModelError::invalid_param(
                "plant needs at least one chiller",
            ));
        }
        if self.towers.is_empty() {
            return Err(ModelError::invalid_param("plant needs at least one tower"));
        }
        for ch in &self.chillers {
            ch.validate()?;
        }
        for t in &self.towers {
            t.validate()?;
        }
        Ok(())
    }
}

/// Concatenated plant state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub coil: CoilState,
    pub tes: TesState,
    pub chillers: Vec<ChillerState>,
    pub towers: Vec<TowerState>,
}

impl PlantState {
    /// Length of the flattened state vector: coil (1) + storage (3
    /// independent values; the warm fraction is determined by mass
    /// conservation) + two per chiller + one per tower.
    pub fn dim(&self) -> usize {
        4 + 2 * self.chillers.len() + self.towers.len()
    }

    /// Flattens to a vector of length [`dim`](Self::dim), dropping the
    /// redundant warm-tank fraction.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.coil.t_lwr);
        v.push(self.tes.t_twc);
        v.push(self.tes.s_twc);
        v.push(self.tes.t_tww);
        for ch in &self.chillers {
            v.push(ch.t_chws);
            v.push(ch.t_cdwr);
        }
        for t in &self.towers {
            v.push(t.t_cws);
        }
        v
    }

    /// Largest water temperature anywhere in the plant, °C.
    pub fn max_water_temp(&self) -> f64 {
        let mut m = self.coil.t_lwr.max(self.tes.t_twc).max(self.tes.t_tww);
        for ch in &self.chillers {
            m = m.max(ch.t_chws).max(ch.t_cdwr);
        }
        for t in &self.towers {
            m = m.max(t.t_cws);
        }
        m
    }

    /// Smallest water temperature anywhere in the plant, °C.
    pub fn min_water_temp(&self) -> f64 {
        let mut m = self.coil.t_lwr.min(self.tes.t_twc).min(self.tes.t_tww);
        for ch in &self.chillers {
            m = m.min(ch.t_chws).min(ch.t_cdwr);
        }
        for t in &self.towers {
            m = m.min(t.t_cws);
        }
        m
    }
}

/// Plantwide control command.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantInput {
    pub chw: ChwLoopInput,
    pub cw: CwLoopInput,
}

/// Exogenous disturbances: cooling load and outdoor-air wet bulb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantDisturbance {
    /// Aggregate cooling demand, kW.
    pub qdot_load: f64,
    /// Outdoor-air wet bulb temperature, °C.
    pub t_oawb: f64,
}

/// Plant outputs for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantOutput {
    pub chw: ChwLoopOutputs,
    pub cw: CwLoopOutputs,
    /// Total electric power: chillers + tower fans + both pump groups, kW.
    pub p_tot: f64,
}

/// One failed feasibility check, naming the constraint and the offending
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub details: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.constraint, self.details)
    }
}

/// Errors from [`plant_step`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("infeasible plant input: {}", format_violations(.0))]
    Infeasible(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs every input feasibility check and returns all violations found.
///
/// Mirrors the checks the equipment models enforce (coil input constraints,
/// storage fraction bounds) plus the interconnection constraints that only
/// exist at plant level: running chillers need condenser flow, the bypass
/// cannot reverse, commanded primary flows must match primary-secondary
/// pumping, and condenser flow must balance tower flow.
pub fn check_inputs(p: &PlantParams, x: &PlantState, u: &PlantInput) -> Vec<Violation> {
    let mut v = Vec::new();
    let any_on = u.chw.any_chiller_on();

    // Coil: flow bounds and the no-heating constraint on the supply
    // temperature it will actually see this step.
    if u.chw.mdot_lw < MIN_FLOW || u.chw.mdot_lw > p.coil.mdot_lw_ub {
        v.push(Violation {
            constraint: "coil flow bounds".to_string(),
            details: format!(
                "mdot_lw = {} must lie in [{MIN_FLOW}, {}]",
                u.chw.mdot_lw, p.coil.mdot_lw_ub
            ),
        });
    } else {
        let t_sw = chw_supply_temp(p, x, u, any_on);
        let t_lws = loops::mix_t_lws(t_sw, x.tes.t_twc, u.chw.mdot_tw, u.chw.mdot_lw, any_on);
        if t_lws > p.coil.t_lwr_ub {
            v.push(Violation {
                constraint: "coil supply temperature".to_string(),
                details: format!(
                    "t_lws = {t_lws:.3} exceeds outlet bound {} (would heat the coil)",
                    p.coil.t_lwr_ub
                ),
            });
        }
    }

    // Storage: one-step fraction bounds and over-drain guards.
    if let Err(e) = tes::check_flow(&p.tes, &x.tes, u.chw.mdot_tw, p.constants.t_s) {
        v.push(Violation {
            constraint: "storage fraction bounds".to_string(),
            details: e.to_string(),
        });
    }

    // Chilled water loop flow balance.
    let nominal: Vec<f64> = p.chillers.iter().map(|c| c.mdot_chw_nom).collect();
    if u.chw.chillers.len() != p.chillers.len() {
        v.push(Violation {
            constraint: "chiller command count".to_string(),
            details: format!(
                "{} commands for {} chillers",
                u.chw.chillers.len(),
                p.chillers.len()
            ),
        });
        return v;
    }
    if u.cw.towers.len() != p.towers.len() {
        v.push(Violation {
            constraint: "tower command count".to_string(),
            details: format!(
                "{} commands for {} towers",
                u.cw.towers.len(),
                p.towers.len()
            ),
        });
        return v;
    }
    if let Err(e) = loops::chw_flow_balance(&u.chw, &nominal) {
        v.push(Violation {
            constraint: "bypass flow".to_string(),
            details: e.to_string(),
        });
    }

    // Per-chiller commands: primary-secondary consistency and condenser
    // flow for running chillers.
    for (i, (cmd, params)) in u.chw.chillers.iter().zip(&p.chillers).enumerate() {
        if cmd.on {
            if cmd.mdot_cd <= 0.0 {
                v.push(Violation {
                    constraint: "on-chiller zero condenser flow".to_string(),
                    details: format!("chiller {} is on with mdot_cd = {}", i + 1, cmd.mdot_cd),
                });
            }
            let nom = params.mdot_chw_nom;
            if (cmd.mdot_chw - nom).abs() > 1e-6 * nom.max(1.0) {
                v.push(Violation {
                    constraint: "primary flow consistency".to_string(),
                    details: format!(
                        "chiller {} commanded {} kg/s; primary pumping runs at nominal {} kg/s",
                        i + 1,
                        cmd.mdot_chw,
                        nom
                    ),
                });
            }
        } else if cmd.mdot_chw != 0.0 || cmd.mdot_cd != 0.0 {
            v.push(Violation {
                constraint: "off-chiller flow".to_string(),
                details: format!(
                    "chiller {} is off but commands flows (chw {}, cd {})",
                    i + 1,
                    cmd.mdot_chw,
                    cmd.mdot_cd
                ),
            });
        }
    }

    // Tower commands: nonnegative flows on running towers.
    for (j, cmd) in u.cw.towers.iter().enumerate() {
        if cmd.on {
            if cmd.mdot_cw < 0.0 || cmd.mdot_oa < 0.0 {
                v.push(Violation {
                    constraint: "on-tower negative flow".to_string(),
                    details: format!(
                        "tower {} commands cw {}, oa {}",
                        j + 1,
                        cmd.mdot_cw,
                        cmd.mdot_oa
                    ),
                });
            }
        } else if cmd.mdot_cw != 0.0 || cmd.mdot_oa != 0.0 {
            v.push(Violation {
                constraint: "off-tower flow".to_string(),
                details: format!(
                    "tower {} is off but commands flows (cw {}, oa {})",
                    j + 1,
                    cmd.mdot_cw,
                    cmd.mdot_oa
                ),
            });
        }
    }

    // Cooling water mass balance between condensers and towers.
    let mdot_cd_total: f64 = u
        .chw
        .chillers
        .iter()
        .filter(|c| c.on)
        .map(|c| c.mdot_cd)
        .sum();
    let mdot_cw_total = u.cw.total_flow();
    if let Err(e) = loops::cw_mass_check(mdot_cd_total, mdot_cw_total) {
        v.push(Violation {
            constraint: "cooling water mass balance".to_string(),
            details: e.to_string(),
        });
    }

    v
}

/// Supply water temperature at the chiller outlet header: flow-weighted
/// chiller supply when any chiller runs, cold sub-tank water otherwise
/// (storage-only service).
fn chw_supply_temp(p: &PlantParams, x: &PlantState, u: &PlantInput, any_on: bool) -> f64 {
    if !any_on {
        return x.tes.t_twc;
    }
    let temps: Vec<f64> = x.chillers.iter().map(|c| c.t_chws).collect();
    let flows: Vec<f64> = p.chillers.iter().map(|c| c.mdot_chw_nom).collect();
    let on: Vec<bool> = u.chw.chillers.iter().map(|c| c.on).collect();
    loops::weighted_avg_temp(&temps, &flows, &on, x.tes.t_twc)
}

/// Propagates the full plant one sampling period, returning the next state
/// and the loop outputs.
///
/// Evaluation order: loop algebra from current states, then coil, storage,
/// chillers, and towers, all fed with current-step coupling values.
pub fn plant_step(
    p: &PlantParams,
    x: &PlantState,
    u: &PlantInput,
    w: &PlantDisturbance,
) -> Result<(PlantState, PlantOutput), StepError> {
    let violations = check_inputs(p, x, u);
    if !violations.is_empty() {
        return Err(StepError::Infeasible(violations));
    }

    let c = &p.constants;
    let any_ch_on = u.chw.any_chiller_on();
    let on_ch: Vec<bool> = u.chw.chillers.iter().map(|cmd| cmd.on).collect();
    let on_ct: Vec<bool> = u.cw.towers.iter().map(|cmd| cmd.on).collect();

    // Chilled water loop algebra at current-step values.
    let nominal: Vec<f64> = p.chillers.iter().map(|ch| ch.mdot_chw_nom).collect();
    let flows = loops::chw_flow_balance(&u.chw, &nominal)?;
    let t_sw = chw_supply_temp(p, x, u, any_ch_on);
    let t_lws = loops::mix_t_lws(t_sw, x.tes.t_twc, u.chw.mdot_tw, u.chw.mdot_lw, any_ch_on);
    let t_rw = loops::mix_t_rw(
        x.coil.t_lwr,
        x.tes.t_tww,
        u.chw.mdot_tw,
        flows.mdot_sw,
        any_ch_on,
    );
    let chiller_temps: Vec<f64> = x.chillers.iter().map(|ch| ch.t_chws).collect();
    let t_chws_bar = loops::weighted_avg_temp(&chiller_temps, &nominal, &on_ch, t_rw);
    let t_chwr_bar = loops::mix_t_chwr(t_rw, t_chws_bar, flows.mdot_bp, flows.mdot_chw, any_ch_on);

    // Cooling water loop averages at current-step values.
    let cd_flows: Vec<f64> = u.chw.chillers.iter().map(|cmd| cmd.mdot_cd).collect();
    let cdwr_temps: Vec<f64> = x.chillers.iter().map(|ch| ch.t_cdwr).collect();
    let t_cwr_bar = loops::weighted_avg_temp(&cdwr_temps, &cd_flows, &on_ch, p.t_cwr_nom);
    let cw_flows: Vec<f64> = u.cw.towers.iter().map(|cmd| cmd.mdot_cw).collect();
    let cws_temps: Vec<f64> = x.towers.iter().map(|t| t.t_cws).collect();
    let t_cws_bar = loops::weighted_avg_temp(&cws_temps, &cw_flows, &on_ct, t_cwr_bar);

    // Coil.
    let coil_result = coil::coil_step(
        c,
        &p.coil,
        &x.coil,
        &CoilInput {
            t_lws,
            mdot_lw: u.chw.mdot_lw,
        },
        &CoilDisturbance {
            qdot_load: w.qdot_load,
        },
    )?;

    // Storage.
    let tes_next = tes::tes_step(
        &p.tes,
        &x.tes,
        &TesInput {
            t_sw,
            t_lwr: x.coil.t_lwr,
            mdot_tw: u.chw.mdot_tw,
        },
        c.t_s,
    )?;

    // Chillers: running units see the plantwide return and cooling water
    // supply; stopped units hold their state with no flow through them.
    let mut chillers_next = Vec::with_capacity(x.chillers.len());
    let mut qdot_evap = 0.0;
    let mut qdot_cond = 0.0;
    let mut p_ch = 0.0;
    let mut p_chwp = 0.0;
    for ((state, params), cmd) in x.chillers.iter().zip(&p.chillers).zip(&u.chw.chillers) {
        if !cmd.on {
            chillers_next.push(*state);
            continue;
        }
        let result = chiller::chiller_step(
            c,
            params,
            state,
            &ChillerInput {
                t_chwr: t_chwr_bar,
                mdot_chw: params.mdot_chw_nom,
                t_cdws: t_cws_bar,
                mdot_cd: cmd.mdot_cd,
                t_chws_set: u.chw.t_chws_set,
            },
            &p.solver,
        )?;
        qdot_evap += result.qdot_evap;
        qdot_cond += result.qdot_cond;
        p_ch += result.p_ch;
        p_chwp += result.p_chwp;
        chillers_next.push(result.next);
    }

    // Towers: running units see the plantwide cooling water return.
    let mut towers_next = Vec::with_capacity(x.towers.len());
    let mut qdot_ct = 0.0;
    let mut p_ct = 0.0;
    let mut p_cwp = 0.0;
    for ((state, params), cmd) in x.towers.iter().zip(&p.towers).zip(&u.cw.towers) {
        if !cmd.on {
            towers_next.push(*state);
            continue;
        }
        let result = tower::tower_step(
            c,
            params,
            state,
            &TowerInput {
                t_cwr: t_cwr_bar,
                mdot_cw: cmd.mdot_cw,
                mdot_oa: cmd.mdot_oa,
            },
            &TowerDisturbance { t_oawb: w.t_oawb },
            &p.solver,
        )?;
        qdot_ct += result.qdot_ct;
        p_ct += result.p_ct;
        p_cwp += result.p_cwp;
        towers_next.push(result.next);
    }

    let mdot_cd_total: f64 = u
        .chw
        .chillers
        .iter()
        .filter(|cmd| cmd.on)
        .map(|cmd| cmd.mdot_cd)
        .sum();

    let next = PlantState {
        coil: coil_result.next,
        tes: tes_next,
        chillers: chillers_next,
        towers: towers_next,
    };
    let output = PlantOutput {
        chw: ChwLoopOutputs {
            t_sw,
            t_rw,
            t_chwr_bar,
            t_chws_bar,
            mdot_sw: flows.mdot_sw,
            mdot_bp: flows.mdot_bp,
            mdot_chw: flows.mdot_chw,
            mdot_cd: mdot_cd_total,
            qdot_cc: coil_result.qdot_cc,
            qdot_evap,
            qdot_cond,
            p_ch,
            p_chwp,
        },
        cw: CwLoopOutputs {
            mdot_cw: u.cw.total_flow(),
            t_cws_bar,
            t_cwr_bar,
            qdot_ct,
            p_ct,
            p_cwp,
        },
        p_tot: p_ch + p_ct + p_chwp + p_cwp,
    };
    Ok((next, output))
}

/// Plantwide coefficient of performance over a trace: total cooling
/// delivered per total electric energy. Returns zero for a trace with no
/// electric consumption.
pub fn plantwide_cop<'a, I>(outputs: I) -> f64
where
    I: IntoIterator<Item = &'a PlantOutput>,
{
    let mut cooling = 0.0;
    let mut power = 0.0;
    for y in outputs {
        cooling += y.chw.qdot_cc;
        power += y.p_tot;
    }
    if power > 0.0 {
        cooling / power
    } else {
        0.0
    }
}
