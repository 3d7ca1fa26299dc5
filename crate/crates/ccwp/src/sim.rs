//! Batch simulation driver: closed-loop runs, the condenser saturation
//! demonstration, and plot-ready output emission.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::chiller::{chiller_step, ChillerInput, ChillerMode, ChillerParams, ChillerState};
use crate::controller::{Controller, Observation};
use crate::core::SimConstants;
use crate::error::ModelError;
use crate::io::series::ExogenousSeries;
use crate::io::trace::TraceWriter;
use crate::io::IoError;
use crate::optim::SolverSettings;
use crate::plant::{
    plant_step, plantwide_cop, PlantDisturbance, PlantInput, PlantOutput, PlantParams, PlantState,
    StepError, Violation, T_WATER_SAFE_UB,
};

/// Errors that halt a simulation run.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("infeasible input at step {step}:{}", violations.iter().map(|v| format!("\n  - {v}")).collect::<String>())]
    Infeasible {
        step: usize,
        violations: Vec<Violation>,
    },
    #[error("solver failure at step {step}: {source}")]
    Solver { step: usize, source: ModelError },
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Everything recorded about one step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub time_s: f64,
    /// State at the start of the step.
    pub state: PlantState,
    pub input: PlantInput,
    pub qdot_load: f64,
    pub t_oawb: f64,
    pub price: f64,
    pub output: PlantOutput,
}

/// Aggregate figures for a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub plantwide_cop: f64,
    pub cooling_delivered_kwh: f64,
    pub electric_energy_kwh: f64,
    pub unmet_load_kwh: f64,
    /// Steps where delivered cooling fell short of the demand.
    pub unmet_steps: usize,
    pub max_water_temp_c: f64,
    pub min_water_temp_c: f64,
    /// Steps where any water temperature left the monitored safe band
    /// (0 degC to the piping bound).
    pub safety_violation_steps: usize,
    /// Steps where the cold sub-tank ran warmer than the warm sub-tank.
    /// Adversarial inputs can cause this transiently; it is monitored,
    /// not an error.
    pub tes_inversion_steps: usize,
}

impl RunSummary {
    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut out = std::fs::File::create(path).map_err(|e| IoError::read(path, e))?;
        let body = format!(
            "steps = {}\nplantwide_cop = {}\ncooling_delivered_kwh = {}\n\
             electric_energy_kwh = {}\nunmet_load_kwh = {}\nunmet_steps = {}\n\
             max_water_temp_c = {}\nmin_water_temp_c = {}\nsafety_violation_steps = {}\n\
             tes_inversion_steps = {}\n",
            self.steps,
            self.plantwide_cop,
            self.cooling_delivered_kwh,
            self.electric_energy_kwh,
            self.unmet_load_kwh,
            self.unmet_steps,
            self.max_water_temp_c,
            self.min_water_temp_c,
            self.safety_violation_steps,
            self.tes_inversion_steps
        );
        out.write_all(body.as_bytes())
            .map_err(|e| IoError::read(path, e))
    }
}

/// Result of a completed closed-loop run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
    pub final_state: PlantState,
}

/// Steps the plant over the whole exogenous series, asking `controller`
/// for the input at every step. Halts with step context if the controller
/// produces an infeasible input or a solver fails.
pub fn run_closed_loop(
    params: &PlantParams,
    initial: &PlantState,
    series: &ExogenousSeries,
    controller: &mut dyn Controller,
) -> Result<RunResult, SimError> {
    assert!(!series.is_empty(), "series must have at least one row");
    let t_s = params.constants.t_s;
    let hours_per_step = t_s / 3600.0;

    let mut state = initial.clone();
    let mut last_output: Option<PlantOutput> = None;
    let mut records = Vec::with_capacity(series.len());

    let mut cooling_kwh = 0.0;
    let mut electric_kwh = 0.0;
    let mut unmet_kwh = 0.0;
    let mut unmet_steps = 0;
    let mut max_water_temp = f64::NEG_INFINITY;
    let mut min_water_temp = f64::INFINITY;
    let mut safety_violation_steps = 0;
    let mut tes_inversion_steps = 0;

    for step in 0..series.len() {
        let obs = Observation {
            step,
            state: &state,
            last_output: last_output.as_ref(),
            qdot_load: series.qdot_load[step],
            t_oawb: series.t_oawb[step],
            price: series.price[step],
        };
        let input = controller.next_input(params, &obs);
        let disturbance = PlantDisturbance {
            qdot_load: series.qdot_load[step],
            t_oawb: series.t_oawb[step],
        };
        let (next, output) =
            plant_step(params, &state, &input, &disturbance).map_err(|e| match e {
                StepError::Infeasible(violations) => SimError::Infeasible { step, violations },
                StepError::Model(source) => SimError::Solver { step, source },
            })?;

        cooling_kwh += output.chw.qdot_cc * hours_per_step;
        electric_kwh += output.p_tot * hours_per_step;
        let shortfall = (series.qdot_load[step] - output.chw.qdot_cc).max(0.0);
        if shortfall > 1e-9 * series.qdot_load[step].max(1.0) {
            unmet_steps += 1;
            unmet_kwh += shortfall * hours_per_step;
        }
        let peak = state.max_water_temp();
        let floor = state.min_water_temp();
        max_water_temp = max_water_temp.max(peak);
        min_water_temp = min_water_temp.min(floor);
        if peak > T_WATER_SAFE_UB || floor < 0.0 {
            safety_violation_steps += 1;
        }
        if state.tes.t_twc > state.tes.t_tww {
            tes_inversion_steps += 1;
        }

        records.push(StepRecord {
            step,
            time_s: series.time_s[step],
            state: state.clone(),
            input,
            qdot_load: series.qdot_load[step],
            t_oawb: series.t_oawb[step],
            price: series.price[step],
            output,
        });
        state = next;
        last_output = Some(output);
    }

    let cop = plantwide_cop(records.iter().map(|r| &r.output));
    Ok(RunResult {
        summary: RunSummary {
            steps: records.len(),
            plantwide_cop: cop,
            cooling_delivered_kwh: cooling_kwh,
            electric_energy_kwh: electric_kwh,
            unmet_load_kwh: unmet_kwh,
            unmet_steps,
            max_water_temp_c: max_water_temp.max(state.max_water_temp()),
            min_water_temp_c: min_water_temp.min(state.min_water_temp()),
            safety_violation_steps,
            tes_inversion_steps,
        },
        records,
        final_state: state,
    })
}

/// Writes the full trace CSV for a run.
pub fn write_run_trace(
    path: &Path,
    params: &PlantParams,
    result: &RunResult,
) -> Result<(), IoError> {
    let mut writer = TraceWriter::create(path, params.n_chillers(), params.n_towers())?;
    for r in &result.records {
        writer.write_step(
            r.step,
            r.time_s,
            &r.state,
            &r.input,
            r.qdot_load,
            r.t_oawb,
            r.price,
            &r.output,
        )?;
    }
    writer.finish()
}

/// One steady-state point of the condenser saturation demonstration.
#[derive(Debug, Clone, Copy)]
pub struct DemoRow {
    /// Condenser flow as a fraction of nominal.
    pub flow_fraction: f64,
    pub mode: ChillerMode,
    /// Steady-state condenser return temperature, °C.
    pub t_cdwr_ss: f64,
    /// Steady-state chilled water supply temperature, °C.
    pub t_chws_ss: f64,
    pub steps_to_converge: usize,
}

/// Iterates a single chiller to steady state at fixed evaporator-side
/// conditions for each condenser flow fraction, in both the saturated and
/// legacy modes. Reproduces the starved-condenser comparison: the
/// saturated model pins the return temperature at its bound where the
/// legacy model lets it run away.
pub fn run_saturation_demo(
    constants: &SimConstants,
    chiller: &ChillerParams,
    flow_fractions: &[f64],
    solver: &SolverSettings,
) -> Result<Vec<DemoRow>, ModelError> {
    let mut rows = Vec::new();
    for &fraction in flow_fractions {
        if !(fraction > 0.0) {
            return Err(ModelError::invalid_param(format!(
                "flow fraction must be positive, got {fraction}"
            )));
        }
        for mode in [ChillerMode::Saturated, ChillerMode::LegacyUnsaturated] {
            let mut params = chiller.clone();
            params.mode = mode;
            let input = ChillerInput {
                t_chwr: 12.0,
                mdot_chw: params.mdot_chw_nom,
                t_cdws: 29.44,
                mdot_cd: fraction * params.mdot_cd_nom,
                t_chws_set: 7.0,
            };
            let mut state = ChillerState {
                t_chws: 7.0,
                t_cdwr: 35.0,
            };
            let mut steps = 0;
            for k in 0..200_000 {
                let r = chiller_step(constants, &params, &state, &input, solver)?;
                steps = k + 1;
                let drift = (r.next.t_chws - state.t_chws)
                    .abs()
                    .max((r.next.t_cdwr - state.t_cdwr).abs());
                state = r.next;
                if drift < 1e-9 {
                    break;
                }
            }
            rows.push(DemoRow {
                flow_fraction: fraction,
                mode,
                t_cdwr_ss: state.t_cdwr,
                t_chws_ss: state.t_chws,
                steps_to_converge: steps,
            });
        }
    }
    Ok(rows)
}

/// Which plot-ready dataset to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Exogenous inputs and cooling delivered.
    Exogenous,
    /// Coil flow/outlet temperature against their bounds.
    CoilSaturation,
    /// Plantwide water temperatures.
    Temperatures,
}

impl PlotKind {
    pub fn file_name(self) -> &'static str {
        match self {
            PlotKind::Exogenous => "plot_exogenous.csv",
            PlotKind::CoilSaturation => "plot_coil_saturation.csv",
            PlotKind::Temperatures => "plot_temperatures.csv",
        }
    }
}

/// Emits a tidy long-format CSV (`time_s,series,value`) for downstream
/// plotting tools; no plotting dependency here.
pub fn emit_plot_data(
    out_dir: &Path,
    params: &PlantParams,
    result: &RunResult,
    kind: PlotKind,
) -> Result<std::path::PathBuf, IoError> {
    let path = out_dir.join(kind.file_name());
    let write_all = || -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(out, "time_s,series,value")?;
        for r in &result.records {
            match kind {
                PlotKind::Exogenous => {
                    writeln!(out, "{},T_oawb,{}", r.time_s, r.t_oawb)?;
                    writeln!(out, "{},price,{}", r.time_s, r.price)?;
                    writeln!(out, "{},qdot_L,{}", r.time_s, r.qdot_load)?;
                    writeln!(out, "{},qdot_cc,{}", r.time_s, r.output.chw.qdot_cc)?;
                }
                PlotKind::CoilSaturation => {
                    writeln!(out, "{},mdot_lw,{}", r.time_s, r.input.chw.mdot_lw)?;
                    writeln!(out, "{},mdot_lw_ub,{}", r.time_s, params.coil.mdot_lw_ub)?;
                    writeln!(out, "{},T_lwr,{}", r.time_s, r.state.coil.t_lwr)?;
                    writeln!(out, "{},T_lwr_ub,{}", r.time_s, params.coil.t_lwr_ub)?;
                }
                PlotKind::Temperatures => {
                    writeln!(out, "{},T_chws_bar,{}", r.time_s, r.output.chw.t_chws_bar)?;
                    writeln!(out, "{},T_chwr_bar,{}", r.time_s, r.output.chw.t_chwr_bar)?;
                    writeln!(out, "{},T_cws_bar,{}", r.time_s, r.output.cw.t_cws_bar)?;
                    writeln!(out, "{},T_cwr_bar,{}", r.time_s, r.output.cw.t_cwr_bar)?;
                    writeln!(out, "{},T_twc,{}", r.time_s, r.state.tes.t_twc)?;
                    writeln!(out, "{},T_tww,{}", r.time_s, r.state.tes.t_tww)?;
                }
            }
        }
        out.flush()
    };
    write_all().map_err(|e| IoError::read(&path, e))?;
    Ok(path)
}
