//! Batch simulation runner for the central chilled water plant model.
//!
//! Exit codes: 0 success, 2 config/validation error, 3 infeasible-input
//! halt, 4 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ccwp::chiller::ChillerMode;
use ccwp::controller::{
    ConstantController, Controller, ExternalCsvController, RuleBasedController,
};
use ccwp::io::{load_config, load_series, synth_series, write_series, CurveDb};
use ccwp::sim::{
    emit_plot_data, run_closed_loop, run_saturation_demo, write_run_trace, PlotKind, SimError,
};

#[derive(Parser)]
#[command(
    name = "ccwp",
    about = "Central chilled water plant simulator with heat-exchanger saturation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ControllerKind {
    RuleBased,
    Constant,
    ExternalCsv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-loop simulation over an exogenous series.
    Simulate {
        /// Plant configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Exogenous series CSV (time_s,T_oawb_C,price_per_kWh,qdot_L_kW).
        #[arg(long)]
        series: PathBuf,
        /// Output directory for trace, summary, and plot files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "rule-based")]
        controller: ControllerKind,
        /// Input CSV replayed by the external-csv controller.
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Extra curve file merged over the bundled dataset.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Run the same scenario over several series files in worker
        /// threads; outputs land in per-series subdirectories.
        #[arg(long, num_args = 1..)]
        sweep: Vec<PathBuf>,
    },
    /// Steady-state condenser saturation comparison for one chiller, in
    /// saturated and legacy modes, across condenser flow fractions.
    DemoSaturation {
        /// Curve-set name of the chiller to demonstrate.
        #[arg(long, default_value = "carrier_19xr_823kw")]
        chiller: String,
        /// Condenser flow fractions of nominal.
        #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "0.1,0.25,0.5,1.0")]
        fractions: Vec<f64>,
        /// Extra curve file merged over the bundled dataset.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Generate a synthetic exogenous series.
    Synth {
        #[arg(long, default_value_t = 3)]
        days: u32,
        /// Sampling period, seconds.
        #[arg(long, default_value_t = 60.0)]
        t_s: f64,
        /// Peak load as a fraction of the plant's combined chiller
        /// capacity.
        #[arg(long, default_value_t = 1.3)]
        peak_fraction: f64,
        /// Plant config used to read the combined capacity.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Parse and validate a plant configuration.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        curves: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ccwp::io::IoError),
    #[error(transparent)]
    Model(#[from] ccwp::ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Other(_) => 2,
            CliError::Model(_) => 4,
            CliError::Sim(SimError::Infeasible { .. }) => 3,
            CliError::Sim(SimError::Solver { .. }) => 4,
            CliError::Sim(SimError::Io(_)) => 2,
        }
    }
}

fn curve_db(curves: &Option<PathBuf>) -> Result<CurveDb, CliError> {
    Ok(match curves {
        Some(path) => CurveDb::bundled_with(path)?,
        None => CurveDb::bundled(),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            series,
            out,
            controller,
            inputs,
            curves,
            sweep,
        } => {
            let db = curve_db(&curves)?;
            let cfg = load_config(&config)?;
            if sweep.is_empty() {
                simulate_one(&cfg, &db, &series, &out, controller, &inputs)
            } else {
                let mut series_files = vec![series];
                series_files.extend(sweep);
                std::thread::scope(|scope| {
                    let mut handles = Vec::new();
                    for file in &series_files {
                        let cfg = &cfg;
                        let db = &db;
                        let inputs = &inputs;
                        let stem = file
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| "series".to_string());
                        let out_dir = out.join(stem);
                        handles.push((
                            file.clone(),
                            scope.spawn(move || {
                                simulate_one(cfg, db, file, &out_dir, controller, inputs)
                            }),
                        ));
                    }
                    for (file, handle) in handles {
                        handle.join().map_err(|_| {
                            CliError::Other(format!("worker panicked on {file:?}"))
                        })??;
                    }
                    Ok(())
                })
            }
        }
        Command::DemoSaturation {
            chiller,
            fractions,
            curves,
        } => {
            let db = curve_db(&curves)?;
            let curve_set = db.chiller(&chiller)?;
            let constants = ccwp::core::SimConstants::default();
            let params = demo_chiller_params(curve_set, &constants)?;
            let rows = run_saturation_demo(
                &constants,
                &params,
                &fractions,
                &ccwp::optim::SolverSettings::default(),
            )?;
            println!("chiller: {} ({})", chiller, curve_set.display_name);
            println!(
                "{:>10} {:>12} {:>14} {:>14} {:>8}",
                "fraction", "mode", "T_cdwr_ss [C]", "T_chws_ss [C]", "steps"
            );
            for row in rows {
                let mode = match row.mode {
                    ChillerMode::Saturated => "saturated",
                    ChillerMode::LegacyUnsaturated => "legacy",
                };
                println!(
                    "{:>10.3} {:>12} {:>14.6} {:>14.6} {:>8}",
                    row.flow_fraction, mode, row.t_cdwr_ss, row.t_chws_ss, row.steps_to_converge
                );
            }
            Ok(())
        }
        Command::Synth {
            days,
            t_s,
            peak_fraction,
            config,
            out,
            seed,
        } => {
            let db = CurveDb::bundled();
            let cfg = load_config(&config)?;
            let (params, _) = cfg.build(&db)?;
            let series = synth_series(days, t_s, peak_fraction, params.total_capacity(), seed);
            write_series(&out, &series)?;
            println!(
                "wrote {} rows ({} days at {} s) to {}; peak load {:.1} kW",
                series.len(),
                days,
                t_s,
                out.display(),
                series.qdot_load.iter().cloned().fold(0.0, f64::max)
            );
            Ok(())
        }
        Command::ValidateConfig { config, curves } => {
            let db = curve_db(&curves)?;
            let cfg = load_config(&config)?;
            let (params, state) = cfg.build(&db)?;
            println!(
                "config ok: {} chillers ({:.1} kW total), {} towers, t_s = {} s, state dim {}",
                params.n_chillers(),
                params.total_capacity(),
                params.n_towers(),
                params.constants.t_s,
                state.dim()
            );
            Ok(())
        }
    }
}

fn demo_chiller_params(
    curves: &ccwp::io::curves::ChillerCurves,
    constants: &ccwp::core::SimConstants,
) -> Result<ccwp::chiller::ChillerParams, CliError> {
    use ccwp::core::FilterCoeff;
    Ok(ccwp::chiller::ChillerParams {
        qdot_evap_nom: curves.qdot_evap_nom_kw,
        p_ch_nom: curves.qdot_evap_nom_kw / curves.cop_nom,
        cap_ft: curves.alpha,
        eir_ft: curves.beta,
        eir_fplr: curves.gamma_plr,
        plr_lb: curves.plr_lb,
        plr_ub: curves.plr_ub,
        eta_waste_heat: 1.0,
        a_ch: FilterCoeff::from_time_constant(180.0, constants.t_s)?,
        a_cd: FilterCoeff::from_time_constant(180.0, constants.t_s)?,
        t_chws_lb: 4.0,
        t_cdwr_ub: 40.0,
        mdot_chw_nom: curves.mdot_chw_nom,
        mdot_cd_nom: curves.mdot_cd_nom,
        pump_a: [2.0, 0.3, 0.25, 0.6],
        mode: ChillerMode::Saturated,
    })
}

fn simulate_one(
    cfg: &ccwp::io::PlantConfig,
    db: &CurveDb,
    series_path: &std::path::Path,
    out_dir: &std::path::Path,
    controller: ControllerKind,
    inputs: &Option<PathBuf>,
) -> Result<(), CliError> {
    let (params, initial) = cfg.build(db)?;
    let series = load_series(series_path)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Other(format!("{}: {e}", out_dir.display())))?;

    let mut ctrl: Box<dyn Controller> = match controller {
        ControllerKind::RuleBased => Box::new(RuleBasedController::new(cfg.controller.clone())),
        ControllerKind::Constant => Box::new(ConstantController::all_off(&params, 0.01)),
        ControllerKind::ExternalCsv => {
            let path = inputs.as_ref().ok_or_else(|| {
                CliError::Other("--inputs is required with --controller external-csv".into())
            })?;
            Box::new(ExternalCsvController::from_file(
                path,
                params.n_chillers(),
                params.n_towers(),
            )?)
        }
    };

    let result = run_closed_loop(&params, &initial, &series, ctrl.as_mut())?;
    write_run_trace(&out_dir.join("trace.csv"), &params, &result)?;
    result.summary.write(&out_dir.join("summary.txt"))?;
    for kind in [
        PlotKind::Exogenous,
        PlotKind::CoilSaturation,
        PlotKind::Temperatures,
    ] {
        emit_plot_data(out_dir, &params, &result, kind)?;
    }
    println!(
        "{}: {} steps, COP {:.3}, unmet {:.1} kWh over {} steps, max water temp {:.2} C",
        series_path.display(),
        result.summary.steps,
        result.summary.plantwide_cop,
        result.summary.unmet_load_kwh,
        result.summary.unmet_steps,
        result.summary.max_water_temp_c
    );
    Ok(())
}
