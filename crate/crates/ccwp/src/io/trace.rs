//! Simulation trace output and re-ingestion.
//!
//! One CSV row per step with columns grouped state, input, disturbance,
//! output. Floats are written in Rust's shortest round-trip decimal form,
//! so re-parsing reproduces every value bit-exactly.

use std::io::Write;
use std::path::Path;

use super::IoError;
use crate::plant::{PlantInput, PlantOutput, PlantState};

/// Stable column order for a plant with `n_ch` chillers and `n_ct` towers.
pub fn trace_columns(n_ch: usize, n_ct: usize) -> Vec<String> {
    let mut cols: Vec<String> = vec!["step".into(), "time_s".into()];
    // State.
    cols.push("T_lwr".into());
    cols.extend([
        "T_twc".into(),
        "S_twc".into(),
        "T_tww".into(),
        "S_tww".into(),
    ]);
    for i in 1..=n_ch {
        cols.push(format!("T_chws_{i}"));
        cols.push(format!("T_cdwr_{i}"));
    }
    for j in 1..=n_ct {
        cols.push(format!("T_cws_{j}"));
    }
    // Input.
    cols.extend(["mdot_lw".into(), "mdot_tw".into(), "T_chws_set".into()]);
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
    // Disturbance.
    cols.extend(["qdot_L".into(), "T_oawb".into(), "price".into()]);
    // Output.
    cols.extend(
        [
            "T_sw",
            "T_rw",
            "T_chwr_bar",
            "T_chws_bar",
            "mdot_sw",
            "mdot_bp",
            "mdot_chw",
            "mdot_cd",
            "qdot_cc",
            "qdot_evap",
            "qdot_cond",
            "P_ch",
            "P_chwp",
            "mdot_cw",
            "T_cws_bar",
            "T_cwr_bar",
            "qdot_ct",
            "P_ct",
            "P_cwp",
            "P_tot",
        ]
        .map(String::from),
    );
    cols
}

/// Streaming trace writer.
pub struct TraceWriter {
    out: std::io::BufWriter<std::fs::File>,
    path: std::path::PathBuf,
    n_ch: usize,
    n_ct: usize,
}

impl TraceWriter {
    pub fn create(path: &Path, n_ch: usize, n_ct: usize) -> Result<Self, IoError> {
        let file = std::fs::File::create(path).map_err(|e| IoError::read(path, e))?;
        let mut w = TraceWriter {
            out: std::io::BufWriter::new(file),
            path: path.to_path_buf(),
            n_ch,
            n_ct,
        };
        w.write_line(
            "# simulation trace; columns grouped state | input | disturbance | output; \
             temperatures degC, flows kg/s, heat rates and power kW",
        )?;
        let header = trace_columns(n_ch, n_ct).join(",");
        w.write_line(&header)?;
        Ok(w)
    }

    fn write_line(&mut self, line: &str) -> Result<(), IoError> {
        writeln!(self.out, "{line}").map_err(|e| IoError::read(&self.path, e))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn write_step(
        &mut self,
        step: usize,
        time_s: f64,
        x: &PlantState,
        u: &PlantInput,
        qdot_load: f64,
        t_oawb: f64,
        price: f64,
        y: &PlantOutput,
    ) -> Result<(), IoError> {
        assert_eq!(x.chillers.len(), self.n_ch);
        assert_eq!(x.towers.len(), self.n_ct);
        let mut fields: Vec<String> =
            Vec::with_capacity(2 + 5 + 3 * self.n_ch + 4 * self.n_ct + 23);
        fields.push(step.to_string());
        fields.push(fmt(time_s));
        // State.
        fields.push(fmt(x.coil.t_lwr));
        fields.push(fmt(x.tes.t_twc));
        fields.push(fmt(x.tes.s_twc));
        fields.push(fmt(x.tes.t_tww));
        fields.push(fmt(x.tes.s_tww));
        for ch in &x.chillers {
            fields.push(fmt(ch.t_chws));
            fields.push(fmt(ch.t_cdwr));
        }
        for t in &x.towers {
            fields.push(fmt(t.t_cws));
        }
        // Input.
        fields.push(fmt(u.chw.mdot_lw));
        fields.push(fmt(u.chw.mdot_tw));
        fields.push(fmt(u.chw.t_chws_set));
        for cmd in &u.chw.chillers {
            fields.push(if cmd.on { "1".into() } else { "0".into() });
            fields.push(fmt(cmd.mdot_chw));
            fields.push(fmt(cmd.mdot_cd));
        }
        for cmd in &u.cw.towers {
            fields.push(if cmd.on { "1".into() } else { "0".into() });
            fields.push(fmt(cmd.mdot_cw));
            fields.push(fmt(cmd.mdot_oa));
        }
        // Disturbance.
        fields.push(fmt(qdot_load));
        fields.push(fmt(t_oawb));
        fields.push(fmt(price));
        // Output.
        let c = &y.chw;
        let w = &y.cw;
        for v in [
            c.t_sw,
            c.t_rw,
            c.t_chwr_bar,
            c.t_chws_bar,
            c.mdot_sw,
            c.mdot_bp,
            c.mdot_chw,
            c.mdot_cd,
            c.qdot_cc,
            c.qdot_evap,
            c.qdot_cond,
            c.p_ch,
            c.p_chwp,
            w.mdot_cw,
            w.t_cws_bar,
            w.t_cwr_bar,
            w.qdot_ct,
            w.p_ct,
            w.p_cwp,
            y.p_tot,
        ] {
            fields.push(fmt(v));
        }
        let line = fields.join(",");
        self.write_line(&line)
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.out.flush().map_err(|e| IoError::read(&self.path, e))
    }
}

/// Shortest decimal representation that round-trips the f64 exactly.
fn fmt(v: f64) -> String {
    format!("{v}")
}

/// A fully loaded trace, addressable by column name.
#[derive(Debug, Clone)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Extracts one column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Reads a trace CSV written by [`TraceWriter`].
pub fn read_trace(path: &Path) -> Result<Trace, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::read(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| IoError::parse(path, "missing header"))?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(columns.len());
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| IoError::parse(path, format!("line {}: {e}", lineno + 3)))?;
            row.push(v);
        }
        if row.len() != columns.len() {
            return Err(IoError::parse(
                path,
                format!(
                    "line {}: {} fields for {} columns",
                    lineno + 3,
                    row.len(),
                    columns.len()
                ),
            ));
        }
        rows.push(row);
    }
    Ok(Trace { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chiller::ChillerState;
    use crate::coil::CoilState;
    use crate::loops::{
        ChillerCommand, ChwLoopInput, ChwLoopOutputs, CwLoopInput, CwLoopOutputs, TowerCommand,
    };
    use crate::tes::TesState;
    use crate::tower::TowerState;

    fn sample_state() -> PlantState {
        PlantState {
            coil: CoilState {
                t_lwr: 12.34567890123,
            },
            tes: TesState::new(6.0 + 1.0 / 3.0, 0.5, 13.0, 0.5).unwrap(),
            chillers: vec![ChillerState {
                t_chws: 7.000000001,
                t_cdwr: 34.9999999,
            }],
            towers: vec![TowerState { t_cws: 29.44 }],
        }
    }

    fn sample_input() -> PlantInput {
        PlantInput {
            chw: ChwLoopInput {
                mdot_lw: 20.0,
                mdot_tw: -5.5,
                t_chws_set: 7.0,
                chillers: vec![ChillerCommand {
                    on: true,
                    mdot_chw: 31.86,
                    mdot_cd: 47.44,
                }],
            },
            cw: CwLoopInput {
                towers: vec![TowerCommand {
                    on: true,
                    mdot_cw: 47.44,
                    mdot_oa: 39.53,
                }],
            },
        }
    }

    fn sample_output() -> PlantOutput {
        PlantOutput {
            chw: ChwLoopOutputs {
                t_sw: 7.0,
                t_rw: 12.1,
                t_chwr_bar: 11.0 / 3.0,
                t_chws_bar: 7.0,
                mdot_sw: 14.5,
                mdot_bp: 17.36,
                mdot_chw: 31.86,
                mdot_cd: 47.44,
                qdot_cc: 400.0,
                qdot_evap: 420.0,
                qdot_cond: 490.0,
                p_ch: 70.0,
                p_chwp: 13.0,
            },
            cw: CwLoopOutputs {
                mdot_cw: 47.44,
                t_cws_bar: 29.44,
                t_cwr_bar: 34.2,
                qdot_ct: 480.0,
                p_ct: 15.0,
                p_cwp: 16.0,
            },
            p_tot: 114.0,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let x = sample_state();
        let u = sample_input();
        let y = sample_output();
        let mut w = TraceWriter::create(&path, 1, 1).unwrap();
        let awkward_load = 400.0 + 1.0 / 7.0;
        w.write_step(0, 0.0, &x, &u, awkward_load, 25.5, 0.0812345, &y)
            .unwrap();
        w.write_step(1, 60.0, &x, &u, 401.0, 25.6, 0.0812345, &y)
            .unwrap();
        w.finish().unwrap();

        let trace = read_trace(&path).unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.columns, trace_columns(1, 1));
        let qdot = trace.column("qdot_L").unwrap();
        assert_eq!(qdot[0].to_bits(), (400.0 + 1.0 / 7.0f64).to_bits());
        let t_lwr = trace.column("T_lwr").unwrap();
        assert_eq!(t_lwr[0].to_bits(), 12.34567890123f64.to_bits());
        let t_twc = trace.column("T_twc").unwrap();
        assert_eq!(t_twc[0].to_bits(), (6.0 + 1.0 / 3.0f64).to_bits());
        let t_chwr = trace.column("T_chwr_bar").unwrap();
        assert_eq!(t_chwr[0].to_bits(), (11.0 / 3.0f64).to_bits());
    }

    #[test]
    fn column_order_is_documented_and_stable() {
        let cols = trace_columns(2, 2);
        assert_eq!(cols[0], "step");
        assert_eq!(cols[1], "time_s");
        assert_eq!(cols[2], "T_lwr");
        // 2 + 5 + 2*2 + 2 = 13 state columns before inputs
        assert_eq!(cols[13], "mdot_lw");
        assert!(cols.contains(&"T_chws_2".to_string()));
        assert!(cols.contains(&"on_ct_2".to_string()));
        assert_eq!(cols.last().unwrap(), "P_tot");
    }
}
