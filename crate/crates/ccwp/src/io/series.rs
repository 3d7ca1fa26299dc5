//! Exogenous time-series ingestion and synthetic generation.
//!
//! The CSV format carries one row per step with the header
//! `time_s,T_oawb_C,price_per_kWh,qdot_L_kW`. Timestamps are integer-like
//! seconds since series start on a uniform grid.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IoError;

pub const SERIES_HEADER: &str = "time_s,T_oawb_C,price_per_kWh,qdot_L_kW";

/// Uniformly sampled exogenous inputs: wet bulb, electricity price, and
/// cooling load.
#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousSeries {
    /// Sample spacing, seconds.
    pub t_s: f64,
    pub time_s: Vec<f64>,
    pub t_oawb: Vec<f64>,
    pub price: Vec<f64>,
    pub qdot_load: Vec<f64>,
}

impl ExogenousSeries {
    pub fn len(&self) -> usize {
        self.time_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time_s.is_empty()
    }

    fn validate(self, origin: &Path) -> Result<Self, IoError> {
        let mut failures = Vec::new();
        if self.time_s.len() < 2 {
            failures.push("series needs at least two rows".to_string());
        } else {
            let dt = self.time_s[1] - self.time_s[0];
            if !(dt > 0.0) {
                failures.push(format!("non-increasing timestamps (dt = {dt})"));
            }
            for k in 1..self.time_s.len() {
                let step = self.time_s[k] - self.time_s[k - 1];
                if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                    failures.push(format!(
                        "non-uniform spacing at row {k}: step {step} s vs {dt} s"
                    ));
                    break;
                }
            }
        }
        for (k, q) in self.qdot_load.iter().enumerate() {
            if !(*q >= 0.0) {
                failures.push(format!("negative cooling load {q} at row {k}"));
                break;
            }
        }
        if failures.is_empty() {
            Ok(self)
        } else {
            Err(IoError::Validation {
                path: origin.display().to_string(),
                failures,
            })
        }
    }
}

/// Loads and validates an exogenous series CSV.
pub fn load_series(path: &Path) -> Result<ExogenousSeries, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::read(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::parse(path, "empty file"))?;
    if header.trim() != SERIES_HEADER {
        return Err(IoError::parse(
            path,
            format!("expected header '{SERIES_HEADER}', got '{}'", header.trim()),
        ));
    }
    let mut series = ExogenousSeries {
        t_s: 0.0,
        time_s: Vec::new(),
        t_oawb: Vec::new(),
        price: Vec::new(),
        qdot_load: Vec::new(),
    };
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return Err(IoError::parse(
                path,
                format!(
                    "line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                ),
            ));
        }
        let parse = |s: &str| -> Result<f64, IoError> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| IoError::parse(path, format!("line {}: {e}", lineno + 1)))
        };
        series.time_s.push(parse(fields[0])?);
        series.t_oawb.push(parse(fields[1])?);
        series.price.push(parse(fields[2])?);
        series.qdot_load.push(parse(fields[3])?);
    }
    let mut series = series.validate(path)?;
    series.t_s = series.time_s[1] - series.time_s[0];
    Ok(series)
}

/// Writes a series in the standard CSV format.
pub fn write_series(path: &Path, series: &ExogenousSeries) -> Result<(), IoError> {
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| IoError::read(path, e))?);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{SERIES_HEADER}")?;
        for k in 0..series.len() {
            writeln!(
                out,
                "{},{},{},{}",
                series.time_s[k], series.t_oawb[k], series.price[k], series.qdot_load[k]
            )?;
        }
        out.flush()
    };
    write().map_err(|e| IoError::read(path, e))
}

/// Generates a synthetic multi-day series: sinusoidal daily wet bulb
/// (mean 24 degC, amplitude 4 degC, warmest mid-afternoon), a two-tier
/// electricity price, and a daily load shape with seeded noise scaled so
/// its maximum equals `peak_fraction · capacity_kw`. Deterministic for a
/// given seed.
pub fn synth_series(
    days: u32,
    t_s: f64,
    peak_fraction: f64,
    capacity_kw: f64,
    seed: u64,
) -> ExogenousSeries {
    assert!(days >= 1, "need at least one day");
    assert!(t_s > 0.0, "sampling period must be positive");
    let n = ((days as f64) * 86_400.0 / t_s).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut time_s = Vec::with_capacity(n);
    let mut t_oawb = Vec::with_capacity(n);
    let mut price = Vec::with_capacity(n);
    let mut raw_load = Vec::with_capacity(n);
    const TAU: f64 = std::f64::consts::TAU;

    for k in 0..n {
        let t = k as f64 * t_s;
        let tod = t % 86_400.0;
        time_s.push(t);
        // Wet bulb peaks near 15:00.
        t_oawb.push(24.0 + 4.0 * (TAU * (tod / 86_400.0 - 0.375)).sin());
        // On-peak price noon to 20:00.
        let hour = tod / 3600.0;
        price.push(if (12.0..20.0).contains(&hour) {
            0.20
        } else {
            0.08
        });
        // Afternoon-peaking load with a nonzero overnight base and a
        // little high-frequency noise.
        let diurnal = (TAU * (tod / 86_400.0 - 0.25)).sin().max(0.0).powf(1.3);
        raw_load.push(0.35 + 0.65 * diurnal + rng.gen_range(0.0..0.04));
    }

    let raw_max = raw_load.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if raw_max > 0.0 {
        peak_fraction * capacity_kw / raw_max
    } else {
        0.0
    };
    let qdot_load = raw_load.iter().map(|r| (r * scale).max(0.0)).collect();

    ExogenousSeries {
        t_s,
        time_s,
        t_oawb,
        price,
        qdot_load,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn synth_three_days_at_60s_has_4320_rows() {
        let s = synth_series(3, 60.0, 1.3, 2923.0, 7);
        assert_eq!(s.len(), 4320);
    }

    #[test]
    fn synth_one_day_hourly_has_24_rows() {
        let s = synth_series(1, 3600.0, 1.0, 1000.0, 7);
        assert_eq!(s.len(), 24);
    }

    #[test]
    fn synth_peak_scaling() {
        let s = synth_series(3, 60.0, 1.3, 2923.0, 7);
        let max = s
            .qdot_load
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(max, 1.3 * 2923.0, max_relative = 1e-12);
        assert_relative_eq!(max, 3799.9, epsilon = 0.01);
    }

    #[test]
    fn synth_zero_fraction_means_zero_load() {
        let s = synth_series(1, 3600.0, 0.0, 2923.0, 7);
        assert!(s.qdot_load.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let a = synth_series(2, 300.0, 1.1, 2000.0, 42);
        let b = synth_series(2, 300.0, 1.1, 2000.0, 42);
        assert_eq!(a, b);
        let c = synth_series(2, 300.0, 1.1, 2000.0, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let s = synth_series(1, 600.0, 1.2, 1500.0, 3);
        write_series(&path, &s).unwrap();
        let loaded = load_series(&path).unwrap();
        assert_eq!(loaded.len(), s.len());
        for k in 0..s.len() {
            assert_eq!(loaded.qdot_load[k].to_bits(), s.qdot_load[k].to_bits());
            assert_eq!(loaded.t_oawb[k].to_bits(), s.t_oawb[k].to_bits());
        }
        assert_relative_eq!(loaded.t_s, 600.0);
    }

    #[test]
    fn negative_load_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            format!("{SERIES_HEADER}\n0,24,0.1,100\n60,24,0.1,-5\n120,24,0.1,100\n"),
        )
        .unwrap();
        let err = load_series(&path).unwrap_err();
        assert!(err.to_string().contains("negative cooling load"), "{err}");
    }

    #[test]
    fn jagged_timestamps_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            format!("{SERIES_HEADER}\n0,24,0.1,100\n60,24,0.1,100\n180,24,0.1,100\n"),
        )
        .unwrap();
        let err = load_series(&path).unwrap_err();
        assert!(err.to_string().contains("non-uniform"), "{err}");
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,load\n0,100\n").unwrap();
        assert!(load_series(&path).is_err());
    }
}
