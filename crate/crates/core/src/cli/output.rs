//! Table writers (CSV, JSON lines) and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::Config;
use crate::entanglement::Pair;
use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::sweep::{CurveData, Outcome, SweepResult, ThermalRow, LINKED_DELTA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
        }
    }
}

/// 12 significant digits, exponent form, no negative zero.
pub fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn en_column(p: Pair) -> String {
    format!("en_{}", p.name())
}

pub fn grid_header(res: &SweepResult) -> Vec<String> {
    let mut cols: Vec<String> = res.spec.axes.iter().map(|a| a.param.name().to_string()).collect();
    cols.push("stable".into());
    cols.push("max_real_eig".into());
    cols.extend(res.spec.pairs.iter().map(|&p| en_column(p)));
    cols
}

pub fn thermal_header(pairs: &[Pair]) -> Vec<String> {
    let mut cols = vec!["temperature_k".to_string(), LINKED_DELTA.to_string()];
    cols.push("stable".into());
    cols.push("max_real_eig".into());
    cols.extend(pairs.iter().map(|&p| en_column(p)));
    cols
}

/// One logical row as optional cells; `None` renders empty / null.
fn outcome_cells(o: &Outcome, n_pairs: usize) -> Vec<Option<f64>> {
    let mut cells = vec![Some(if o.is_stable() { 1.0 } else { 0.0 }), o.max_real_eig()];
    match o.e_n() {
        Some(e) => cells.extend(e.iter().map(|&v| Some(v))),
        None => cells.extend(std::iter::repeat_n(None, n_pairs)),
    }
    cells
}

fn grid_rows(res: &SweepResult) -> Vec<Vec<Option<f64>>> {
    res.rows
        .iter()
        .map(|r| {
            let mut cells: Vec<Option<f64>> = r.axis_values.iter().map(|&v| Some(v)).collect();
            cells.extend(outcome_cells(&r.outcome, res.spec.pairs.len()));
            cells
        })
        .collect()
}

fn thermal_rows(rows: &[ThermalRow], n_pairs: usize) -> Vec<Vec<Option<f64>>> {
    rows.iter()
        .map(|r| match &r.best {
            Some((delta, o)) => {
                let mut cells = vec![Some(r.temperature), Some(*delta)];
                cells.extend(outcome_cells(o, n_pairs));
                cells
            }
            None => {
                let mut cells = vec![Some(r.temperature), None, Some(0.0), r.least_unstable];
                cells.extend(std::iter::repeat_n(None, n_pairs));
                cells
            }
        })
        .collect()
}

fn render(header: &[String], rows: &[Vec<Option<f64>>], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                let line: Vec<String> = row.iter().map(|c| c.map(fmt_num).unwrap_or_default()).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        Format::JsonLines => {
            for row in rows {
                let mut obj = Map::new();
                for (h, c) in header.iter().zip(row) {
                    let v = match (h.as_str(), c) {
                        ("stable", Some(s)) => Value::Bool(*s == 1.0),
                        (_, Some(x)) => json!(x),
                        (_, None) => Value::Null,
                    };
                    obj.insert(h.clone(), v);
                }
                writeln!(out, "{}", Value::Object(obj)).unwrap();
            }
        }
    }
    out
}

pub fn render_sweep(res: &SweepResult, format: Format) -> String {
    render(&grid_header(res), &grid_rows(res), format)
}

pub fn render_curve(data: &CurveData, format: Format) -> String {
    match data {
        CurveData::Grid(res) => render_sweep(res, format),
        CurveData::Thermal { pairs, rows } => {
            render(&thermal_header(pairs), &thermal_rows(rows, pairs.len()), format)
        }
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Resolved config, derived quantities, tool metadata and a per-command
/// summary. Parses back as a config.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config: Config,
    pub derived: Option<DerivedParams>,
    pub command: String,
    pub timestamp_unix: u64,
    pub summary: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(config: &Config, derived: Option<DerivedParams>, command: &str) -> Self {
        // SOURCE_DATE_EPOCH pins the timestamp for reproducible manifests.
        let timestamp_unix = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        RunManifest {
            config: config.clone(),
            derived,
            command: command.to_string(),
            timestamp_unix,
            summary: Vec::new(),
        }
    }

    pub fn add(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn emit(&self) -> String {
        let mut s = String::from("# optomagnon run manifest\n");
        s.push_str(&self.config.emit());
        writeln!(s, "run.tool = optomagnon").unwrap();
        writeln!(s, "run.version = {}", crate::VERSION).unwrap();
        writeln!(s, "run.timestamp_unix = {}", self.timestamp_unix).unwrap();
        writeln!(s, "run.command = {}", self.command).unwrap();
        if let Some(d) = &self.derived {
            for (k, v) in [
                ("omega_m_rad_per_s", d.omega_m),
                ("omega_p_rad_per_s", d.omega_p),
                ("omega_a_rad_per_s", d.omega_a),
                ("kappa_a_rad_per_s", d.kappa_a),
                ("v_sp_m3", d.v_sp),
                ("g_ma_rad_per_s", d.g_ma),
                ("n_pump", d.n_pump),
                ("big_g_ma_rad_per_s", d.big_g_ma),
                ("n_m", d.n_m),
                ("n_a", d.n_a),
                ("n_b", d.n_b),
            ] {
                writeln!(s, "derived.{k} = {v:e}").unwrap();
            }
        }
        for (k, v) in &self.summary {
            writeln!(s, "summary.{k} = {v}").unwrap();
        }
        s
    }
}

pub const COLUMNS_README: &str = "\
Column reference for the figure data files
==========================================

All files are comma-separated with one header row, LF line endings and
numbers printed with 12 significant digits. Frequencies are per 2π in Hz.

Common columns
  stable               1 if every drift-matrix eigenvalue has negative real part
  max_real_eig         largest eigenvalue real part, in units of 2π × 1 MHz
  en_light_microwave   logarithmic negativity, optical TM mode vs microwave mode
  en_light_magnon      logarithmic negativity, optical TM mode vs magnon mode
  en_microwave_magnon  logarithmic negativity, microwave mode vs magnon mode
  (E_N cells are empty on unstable rows)

fig2a.csv                 density plot: delta_a_over_2pi_hz x delta_b_over_2pi_hz,
                          Q = 2e7, g_mb/2π = 6.8 MHz, Δ_m = 0
fig2b_delta_m_*mhz.csv    E_N vs linked Δ (Δ_a = −Δ_b = Δ) for Δ_m/2π = 0, 2, 5 MHz,
                          Q = 5e7
fig3_q_*.csv              E_N vs linked Δ for Q = 5e6, 1e7, 5e7
fig4_g_mb_*x.csv          light-magnon and light-microwave E_N vs linked Δ for
                          g_mb = 1, 2, 4, 8 × 2π·3.4 MHz, Q = 5e7
fig5_g_mb_*x.csv          E_N vs temperature_k for the same g_mb family; each row
                          holds the Δ maximizing light-microwave E_N at that
                          temperature in delta_over_2pi_hz
";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::sweep::{run_sweep, Axis, AxisParam, SweepSpec};

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0.00000000000e0");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(fmt_num(-2.0e7), "-2.00000000000e7");
        assert_eq!(fmt_num(0.123456789012345), "1.23456789012e-1");
    }

    #[test]
    fn golden_headers() {
        let spec = SweepSpec::new(
            PhysicalParams::baseline(),
            vec![Axis::linear(AxisParam::LinkedDelta, -1e6, 1e6, 2)],
        );
        let res = run_sweep(&spec, Some(1)).unwrap();
        assert_eq!(
            grid_header(&res).join(","),
            "delta_over_2pi_hz,stable,max_real_eig,en_light_microwave,en_light_magnon,en_microwave_magnon"
        );
        assert_eq!(
            thermal_header(&res.spec.pairs).join(","),
            "temperature_k,delta_over_2pi_hz,stable,max_real_eig,en_light_microwave,en_light_magnon,en_microwave_magnon"
        );
        let text = render_sweep(&res, Format::Csv);
        assert_eq!(text.lines().count(), 3);
        assert!(!text.contains('\r'));
        let js = render_sweep(&res, Format::JsonLines);
        let first: Value = serde_json::from_str(js.lines().next().unwrap()).unwrap();
        assert_eq!(first["stable"], Value::Bool(true));
        assert_eq!(first["delta_over_2pi_hz"], json!(-1e6));
    }

    #[test]
    fn unstable_rows_have_empty_negativity() {
        let spec = SweepSpec::new(
            PhysicalParams {
                g_mb: 2.0 * std::f64::consts::PI * 3.4e6,
                ..PhysicalParams::baseline()
            },
            vec![Axis::linear(AxisParam::LinkedDelta, 0.0, 0.0, 2)],
        );
        let text = render_sweep(&run_sweep(&spec, Some(1)).unwrap(), Format::Csv);
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("0.00000000000e0,0.00000000000e0,"));
        assert!(row.ends_with(",,,"));
    }

    #[test]
    fn manifest_parses_as_config() {
        let cfg = Config::parse("q_optical = 2e7\nout_dir = results").unwrap();
        let d = crate::params::derive(&cfg.params(), &Default::default()).unwrap();
        let mut m = RunManifest::new(&cfg, Some(d), "point");
        m.add("rows", 3);
        m.add("stable", true);
        let text = m.emit();
        assert!(text.contains("derived.g_ma_rad_per_s = "));
        assert!(text.contains("summary.rows = 3"));
        assert_eq!(Config::parse(&text).unwrap(), cfg);
    }
}
