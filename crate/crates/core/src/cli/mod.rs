//! Command-line front end: `point`, `sweep`, `figure` and `validate`.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration error,
//! 3 unstable operating point, 4 output not writable, 5 validation failed.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use self::config::Config;
use self::output::{render_curve, render_sweep, write_file, Format, RunManifest, COLUMNS_README};
use crate::dynamics::{build_matrices, check_stability_with, steady_state_with};
use crate::entanglement::{all_pairs, reduce, Pair};
use crate::error::{Error, Result};
use crate::oracle::{brute_force_eta, integrate_covariance, IntegrationSpec};
use crate::params::{derive, PhysicalConstants};
use crate::smallmat::{frobenius_norm, Mat};
use crate::sweep::{figure_dataset, run_sweep, Axis, AxisParam, Figure, Spacing, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

/// Lyapunov vs integration, relative Frobenius.
pub const VALIDATE_COV_TOL: f64 = 1e-6;
/// Closed-form vs spectral η⁻, absolute.
pub const VALIDATE_ETA_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "optomagnon",
    version,
    about = "Light–magnon–microwave entanglement simulator"
)]
pub struct Cli {
    /// Flat `key = value` config file; missing keys take baseline values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` from the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Cap on sweep worker threads; 1 runs serially.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Config override applied after the file, e.g. `--set q_optical=2e7`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady state and negativities at the configured operating point.
    Point,
    /// Grid sweep over one or two axes.
    Sweep {
        /// `name=start:stop:count[:log]`, frequencies per 2π in Hz. The
        /// first axis varies slowest.
        #[arg(long = "axis", required = true, value_name = "SPEC")]
        axes: Vec<String>,
    },
    /// Regenerate a figure dataset: fig2a, fig2b, fig3, fig4, fig5 or all.
    Figure { name: String },
    /// Cross-check the steady state against time integration and the
    /// symplectic-spectrum negativity.
    Validate,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidParam { .. } | Error::Domain(_) => EXIT_CONFIG,
        Error::Unstable { .. } | Error::AllUnstable => EXIT_UNSTABLE,
        Error::Io(_) => EXIT_OUTPUT,
        _ => EXIT_INTERNAL,
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::Unstable { max_real_eig } = e {
                let _ = writeln!(err, "max_real_eig = {max_real_eig:e}");
            }
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                line: 0,
                msg: format!("cannot read {}: {e}", path.display()),
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for (i, ov) in cli.overrides.iter().enumerate() {
        let bad = |msg: String| Error::Config {
            line: 0,
            msg: format!("--set #{}: {msg}", i + 1),
        };
        let (k, v) = ov
            .split_once('=')
            .ok_or_else(|| bad(format!("expected KEY=VALUE, got `{ov}`")))?;
        cfg.assign(k.trim(), v.trim()).map_err(bad)?;
    }
    if let Some(dir) = &cli.out {
        cfg.out_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn workers(cli: &Cli) -> Option<usize> {
    cli.workers.map(|n| n as usize)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn command_line(cli: &Cli) -> String {
    let name = match &cli.command {
        Command::Point => "point".to_string(),
        Command::Sweep { axes } => format!("sweep --axis {}", axes.join(" --axis ")),
        Command::Figure { name } => format!("figure {name}"),
        Command::Validate => "validate".to_string(),
    };
    match cli.workers {
        Some(w) => format!("{name} --workers {w}"),
        None => name,
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Point => cmd_point(cli, &cfg, out),
        Command::Sweep { axes } => cmd_sweep(cli, &cfg, axes, out, err),
        Command::Figure { name } => cmd_figure(cli, &cfg, name, out),
        Command::Validate => cmd_validate(cli, &cfg, out),
    }
}

/// Writes the manifest to the output directory when one is configured and
/// to `fallback` otherwise.
fn emit_manifest(cfg: &Config, m: &RunManifest, file: &str, fallback: &mut dyn Write) -> Result<()> {
    match &cfg.out_dir {
        Some(dir) => write_file(dir, file, &m.emit()).map(|_| ()),
        None => fallback.write_all(m.emit().as_bytes()).map_err(io_err),
    }
}

fn summary_json(m: &RunManifest) -> Value {
    let mut obj = Map::new();
    for (k, v) in &m.summary {
        let val = match v.as_str() {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            s => s.parse::<f64>().map(|x| json!(x)).unwrap_or_else(|_| json!(s)),
        };
        obj.insert(k.clone(), val);
    }
    Value::Object(obj)
}

pub fn cmd_point(cli: &Cli, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let p = cfg.params();
    let dp = derive(&p, &PhysicalConstants::SI)?;
    let m = build_matrices(&dp, &p);
    let st = check_stability_with(&m, cfg.eps_stab_rel)?;
    let mut manifest = RunManifest::new(cfg, Some(dp), &command_line(cli));
    manifest.add("stable", st.stable);
    manifest.add("max_real_eig", format!("{:e}", st.max_real_eig));
    let code = if st.stable {
        let ss = steady_state_with(&m, cfg.eps_stab_rel)?;
        let res = all_pairs(&ss.v)?;
        for (pair, r) in Pair::ALL.iter().zip(&res) {
            manifest.add(format!("en_{}", pair.name()), format!("{:e}", r.e_n));
        }
        manifest.add("lyapunov_residual", format!("{:e}", ss.residual));
        EXIT_OK
    } else {
        EXIT_UNSTABLE
    };
    match cli.format {
        Format::Csv => out.write_all(manifest.emit().as_bytes()).map_err(io_err)?,
        Format::JsonLines => writeln!(out, "{}", summary_json(&manifest)).map_err(io_err)?,
    }
    if let Some(dir) = &cfg.out_dir {
        write_file(dir, "point_manifest.txt", &manifest.emit())?;
    }
    Ok(code)
}

/// `name=start:stop:count[:log]`.
pub fn parse_axis(s: &str) -> Result<Axis> {
    let bad = |msg: &str| Error::Config {
        line: 0,
        msg: format!("--axis `{s}`: {msg}"),
    };
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| bad("expected name=start:stop:count[:log]"))?;
    let param = AxisParam::from_name(name.trim()).ok_or_else(|| bad("unknown parameter"))?;
    let parts: Vec<&str> = range.split(':').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad("expected start:stop:count[:log]"));
    }
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad("bad number"))
    };
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
    let spacing = match parts.get(3) {
        None | Some(&"lin") => Spacing::Linear,
        Some(&"log") => Spacing::Log,
        Some(_) => return Err(bad("spacing must be `lin` or `log`")),
    };
    let axis = Axis {
        param,
        start,
        stop,
        count,
        spacing,
    };
    axis.validate()?;
    Ok(axis)
}

pub fn cmd_sweep(
    cli: &Cli,
    cfg: &Config,
    axes: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let axes = axes.iter().map(|a| parse_axis(a)).collect::<Result<Vec<_>>>()?;
    let mut spec = SweepSpec::new(cfg.params(), axes);
    spec.eps_stab_rel = cfg.eps_stab_rel;
    let res = run_sweep(&spec, workers(cli))?;
    let table = render_sweep(&res, cli.format);

    let mut manifest = RunManifest::new(cfg, Some(res.derived_at_base), &command_line(cli));
    let stable = res.rows.iter().filter(|r| r.outcome.is_stable()).count();
    manifest.add("rows", res.rows.len());
    manifest.add("stable_rows", stable);
    for pair in &res.spec.pairs {
        if let Ok(opt) = res.optimum(*pair) {
            let at: Vec<String> = opt.axis_values.iter().map(|v| format!("{v:e}")).collect();
            manifest.add(format!("optimum.{}.e_n", pair.name()), format!("{:e}", opt.e_n));
            manifest.add(format!("optimum.{}.at", pair.name()), at.join(" "));
        }
    }
    match &cfg.out_dir {
        Some(dir) => {
            write_file(dir, &format!("sweep.{}", cli.format.extension()), &table)?;
        }
        None => out.write_all(table.as_bytes()).map_err(io_err)?,
    }
    emit_manifest(cfg, &manifest, "sweep_manifest.txt", err)?;
    Ok(if stable == 0 { EXIT_UNSTABLE } else { EXIT_OK })
}

pub fn cmd_figure(cli: &Cli, cfg: &Config, name: &str, out: &mut dyn Write) -> Result<i32> {
    let figures: Vec<Figure> = if name == "all" {
        Figure::ALL.to_vec()
    } else {
        vec![Figure::from_name(name).ok_or_else(|| Error::Config {
            line: 0,
            msg: format!("unknown figure `{name}` (expected fig2a, fig2b, fig3, fig4, fig5 or all)"),
        })?]
    };
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("figures"));
    ensure_writable(&dir)?;
    let base = cfg.params();
    let derived = derive(&base, &PhysicalConstants::SI)?;
    for fig in figures {
        let data = figure_dataset(fig, &base, &cfg.grid, workers(cli))?;
        let mut manifest = RunManifest::new(cfg, Some(derived), &command_line(cli));
        manifest.add("figure", fig.name());
        for curve in &data.curves {
            let file = format!("{}.{}", curve.label, cli.format.extension());
            let text = render_curve(&curve.data, cli.format);
            let rows = text.lines().count() - usize::from(cli.format == Format::Csv);
            let path = write_file(&dir, &file, &text)?;
            manifest.add(format!("{}.rows", curve.label), rows);
            writeln!(out, "{}", path.display()).map_err(io_err)?;
        }
        write_file(&dir, &format!("{}_manifest.txt", fig.name()), &manifest.emit())?;
    }
    write_file(&dir, "README.txt", COLUMNS_README)?;
    Ok(EXIT_OK)
}

/// Fails fast, before any computation, if `dir` cannot hold output files.
fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let probe = dir.join(".optomagnon_write_probe");
    std::fs::write(&probe, b"").map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

/// Outcome of the two cross-checks behind `validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub cov_rel_diff: f64,
    pub integration_steps: usize,
    /// (closed-form η⁻, spectral η⁻) per pair, in [`Pair::ALL`] order.
    pub eta: Vec<(Pair, f64, f64)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.cov_rel_diff < VALIDATE_COV_TOL
            && self.eta.iter().all(|(_, a, b)| (a - b).abs() < VALIDATE_ETA_TOL)
    }
}

pub fn validate_point(cfg: &Config) -> Result<ValidationReport> {
    let p = cfg.params();
    let dp = derive(&p, &PhysicalConstants::SI)?;
    let m = build_matrices(&dp, &p);
    let ss = steady_state_with(&m, cfg.eps_stab_rel)?;
    let spec = IntegrationSpec::default_for(ss.max_real_eig);
    let v0 = Mat::identity(6).scale(0.5);
    let int = integrate_covariance(&m, &spec, &v0)?;
    let cov_rel_diff = frobenius_norm(&int.v.sub(&ss.v)) / frobenius_norm(&ss.v);
    let res = all_pairs(&ss.v)?;
    let eta = Pair::ALL
        .iter()
        .zip(&res)
        .map(|(&pair, r)| Ok((pair, r.eta_minus, brute_force_eta(&reduce(&ss.v, pair))?)))
        .collect::<Result<_>>()?;
    Ok(ValidationReport {
        cov_rel_diff,
        integration_steps: int.steps,
        eta,
    })
}

pub fn cmd_validate(cli: &Cli, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let derived = derive(&cfg.params(), &PhysicalConstants::SI)?;
    let mut manifest = RunManifest::new(cfg, Some(derived), &command_line(cli));
    let passed = match validate_point(cfg) {
        Ok(report) => {
            manifest.add("covariance_rel_diff", format!("{:e}", report.cov_rel_diff));
            manifest.add("integration_steps", report.integration_steps);
            for (pair, closed, spectral) in &report.eta {
                manifest.add(
                    format!("eta_minus.{}.closed_form", pair.name()),
                    format!("{closed:e}"),
                );
                manifest.add(
                    format!("eta_minus.{}.spectral", pair.name()),
                    format!("{spectral:e}"),
                );
            }
            report.passed()
        }
        // The oracle could not confirm the direct solve.
        Err(e @ Error::IntegrationNoConvergence { .. }) => {
            manifest.add("failure", e);
            false
        }
        Err(e) => return Err(e),
    };
    manifest.add("verdict", if passed { "PASS" } else { "FAIL" });
    match cli.format {
        Format::Csv => out.write_all(manifest.emit().as_bytes()).map_err(io_err)?,
        Format::JsonLines => writeln!(out, "{}", summary_json(&manifest)).map_err(io_err)?,
    }
    if let Some(dir) = &cfg.out_dir {
        write_file(dir, "validate_manifest.txt", &manifest.emit())?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}
