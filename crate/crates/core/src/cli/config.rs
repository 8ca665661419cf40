//! Flat `key = value` configuration files.
//!
//! SI units throughout; frequencies are entered per 2π with an explicit
//! `_over_2pi_hz` suffix. Keys under the `derived.`, `run.` and `summary.`
//! prefixes are informational (written by the run manifest) and skipped on
//! parse, which lets a manifest be fed back in as a config.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::params::{ParamKey, PhysicalParams};
use crate::sweep::{FigureGrid, LINKED_DELTA};
use crate::EPS_STAB_REL;

const INFO_PREFIXES: [&str; 3] = ["derived.", "run.", "summary."];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Parameter values in external units, indexed like [`ParamKey::ALL`].
    values: [f64; 16],
    pub eps_stab_rel: f64,
    pub grid: FigureGrid,
    pub out_dir: Option<PathBuf>,
}

/// Baseline operating point, external units.
const BASELINE: [(ParamKey, f64); 16] = [
    (ParamKey::Verdet, 377.0),
    (ParamKey::RefractiveIndex, 2.19),
    (ParamKey::SpinDensity, 2.1e28),
    (ParamKey::Radius, 125.0e-6),
    (ParamKey::B0, 0.1),
    (ParamKey::PumpPower, 15.0e-3),
    (ParamKey::PumpWavelength, 1550.0e-9),
    (ParamKey::QOptical, 5.0e7),
    (ParamKey::OmegaB, 9.0e9),
    (ParamKey::KappaM, 1.0e6),
    (ParamKey::KappaB, 1.0e6),
    (ParamKey::Temperature, 0.01),
    (ParamKey::DeltaM, 0.0),
    (ParamKey::DeltaA, 0.0),
    (ParamKey::DeltaB, 0.0),
    (ParamKey::GMb, 6.8e6),
];

impl Default for Config {
    fn default() -> Self {
        let mut values = [0.0; 16];
        for (k, v) in BASELINE {
            values[index(k)] = v;
        }
        Config {
            values,
            eps_stab_rel: EPS_STAB_REL,
            grid: FigureGrid::default(),
            out_dir: None,
        }
    }
}

fn index(k: ParamKey) -> usize {
    ParamKey::ALL.iter().position(|&x| x == k).unwrap()
}

impl Config {
    pub fn get(&self, k: ParamKey) -> f64 {
        self.values[index(k)]
    }

    pub fn set(&mut self, k: ParamKey, v: f64) {
        self.values[index(k)] = v;
    }

    pub fn params(&self) -> PhysicalParams {
        let mut p = PhysicalParams::baseline();
        for k in ParamKey::ALL {
            k.set(&mut p, self.get(k));
        }
        p
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| Error::Config { line, msg };
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if INFO_PREFIXES.iter().any(|p| key.starts_with(p)) {
                continue;
            }
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let detunings = [LINKED_DELTA, ParamKey::DeltaA.name(), ParamKey::DeltaB.name()];
            if seen.contains(LINKED_DELTA) && detunings[1..].iter().any(|k| seen.contains(*k)) {
                return Err(err(format!(
                    "`{LINKED_DELTA}` conflicts with `delta_a`/`delta_b` keys"
                )));
            }
            cfg.assign(key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment without validating the result.
    pub fn assign(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || -> std::result::Result<f64, String> {
            let v: f64 = value
                .parse()
                .map_err(|_| format!("`{key}`: cannot parse `{value}` as a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{key}`: value must be finite"))
            }
        };
        let count = || -> std::result::Result<usize, String> {
            value
                .parse()
                .map_err(|_| format!("`{key}`: cannot parse `{value}` as a count"))
        };
        if let Some(k) = ParamKey::from_name(key) {
            self.set(k, num()?);
            return Ok(());
        }
        let g = &mut self.grid;
        match key {
            LINKED_DELTA => {
                let d = num()?;
                self.set(ParamKey::DeltaA, d);
                self.set(ParamKey::DeltaB, -d);
            }
            "eps_stab_rel" => self.eps_stab_rel = num()?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "sweep_delta_min_over_2pi_hz" => g.delta_min_over_2pi_hz = num()?,
            "sweep_delta_max_over_2pi_hz" => g.delta_max_over_2pi_hz = num()?,
            "sweep_points_1d" => g.points_1d = count()?,
            "sweep_points_2d" => g.points_2d = count()?,
            "sweep_temperature_min_k" => g.temperature_min_k = num()?,
            "sweep_temperature_max_k" => g.temperature_max_k = num()?,
            "sweep_temperature_points" => g.temperature_points = count()?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        let bad = |key: &str, reason: &str| Error::InvalidParam {
            key: key.into(),
            reason: reason.into(),
        };
        if !(self.eps_stab_rel >= 0.0) {
            return Err(bad("eps_stab_rel", "must be >= 0"));
        }
        let g = &self.grid;
        if g.points_1d < 2 {
            return Err(bad("sweep_points_1d", "must be >= 2"));
        }
        if g.points_2d < 2 {
            return Err(bad("sweep_points_2d", "must be >= 2"));
        }
        if g.temperature_points < 2 {
            return Err(bad("sweep_temperature_points", "must be >= 2"));
        }
        if !(g.temperature_min_k > 0.0 && g.temperature_max_k > 0.0) {
            return Err(bad("sweep_temperature_min_k", "temperature bounds must be > 0"));
        }
        Ok(())
    }

    /// Canonical text form; `Config::parse(&c.emit()) == c`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        for k in ParamKey::ALL {
            writeln!(s, "{} = {:e}", k.name(), self.get(k)).unwrap();
        }
        let g = &self.grid;
        writeln!(s, "eps_stab_rel = {:e}", self.eps_stab_rel).unwrap();
        writeln!(s, "sweep_delta_min_over_2pi_hz = {:e}", g.delta_min_over_2pi_hz).unwrap();
        writeln!(s, "sweep_delta_max_over_2pi_hz = {:e}", g.delta_max_over_2pi_hz).unwrap();
        writeln!(s, "sweep_points_1d = {}", g.points_1d).unwrap();
        writeln!(s, "sweep_points_2d = {}", g.points_2d).unwrap();
        writeln!(s, "sweep_temperature_min_k = {:e}", g.temperature_min_k).unwrap();
        writeln!(s, "sweep_temperature_max_k = {:e}", g.temperature_max_k).unwrap();
        writeln!(s, "sweep_temperature_points = {}", g.temperature_points).unwrap();
        if let Some(dir) = &self.out_dir {
            writeln!(s, "out_dir = {}", dir.display()).unwrap();
        }
        s
    }
}
