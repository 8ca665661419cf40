//! Grid evaluation of the steady-state pipeline and the named figure presets.
//!
//! Rows are always produced in row-major order over the axes (first axis
//! slowest), whatever the number of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dynamics::{build_matrices, check_stability_with, steady_state_with};
use crate::entanglement::{all_pairs, Pair};
use crate::error::{Error, Result};
use crate::params::{derive, DerivedParams, ParamKey, PhysicalConstants, PhysicalParams};

/// g_base/2π = 3.4 MHz.
pub const G_BASE_OVER_2PI_HZ: f64 = 3.4e6;

/// Column order for entanglement values in every table.
pub const PAIR_COLUMNS: [Pair; 3] = [Pair::LightMicrowave, Pair::LightMagnon, Pair::MicrowaveMagnon];

pub const LINKED_DELTA: &str = "delta_over_2pi_hz";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    Param(ParamKey),
    /// Δ_a = Δ, Δ_b = −Δ.
    LinkedDelta,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Param(k) => k.name(),
            AxisParam::LinkedDelta => LINKED_DELTA,
        }
    }

    pub fn from_name(s: &str) -> Option<AxisParam> {
        if s == LINKED_DELTA {
            Some(AxisParam::LinkedDelta)
        } else {
            ParamKey::from_name(s).map(AxisParam::Param)
        }
    }

    /// Applies a value given in external units.
    pub fn apply(self, p: &mut PhysicalParams, value: f64) {
        match self {
            AxisParam::Param(k) => k.set(p, value),
            AxisParam::LinkedDelta => {
                ParamKey::DeltaA.set(p, value);
                ParamKey::DeltaB.set(p, -value);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(param: AxisParam, start: f64, stop: f64, count: usize) -> Self {
        Axis {
            param,
            start,
            stop,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(param: AxisParam, start: f64, stop: f64, count: usize) -> Self {
        Axis {
            param,
            start,
            stop,
            count,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidParam {
            key: self.param.name().to_string(),
            reason: reason.to_string(),
        };
        if self.count < 2 {
            return Err(bad("axis count must be >= 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(bad("axis bounds must be finite"));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(bad("log axis bounds must be > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start * (1.0 - f) + self.stop * f,
                    Spacing::Log => (self.start.ln() * (1.0 - f) + self.stop.ln() * f).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: PhysicalParams,
    pub constants: PhysicalConstants,
    /// One or two axes; the first varies slowest.
    pub axes: Vec<Axis>,
    pub pairs: Vec<Pair>,
    /// Relative stability margin, see [`crate::EPS_STAB_REL`].
    pub eps_stab_rel: f64,
}

impl SweepSpec {
    pub fn new(base: PhysicalParams, axes: Vec<Axis>) -> Self {
        SweepSpec {
            base,
            constants: PhysicalConstants::SI,
            axes,
            pairs: PAIR_COLUMNS.to_vec(),
            eps_stab_rel: crate::EPS_STAB_REL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.axes.len()) {
            return Err(Error::Domain(format!(
                "sweep needs 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        for a in &self.axes {
            a.validate()?;
        }
        if !(self.eps_stab_rel.is_finite() && self.eps_stab_rel >= 0.0) {
            return Err(Error::InvalidParam {
                key: "eps_stab_rel".into(),
                reason: "must be >= 0".into(),
            });
        }
        if self.pairs.is_empty() {
            return Err(Error::Domain("sweep records no pairs".into()));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Stable { max_real_eig: f64, e_n: Vec<f64> },
    Unstable { max_real_eig: f64 },
    Failed(String),
}

impl Outcome {
    pub fn is_stable(&self) -> bool {
        matches!(self, Outcome::Stable { .. })
    }

    pub fn max_real_eig(&self) -> Option<f64> {
        match self {
            Outcome::Stable { max_real_eig, .. } | Outcome::Unstable { max_real_eig } => Some(*max_real_eig),
            Outcome::Failed(_) => None,
        }
    }

    pub fn e_n(&self) -> Option<&[f64]> {
        match self {
            Outcome::Stable { e_n, .. } => Some(e_n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Axis values in external units, one per axis.
    pub axis_values: Vec<f64>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub derived_at_base: DerivedParams,
    pub version: &'static str,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub row: usize,
    pub axis_values: Vec<f64>,
    pub e_n: f64,
}

impl SweepResult {
    pub fn pair_index(&self, pair: Pair) -> Option<usize> {
        self.spec.pairs.iter().position(|&p| p == pair)
    }

    /// E_N of `pair` per row; `None` where the row is not stable.
    pub fn series(&self, pair: Pair) -> Vec<Option<f64>> {
        let k = self.pair_index(pair);
        self.rows
            .iter()
            .map(|r| k.and_then(|k| r.outcome.e_n().map(|e| e[k])))
            .collect()
    }

    /// Row maximizing E_N for `pair`; ties go to the first row.
    pub fn optimum(&self, pair: Pair) -> Result<Optimum> {
        let k = self
            .pair_index(pair)
            .ok_or_else(|| Error::Domain(format!("pair {pair} not recorded in sweep")))?;
        let mut best: Option<Optimum> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(e) = row.outcome.e_n() {
                if best.as_ref().is_none_or(|b| e[k] > b.e_n) {
                    best = Some(Optimum {
                        row: i,
                        axis_values: row.axis_values.clone(),
                        e_n: e[k],
                    });
                }
            }
        }
        best.ok_or(Error::AllUnstable)
    }
}

/// derive → build → stability → steady state → negativity, with every
/// failure folded into the outcome.
pub fn evaluate_point(
    params: &PhysicalParams,
    constants: &PhysicalConstants,
    pairs: &[Pair],
    eps_stab_rel: f64,
) -> Outcome {
    let dp = match derive(params, constants) {
        Ok(d) => d,
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    let m = build_matrices(&dp, params);
    let st = match check_stability_with(&m, eps_stab_rel) {
        Ok(s) => s,
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    if !st.stable {
        return Outcome::Unstable {
            max_real_eig: st.max_real_eig,
        };
    }
    let ss = match steady_state_with(&m, eps_stab_rel) {
        Ok(s) => s,
        Err(Error::Unstable { max_real_eig }) => return Outcome::Unstable { max_real_eig },
        Err(e) => return Outcome::Failed(e.to_string()),
    };
    match all_pairs(&ss.v) {
        Ok(res) => {
            let e_n = pairs
                .iter()
                .map(|&p| res[Pair::ALL.iter().position(|&q| q == p).unwrap()].e_n)
                .collect();
            Outcome::Stable {
                max_real_eig: ss.max_real_eig,
                e_n,
            }
        }
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// Evaluates every grid point. `workers = None` uses the global rayon pool;
/// `Some(n)` runs on a dedicated pool of `n` threads.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    let derived_at_base = derive(&spec.base, &spec.constants)?;
    let grids: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let n = spec.point_count();

    let point = |idx: usize| -> Row {
        let mut rem = idx;
        let mut axis_values = vec![0.0; grids.len()];
        for (k, g) in grids.iter().enumerate().rev() {
            axis_values[k] = g[rem % g.len()];
            rem /= g.len();
        }
        let mut p = spec.base;
        for (axis, &v) in spec.axes.iter().zip(&axis_values) {
            axis.param.apply(&mut p, v);
        }
        Row {
            axis_values,
            outcome: evaluate_point(&p, &spec.constants, &spec.pairs, spec.eps_stab_rel),
        }
    };

    let rows: Vec<Row> = match workers {
        Some(1) => (0..n).map(point).collect(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(|| (0..n).into_par_iter().map(point).collect()),
        None => (0..n).into_par_iter().map(point).collect(),
    };

    Ok(SweepResult {
        spec: spec.clone(),
        derived_at_base,
        version: crate::VERSION,
        rows,
    })
}

pub fn find_optimum(spec: &SweepSpec, pair: Pair, workers: Option<usize>) -> Result<Optimum> {
    run_sweep(spec, workers)?.optimum(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    pub fn from_name(s: &str) -> Option<Figure> {
        Figure::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Grid defaults shared by the figure presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureGrid {
    pub delta_min_over_2pi_hz: f64,
    pub delta_max_over_2pi_hz: f64,
    pub points_1d: usize,
    pub points_2d: usize,
    pub temperature_min_k: f64,
    pub temperature_max_k: f64,
    pub temperature_points: usize,
}

impl Default for FigureGrid {
    fn default() -> Self {
        FigureGrid {
            delta_min_over_2pi_hz: -20.0e6,
            delta_max_over_2pi_hz: 20.0e6,
            points_1d: 401,
            points_2d: 201,
            temperature_min_k: 0.01,
            temperature_max_k: 2.0,
            temperature_points: 100,
        }
    }
}

impl FigureGrid {
    fn delta_axis(&self, param: AxisParam, count: usize) -> Axis {
        Axis::linear(
            param,
            self.delta_min_over_2pi_hz,
            self.delta_max_over_2pi_hz,
            count,
        )
    }
}

/// One row of a temperature curve: E_N optimized over the linked detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRow {
    pub temperature: f64,
    /// Optimizing Δ/2π and the stable row found there; `None` when every
    /// detuning is unstable at this temperature.
    pub best: Option<(f64, Outcome)>,
    /// Smallest max_real_eig over the detuning grid.
    pub least_unstable: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveData {
    Grid(Box<SweepResult>),
    Thermal { pairs: Vec<Pair>, rows: Vec<ThermalRow> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// File stem, e.g. `fig4_g_mb_2x`.
    pub label: String,
    pub data: CurveData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub figure: Figure,
    pub curves: Vec<Curve>,
}

fn hz(v: f64) -> f64 {
    2.0 * PI * v
}

/// Builds the preset for a figure on top of `base` (usually the baseline
/// operating point) and evaluates it.
pub fn figure_dataset(
    which: Figure,
    base: &PhysicalParams,
    grid: &FigureGrid,
    workers: Option<usize>,
) -> Result<FigureDataset> {
    let delta_1d = grid.delta_axis(AxisParam::LinkedDelta, grid.points_1d);
    let g_family = [1u32, 2, 4, 8];
    let grid_curve = |label: String, p: PhysicalParams, axes: Vec<Axis>| -> Result<Curve> {
        Ok(Curve {
            label,
            data: CurveData::Grid(Box::new(run_sweep(&SweepSpec::new(p, axes), workers)?)),
        })
    };

    let curves = match which {
        Figure::Fig2a => {
            let p = PhysicalParams {
                q_optical: 2.0e7,
                delta_m: 0.0,
                ..*base
            };
            let axes = vec![
                grid.delta_axis(AxisParam::Param(ParamKey::DeltaA), grid.points_2d),
                grid.delta_axis(AxisParam::Param(ParamKey::DeltaB), grid.points_2d),
            ];
            vec![grid_curve("fig2a".into(), p, axes)?]
        }
        Figure::Fig2b => [0.0, 2.0, 5.0]
            .into_iter()
            .map(|dm| {
                let p = PhysicalParams {
                    q_optical: 5.0e7,
                    delta_m: hz(dm * 1e6),
                    ..*base
                };
                grid_curve(format!("fig2b_delta_m_{dm}mhz"), p, vec![delta_1d])
            })
            .collect::<Result<_>>()?,
        Figure::Fig3 => [(5.0e6, "5e6"), (1.0e7, "1e7"), (5.0e7, "5e7")]
            .into_iter()
            .map(|(q, tag)| {
                let p = PhysicalParams {
                    q_optical: q,
                    delta_m: 0.0,
                    ..*base
                };
                grid_curve(format!("fig3_q_{tag}"), p, vec![delta_1d])
            })
            .collect::<Result<_>>()?,
        Figure::Fig4 => g_family
            .into_iter()
            .map(|k| {
                let p = fig4_params(base, k);
                grid_curve(format!("fig4_g_mb_{k}x"), p, vec![delta_1d])
            })
            .collect::<Result<_>>()?,
        Figure::Fig5 => g_family
            .into_iter()
            .map(|k| {
                let p = fig4_params(base, k);
                let t_axis = Axis::log(
                    AxisParam::Param(ParamKey::Temperature),
                    grid.temperature_min_k,
                    grid.temperature_max_k,
                    grid.temperature_points,
                );
                let res = run_sweep(&SweepSpec::new(p, vec![t_axis, delta_1d]), workers)?;
                Ok(Curve {
                    label: format!("fig5_g_mb_{k}x"),
                    data: CurveData::Thermal {
                        pairs: res.spec.pairs.clone(),
                        rows: thermal_rows(&res),
                    },
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(FigureDataset {
        figure: which,
        curves,
    })
}

fn fig4_params(base: &PhysicalParams, multiple: u32) -> PhysicalParams {
    PhysicalParams {
        q_optical: 5.0e7,
        delta_m: 0.0,
        g_mb: hz(G_BASE_OVER_2PI_HZ) * multiple as f64,
        ..*base
    }
}

/// Collapses a (temperature × Δ) grid into one row per temperature, keeping
/// the Δ that maximizes light–microwave E_N.
pub fn thermal_rows(res: &SweepResult) -> Vec<ThermalRow> {
    let inner = res.spec.axes[1].count;
    let k = res.pair_index(Pair::LightMicrowave).unwrap_or(0);
    res.rows
        .chunks(inner)
        .map(|chunk| {
            let mut best: Option<(f64, Outcome)> = None;
            let mut least: Option<f64> = None;
            for row in chunk {
                if let Some(m) = row.outcome.max_real_eig() {
                    least = Some(least.map_or(m, |l: f64| l.min(m)));
                }
                if let Some(e) = row.outcome.e_n() {
                    let better = match &best {
                        None => true,
                        Some((_, o)) => e[k] > o.e_n().unwrap()[k],
                    };
                    if better {
                        best = Some((row.axis_values[1], row.outcome.clone()));
                    }
                }
            }
            ThermalRow {
                temperature: chunk[0].axis_values[0],
                best,
                least_unstable: least,
            }
        })
        .collect()
}
