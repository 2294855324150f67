//! Run configuration: a JSON file and command-line flags are both read into
//! [`PartialConfig`], flags win, and [`PartialConfig::resolve`] fills the
//! task defaults. Physics quantities are in units of gamma throughout.

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use squeezed_core::dynamics::max_step;
use squeezed_core::{Bandwidth, Complex64, MemoryKernel, PhaseModulation, PhaseTable, ReservoirParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Kernel,
    Poles,
    Spectrum,
    Evolve,
    Sweep,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    None,
    Linear,
    Quadratic,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    #[value(name = "T")]
    T,
    #[serde(rename = "N")]
    #[value(name = "N")]
    N,
    #[serde(rename = "M_abs")]
    #[value(name = "M_abs")]
    MAbs,
    #[serde(rename = "delta")]
    #[value(name = "delta")]
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::T => "T",
            SweepAxis::N => "N",
            SweepAxis::MAbs => "M_abs",
            SweepAxis::Delta => "delta",
        }
    }
}

/// Bandwidth in units of gamma. JSON has no infinity, so it is written as "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band(pub f64);

impl Serialize for Band {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Band {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Band(v)),
            Raw::Text(t) => parse_band(&t).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_band(s: &str) -> Result<Band, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Band(f64::INFINITY)),
        t => t.parse::<f64>().map(Band).map_err(|_| format!("bad bandwidth `{s}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "M_abs")]
    pub m_abs: f64,
    #[serde(rename = "M_phase")]
    pub m_phase: f64,
    pub delta: f64,
    pub gamma: f64,
    pub phase: PhaseKind,
    #[serde(rename = "T")]
    pub t: f64,
    pub table_file: Option<PathBuf>,
    pub bandwidth: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_steps: usize,
    pub t_max: f64,
    pub t_steps: usize,
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    pub init_sigma_minus: [f64; 2],
    pub init_sigma_plus: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub inner: Task,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub physics: Physics,
    pub grids: Grids,
    pub output: Output,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// The part of a config that determines the numbers; embedded in artifacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComputeConfig<'a> {
    pub task: Task,
    pub physics: &'a Physics,
    pub grids: &'a Grids,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialPhysics {
    #[serde(rename = "N")]
    pub n: Option<f64>,
    #[serde(rename = "M_abs")]
    pub m_abs: Option<f64>,
    #[serde(rename = "M_phase")]
    pub m_phase: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub phase: Option<PhaseKind>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub table_file: Option<PathBuf>,
    pub bandwidth: Option<Band>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialGrids {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_steps: Option<usize>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_max: Option<f64>,
    pub init_sigma_minus: Option<[f64; 2]>,
    pub init_sigma_plus: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialOutput {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialSweep {
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<f64>>,
    pub inner: Option<Task>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialConfig {
    pub task: Option<Task>,
    pub physics: PartialPhysics,
    pub grids: PartialGrids,
    pub output: PartialOutput,
    pub sweep: Option<PartialSweep>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::usage(msg.into())
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),+) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )+
    };
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &PartialConfig) -> Self {
        if top.task.is_some() {
            self.task = top.task;
        }
        overlay!(self.physics, top.physics, n, m_abs, m_phase, delta, gamma, phase, t, table_file, bandwidth);
        overlay!(
            self.grids,
            top.grids,
            omega_min,
            omega_max,
            omega_steps,
            t_max,
            t_steps,
            re_min,
            re_max,
            im_max,
            init_sigma_minus,
            init_sigma_plus
        );
        overlay!(self.output, top.output, path, format);
        if let Some(ts) = &top.sweep {
            let s = self.sweep.get_or_insert_with(PartialSweep::default);
            overlay!(s, ts, axis, values, inner);
        }
        self
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let task = self.task.ok_or_else(|| usage("no task given (use a subcommand, --task or \"task\")"))?;
        let pp = &self.physics;
        let physics = Physics {
            n: pp.n.unwrap_or(1.0),
            m_abs: pp.m_abs.unwrap_or(0.0),
            m_phase: pp.m_phase.unwrap_or(0.0),
            delta: pp.delta.unwrap_or(0.0),
            gamma: pp.gamma.unwrap_or(1.0),
            phase: pp.phase.unwrap_or(PhaseKind::None),
            t: pp.t.unwrap_or(0.0),
            table_file: pp.table_file.clone(),
            bandwidth: pp.bandwidth.unwrap_or(Band(1000.0)),
        };
        let model = Model::build(&physics)?;

        let scale = physics.n + 0.5 + physics.m_abs;
        let g = &self.grids;
        let t_max = g.t_max.unwrap_or(10.0);
        let t_steps = match g.t_steps {
            Some(n) => n,
            None => model.default_steps(t_max)?,
        };
        let grids = Grids {
            omega_min: g.omega_min.unwrap_or(-10.0 * scale),
            omega_max: g.omega_max.unwrap_or(10.0 * scale),
            omega_steps: g.omega_steps.unwrap_or(2001),
            t_max,
            t_steps,
            re_min: g.re_min.unwrap_or(-3.0 * scale),
            re_max: g.re_max.unwrap_or(0.0),
            im_max: g.im_max.unwrap_or(3.0 * scale),
            init_sigma_minus: g.init_sigma_minus.unwrap_or([1.0, 0.0]),
            init_sigma_plus: g.init_sigma_plus.unwrap_or([1.0, 0.0]),
        };
        validate_grids(&grids)?;

        let output = Output { path: self.output.path.clone(), format: self.output.format.unwrap_or(Format::Csv) };
        let sweep = match (task, &self.sweep) {
            (Task::Sweep, Some(s)) => Some(resolve_sweep(s)?),
            (Task::Sweep, None) => return Err(usage("sweep needs --axis and --values")),
            (_, _) => None,
        };
        if task == Task::Sweep && output.path.is_none() {
            return Err(usage("sweep needs --out <directory>"));
        }
        Ok(RunConfig { task, physics, grids, output, sweep })
    }
}

fn resolve_sweep(s: &PartialSweep) -> Result<SweepSpec, CliError> {
    let axis = s.axis.ok_or_else(|| usage("sweep needs --axis"))?;
    let values = s.values.clone().ok_or_else(|| usage("sweep needs --values"))?;
    if values.is_empty() {
        return Err(usage("sweep values must be nonempty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(usage("sweep values must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("sweep values must be sorted and distinct"));
    }
    let inner = s.inner.unwrap_or(Task::Spectrum);
    if inner == Task::Sweep {
        return Err(usage("sweep inner task cannot be sweep"));
    }
    Ok(SweepSpec { axis, values, inner })
}

fn validate_grids(g: &Grids) -> Result<(), CliError> {
    let finite = [g.omega_min, g.omega_max, g.t_max, g.re_min, g.re_max, g.im_max]
        .iter()
        .chain(&g.init_sigma_minus)
        .chain(&g.init_sigma_plus)
        .all(|v| v.is_finite());
    if !finite {
        return Err(usage("grid values must be finite"));
    }
    if g.omega_max <= g.omega_min || g.omega_steps < 2 {
        return Err(usage("frequency grid needs omega_max > omega_min and omega_steps >= 2"));
    }
    if g.t_max <= 0.0 || g.t_steps < 1 {
        return Err(usage("time grid needs t_max > 0 and t_steps >= 1"));
    }
    if g.re_min >= g.re_max || g.re_max > 0.0 || g.im_max <= 0.0 {
        return Err(usage("pole region needs re_min < re_max <= 0 and im_max > 0"));
    }
    Ok(())
}

/// Core objects in absolute units.
pub struct Model {
    pub params: ReservoirParams,
    pub modulation: PhaseModulation,
    pub band: Bandwidth,
}

impl Model {
    pub fn build(p: &Physics) -> Result<Self, CliError> {
        if !(p.gamma.is_finite() && p.gamma > 0.0) {
            return Err(usage(format!("gamma must be > 0, got {}", p.gamma)));
        }
        let g = p.gamma;
        let m = Complex64::from_polar(p.m_abs, p.m_phase);
        if p.m_abs < 0.0 {
            return Err(usage(format!("M_abs must be >= 0, got {}", p.m_abs)));
        }
        let params = ReservoirParams::new(p.n, m, g, p.delta * g).map_err(CliError::from)?;
        let t = p.t / g;
        let modulation = match p.phase {
            PhaseKind::None => PhaseModulation::None,
            PhaseKind::Linear => PhaseModulation::Linear { t },
            PhaseKind::Quadratic => PhaseModulation::Quadratic { t },
            PhaseKind::Table => {
                let path = p.table_file.as_ref().ok_or_else(|| usage("--phase table needs --table-file"))?;
                let file = std::fs::File::open(path)
                    .map_err(|e| usage(format!("cannot read table file {}: {e}", path.display())))?;
                PhaseModulation::Tabulated { table: PhaseTable::from_csv(file, g).map_err(CliError::from)? }
            }
        };
        modulation.validate().map_err(CliError::from)?;
        let band = Bandwidth::new(p.bandwidth.0 * g).map_err(CliError::from)?;
        // Surface kernel construction problems (table too short, ...) as config errors.
        MemoryKernel::new(modulation.clone(), band).map_err(CliError::from)?;
        Ok(Self { params, modulation, band })
    }

    fn default_steps(&self, t_max: f64) -> Result<usize, CliError> {
        let kernel = MemoryKernel::new(self.modulation.clone(), self.band).map_err(CliError::from)?;
        let h = max_step(&self.params, &kernel);
        // Shave rounding noise so an exact multiple of the bound is not bumped up a step.
        Ok(((t_max / self.params.gamma / h) * (1.0 - 1e-10)).ceil().max(1.0) as usize)
    }
}
