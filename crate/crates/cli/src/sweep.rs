//! Parameter sweeps: one artifact per axis value, computed in parallel, and
//! a summary table written after an ordered join.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use squeezed_core::dynamics::slow_pole_firstorder;
use squeezed_core::Reservoir;

use crate::config::{Model, PartialConfig, RunConfig, SweepAxis, SweepSpec};
use crate::run::{render, write_artifact};
use crate::{CliError, VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    /// 0 on success, otherwise the exit code of the failure.
    pub code: u8,
    pub fwhm: Option<f64>,
    pub slow_pole: Option<f64>,
    pub slow_pole_firstorder: Option<f64>,
    pub artifact: String,
    pub message: String,
}

impl PointResult {
    fn status(&self) -> &'static str {
        match self.code {
            0 => "ok",
            crate::EXIT_USAGE => "invalid",
            _ => "failed",
        }
    }
}

/// Config of a single sweep point, as it would be given on its own.
pub fn point_config(base: &PartialConfig, spec: &SweepSpec, value: f64) -> PartialConfig {
    let mut p = base.clone();
    p.task = Some(spec.inner);
    p.sweep = None;
    p.output.path = None;
    match spec.axis {
        SweepAxis::T => p.physics.t = Some(value),
        SweepAxis::N => p.physics.n = Some(value),
        SweepAxis::MAbs => p.physics.m_abs = Some(value),
        SweepAxis::Delta => p.physics.delta = Some(value),
    }
    p
}

pub fn point_file_name(index: usize, cfg: &RunConfig) -> String {
    format!("point_{index:03}.{}", cfg.output.format.extension())
}

/// Largest real pole in the configured real range and its first-order estimate.
fn slow_poles(cfg: &RunConfig) -> Result<(Option<f64>, Option<f64>), CliError> {
    let model = Model::build(&cfg.physics)?;
    let g = model.params.gamma;
    let r = Reservoir::new(model.params, model.modulation, model.band)?;
    let numeric = r
        .real_poles(cfg.grids.re_min * g, cfg.grids.re_max * g)?
        .into_iter()
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .map(|x| x / g);
    let first = r.kernel().first_moment().ok().map(|k1| slow_pole_firstorder(&model.params, k1.value).value / g);
    Ok((numeric, first))
}

fn run_point(base: &PartialConfig, spec: &SweepSpec, dir: &Path, index: usize, value: f64) -> PointResult {
    let mut res = PointResult {
        index,
        value,
        code: 0,
        fwhm: None,
        slow_pole: None,
        slow_pole_firstorder: None,
        artifact: String::new(),
        message: String::new(),
    };
    let outcome = (|| -> Result<(), CliError> {
        let cfg = point_config(base, spec, value).resolve()?;
        let name = point_file_name(index, &cfg);
        let art = render(&cfg)?;
        write_artifact(Some(&dir.join(&name)), &art.bytes)?;
        res.artifact = name;
        res.fwhm = art.fwhm;
        let (slow, first) = slow_poles(&cfg)?;
        res.slow_pole = slow;
        res.slow_pole_firstorder = first;
        Ok(())
    })();
    if let Err(e) = outcome {
        res.code = e.code;
        res.message = e.message;
    }
    res
}

/// Runs every point and writes `summary.csv`; returns the worst exit code.
pub fn run_sweep(base: &PartialConfig, cfg: &RunConfig) -> Result<(Vec<PointResult>, u8), CliError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::usage("missing sweep specification".into()))?;
    let dir = cfg.output.path.as_ref().ok_or_else(|| CliError::usage("sweep needs --out <directory>".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;

    let results: Vec<PointResult> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| run_point(base, spec, dir, i, v))
        .collect();

    let mut out = Vec::new();
    let io = |e: std::io::Error| CliError::numeric(format!("write failed: {e}"));
    writeln!(out, "# squeezed {VERSION}").map_err(io)?;
    let cfg_json = serde_json::to_string(cfg).map_err(|e| CliError::numeric(e.to_string()))?;
    writeln!(out, "# config: {cfg_json}").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    w.write_record([
        "index",
        spec.axis.name(),
        "status",
        "fwhm_over_gamma",
        "slow_pole_over_gamma",
        "slow_pole_firstorder_over_gamma",
        "artifact",
        "message",
    ])
    .map_err(|e| CliError::numeric(e.to_string()))?;
    for r in &results {
        w.write_record([
            r.index.to_string(),
            r.value.to_string(),
            r.status().to_string(),
            opt(r.fwhm),
            opt(r.slow_pole),
            opt(r.slow_pole_firstorder),
            r.artifact.clone(),
            r.message.clone(),
        ])
        .map_err(|e| CliError::numeric(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::numeric(e.to_string()))?;
    write_artifact(Some(&dir.join("summary.csv")), &bytes)?;
    let code = results.iter().map(|r| r.code).max().unwrap_or(0);
    Ok((results, code))
}
