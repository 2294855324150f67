//! Single-task execution and artifact rendering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use squeezed_core::dynamics::slow_pole_firstorder;
use squeezed_core::spectrum::{fwhm, normalize_spectrum, uniform_grid};
use squeezed_core::{
    Complex64, MemoryKernel, PolarizationState, Region, Reservoir, SpectrumSeries, TimeGrid,
};

use crate::config::{ComputeConfig, Format, Model, RunConfig, Task};
use crate::{CliError, VERSION};

/// Rendered artifact plus the scalar results a sweep summary needs.
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub fwhm: Option<f64>,
}

#[derive(Serialize)]
struct JsonArtifact<'a> {
    squeezed_version: &'a str,
    config: ComputeConfig<'a>,
    notes: Value,
    data: Value,
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::numeric(format!("write failed: {e}"))
}

/// Runs a non-sweep task and renders its artifact.
pub fn render(cfg: &RunConfig) -> Result<Artifact, CliError> {
    let model = Model::build(&cfg.physics)?;
    let reservoir = Reservoir::new(model.params, model.modulation.clone(), model.band)?;
    let g = model.params.gamma;
    let grids = &cfg.grids;
    let mut notes = serde_json::Map::new();
    let rates = [g * (cfg.physics.n + 0.5 + cfg.physics.m_abs), model.params.delta.abs()];
    if let Some(w) = model.band.validity_warning(&rates) {
        notes.insert("warning".into(), Value::String(w));
    }
    let mut fwhm_value = None;

    // (csv body, json data)
    let (body, data): (Vec<u8>, Value) = match cfg.task {
        Task::Kernel => {
            let kernel = reservoir.kernel();
            if kernel.is_delta() {
                return Err(CliError::usage(
                    "the broadband Markov kernel is a delta function; use a finite --bandwidth".into(),
                ));
            }
            kernel_samples(kernel, g, grids.t_max, grids.t_steps)?
        }
        Task::Poles => {
            let region = Region::new(grids.re_min * g, grids.re_max * g, -grids.im_max * g, grids.im_max * g)?;
            let set = reservoir.complex_poles(region)?;
            notes.insert("modulation_note".into(), serde_json::to_value(set.modulation_note).map_err(io)?);
            if let Ok(k1) = reservoir.kernel().first_moment() {
                let slow = slow_pole_firstorder(&model.params, k1.value);
                notes.insert("slow_pole_firstorder_over_gamma".into(), json!(slow.value / g));
                notes.insert("slow_pole_precondition_ok".into(), json!(slow.precondition_ok));
            }
            let mut body = Vec::new();
            set.write_csv(&mut body, g)?;
            let complex: Vec<[f64; 2]> = set.complex_poles.iter().map(|z| [z.re / g, z.im / g]).collect();
            let real: Vec<f64> = set.real_poles.iter().map(|x| x / g).collect();
            (body, json!({ "real_over_gamma": real, "complex_over_gamma": complex }))
        }
        Task::Spectrum => {
            let grid: Vec<f64> =
                uniform_grid(grids.omega_min, grids.omega_max, grids.omega_steps).iter().map(|w| w * g).collect();
            let series = reservoir.spectrum(&grid)?;
            match fwhm(&series) {
                Ok(w) => {
                    fwhm_value = Some(w / g);
                    notes.insert("fwhm_over_gamma".into(), json!(w / g));
                }
                Err(e) => {
                    notes.insert("fwhm_over_gamma".into(), Value::Null);
                    notes.insert("fwhm_error".into(), Value::String(e.to_string()));
                }
            }
            spectrum_artifact(&series, g)?
        }
        Task::Evolve => {
            let grid = TimeGrid::new(grids.t_max / g, grids.t_steps)?;
            let [a, b] = grids.init_sigma_minus;
            let [c, d] = grids.init_sigma_plus;
            let init = PolarizationState::new(Complex64::new(a, b), Complex64::new(c, d));
            let ts = reservoir.evolve(init, grid)?;
            notes.insert("step_gamma".into(), json!(grid.step() * g));
            let mut body = Vec::new();
            ts.write_csv(&mut body, g)?;
            let col = |f: &dyn Fn(&PolarizationState) -> f64| ts.states.iter().map(f).collect::<Vec<f64>>();
            let data = json!({
                "t_gamma": ts.times.iter().map(|t| t * g).collect::<Vec<f64>>(),
                "re_sm": col(&|s| s.sigma_minus.re),
                "im_sm": col(&|s| s.sigma_minus.im),
                "re_sp": col(&|s| s.sigma_plus.re),
                "im_sp": col(&|s| s.sigma_plus.im),
            });
            (body, data)
        }
        Task::Sweep => return Err(CliError::usage("sweep is not a single task".into())),
    };

    let compute = ComputeConfig { task: cfg.task, physics: &cfg.physics, grids: &cfg.grids };
    let bytes = match cfg.output.format {
        Format::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# squeezed {VERSION}").map_err(io)?;
            writeln!(out, "# config: {}", serde_json::to_string(&compute).map_err(io)?).map_err(io)?;
            for (k, v) in &notes {
                writeln!(out, "# {k}: {}", v.to_string().trim_matches('"')).map_err(io)?;
            }
            out.extend_from_slice(&body);
            out
        }
        Format::Json => {
            let doc = JsonArtifact { squeezed_version: VERSION, config: compute, notes: Value::Object(notes), data };
            let mut out = serde_json::to_vec_pretty(&doc).map_err(io)?;
            out.push(b'\n');
            out
        }
    };
    Ok(Artifact { bytes, fwhm: fwhm_value })
}

fn kernel_samples(kernel: &MemoryKernel, g: f64, t_max: f64, steps: usize) -> Result<(Vec<u8>, Value), CliError> {
    let ts = uniform_grid(0.0, t_max, steps + 1);
    let mut re = Vec::with_capacity(ts.len());
    let mut im = Vec::with_capacity(ts.len());
    let mut w = csv_writer();
    w.write_record(["t_gamma", "re_k_over_gamma", "im_k_over_gamma"]).map_err(io)?;
    for &t in &ts {
        let k = kernel.time(t / g)?.value / g;
        re.push(k.re);
        im.push(k.im);
        w.write_record([t.to_string(), k.re.to_string(), k.im.to_string()]).map_err(io)?;
    }
    let body = w.into_inner().map_err(io)?;
    Ok((body, json!({ "t_gamma": ts, "re_k_over_gamma": re, "im_k_over_gamma": im })))
}

fn spectrum_artifact(series: &SpectrumSeries, g: f64) -> Result<(Vec<u8>, Value), CliError> {
    let mut body = Vec::new();
    series.write_csv(&mut body, g)?;
    let normalized = normalize_spectrum(series)?;
    let data = json!({
        "omega_over_gamma": series.omega_grid.iter().map(|w| w / g).collect::<Vec<f64>>(),
        "S": series.values,
        "S_normalized": normalized.values,
    });
    Ok((body, data))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

pub fn write_artifact(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(io),
    }
}
