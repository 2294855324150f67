use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use squeezed_cli::config::{parse_band, Band, Format, PartialConfig, PartialSweep, PhaseKind, SweepAxis, Task};
use squeezed_cli::run::{render, write_artifact};
use squeezed_cli::sweep::run_sweep;
use squeezed_cli::{CliError, EXIT_USAGE};

/// Squeezed-reservoir resonance fluorescence. Rates, frequencies, times and
/// bandwidths are in units of gamma.
#[derive(Parser, Debug)]
#[command(name = "squeezed", version)]
struct Args {
    /// Task to run (may also come from --task or the config file).
    #[arg(value_enum)]
    task_pos: Option<Task>,
    #[arg(long, value_enum)]
    task: Option<Task>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long = "M-abs")]
    m_abs: Option<f64>,
    #[arg(long = "M-phase", allow_negative_numbers = true)]
    m_phase: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    phase: Option<PhaseKind>,
    /// Modulation time scale.
    #[arg(long = "T")]
    t: Option<f64>,
    /// CSV of (omega, phi) knots for --phase table.
    #[arg(long)]
    table_file: Option<PathBuf>,
    /// Reservoir bandwidth, a number or "inf".
    #[arg(long, value_parser = parse_band)]
    bandwidth: Option<Band>,

    #[arg(long, allow_negative_numbers = true)]
    omega_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega_max: Option<f64>,
    #[arg(long)]
    omega_steps: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    re_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    re_max: Option<f64>,
    #[arg(long)]
    im_max: Option<f64>,

    /// Output file (directory for sweep). Standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,

    #[arg(long, value_enum)]
    axis: Option<SweepAxis>,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    /// Task run at every sweep point.
    #[arg(long, value_enum)]
    inner: Option<Task>,
}

impl Args {
    fn to_partial(&self) -> Result<PartialConfig, CliError> {
        let task = match (self.task_pos, self.task) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::usage(format!("conflicting tasks `{a}` and `{b}`")));
            }
            (a, b) => a.or(b),
        };
        let mut p = PartialConfig { task, ..Default::default() };
        let ph = &mut p.physics;
        ph.n = self.n;
        ph.m_abs = self.m_abs;
        ph.m_phase = self.m_phase;
        ph.delta = self.delta;
        ph.gamma = self.gamma;
        ph.phase = self.phase;
        ph.t = self.t;
        ph.table_file = self.table_file.clone();
        ph.bandwidth = self.bandwidth;
        let g = &mut p.grids;
        g.omega_min = self.omega_min;
        g.omega_max = self.omega_max;
        g.omega_steps = self.omega_steps;
        g.t_max = self.t_max;
        g.t_steps = self.t_steps;
        g.re_min = self.re_min;
        g.re_max = self.re_max;
        g.im_max = self.im_max;
        p.output.path = self.out.clone();
        p.output.format = self.format;
        if self.axis.is_some() || self.values.is_some() || self.inner.is_some() {
            p.sweep = Some(PartialSweep { axis: self.axis, values: self.values.clone(), inner: self.inner });
        }
        Ok(p)
    }
}

fn run(args: &Args) -> Result<u8, CliError> {
    let flags = args.to_partial()?;
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            PartialConfig::from_json(&text)?
        }
        None => PartialConfig::default(),
    };
    let merged = base.overlay(&flags);
    let cfg = merged.resolve()?;
    if cfg.task == Task::Sweep {
        let (results, code) = run_sweep(&merged, &cfg)?;
        for r in results.iter().filter(|r| r.code != 0) {
            eprintln!("squeezed: point {} ({} = {}): {}", r.index, cfg.sweep.as_ref().unwrap().axis.name(), r.value, r.message);
        }
        return Ok(code);
    }
    let art = render(&cfg)?;
    write_artifact(cfg.output.path.as_deref(), &art.bytes)?;
    Ok(0)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("squeezed: {e}");
            ExitCode::from(e.code)
        }
    }
}
