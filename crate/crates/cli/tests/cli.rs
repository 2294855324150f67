use std::path::Path;
use std::process::{Command, Output};

use squeezed_cli::config::{PartialConfig, Task};

fn squeezed(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezed")).args(args).current_dir(cwd).output().unwrap()
}

#[test]
fn spectrum_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--N", "1", "--M-abs", "1", "--phase", "linear", "--T", "1", "--omega-steps", "51"];
    let a = squeezed(&args, dir.path());
    let b = squeezed(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unphysical_squeezing_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezed(&["spectrum", "--N", "1", "--M-abs", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("|M|^2 > N(N+1)"));
}

#[test]
fn bad_flags_and_missing_task_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(squeezed(&["--N", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(squeezed(&["spectrum", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(squeezed(&["spectrum", "--task", "poles"], dir.path()).status.code(), Some(2));
    // Markov kernel has no time-domain samples.
    assert_eq!(squeezed(&["kernel", "--bandwidth", "inf"], dir.path()).status.code(), Some(2));
}

#[test]
fn markov_poles_are_reported_in_gamma_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezed(&["poles", "--N", "1", "--M-abs", "1", "--gamma", "2", "--bandwidth", "inf"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let real: Vec<f64> = text
        .lines()
        .filter(|l| l.ends_with(",real"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(real.len(), 2, "{text}");
    assert!(real.iter().any(|x| (x + 0.5).abs() < 1e-10));
    assert!(real.iter().any(|x| (x + 2.5).abs() < 1e-10));
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"task": "spectrum", "physics": {"N": 1, "M_abs": 0.5, "phase": "quadratic", "T": 2, "bandwidth": "inf"},
                 "grids": {"omega_steps": 41}}"#;
    std::fs::write(dir.path().join("c.json"), cfg).unwrap();
    let from_file = squeezed(&["--config", "c.json"], dir.path());
    let from_flags = squeezed(
        &["spectrum", "--N", "1", "--M-abs", "0.5", "--phase", "quadratic", "--T", "2", "--bandwidth", "inf", "--omega-steps", "41"],
        dir.path(),
    );
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(from_file.stdout, from_flags.stdout);
    // Flags override the file.
    let over = squeezed(&["--config", "c.json", "--T", "1"], dir.path());
    assert_ne!(over.stdout, from_file.stdout);
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(PartialConfig::from_json(r#"{"physics": {"n": 1}}"#).is_err());
    assert!(PartialConfig::from_json(r#"{"phsyics": {}}"#).is_err());
}

#[test]
fn resolved_config_round_trips_through_json() {
    let p = PartialConfig::from_json(
        r#"{"task": "sweep", "physics": {"N": 2, "M_abs": 1, "phase": "linear", "T": 0.5, "bandwidth": 300},
            "output": {"path": "out", "format": "json"}, "sweep": {"axis": "T", "values": [0.5, 1, 2]}}"#,
    )
    .unwrap();
    let cfg = p.resolve().unwrap();
    assert_eq!(cfg.sweep.as_ref().unwrap().inner, Task::Spectrum);
    let text = serde_json::to_string(&cfg).unwrap();
    let back = PartialConfig::from_json(&text).unwrap().resolve().unwrap();
    assert_eq!(back, cfg);
    let inf = PartialConfig::from_json(r#"{"task": "poles", "physics": {"bandwidth": "inf"}}"#).unwrap().resolve().unwrap();
    let again = PartialConfig::from_json(&serde_json::to_string(&inf).unwrap()).unwrap().resolve().unwrap();
    assert_eq!(again, inf);
}

#[test]
fn sweep_points_match_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--N", "1", "--M-abs", "1", "--phase", "quadratic", "--bandwidth", "inf", "--omega-steps", "61"];
    let mut args = vec!["sweep", "--axis", "T", "--values", "0.5,1", "--out", "sw"];
    args.extend_from_slice(&common);
    let out = squeezed(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (i, t) in ["0.5", "1"].iter().enumerate() {
        let mut single = vec!["spectrum", "--T", t];
        single.extend_from_slice(&common);
        let one = squeezed(&single, dir.path());
        let point = std::fs::read(dir.path().join(format!("sw/point_{i:03}.csv"))).unwrap();
        assert_eq!(point, one.stdout, "point {i}");
    }
    let summary = std::fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "index,T,status,fwhm_over_gamma,slow_pole_over_gamma,slow_pole_firstorder_over_gamma,artifact,message");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0,0.5,ok,"));
}

#[test]
fn sweep_reports_invalid_points_and_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezed(
        &["sweep", "--axis", "M_abs", "--values", "0.5,3", "--N", "1", "--out", "sw", "--omega-steps", "21", "--bandwidth", "inf"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap();
    assert!(summary.contains("0,0.5,ok,"));
    assert!(summary.contains("1,3,invalid,"));
    assert!(dir.path().join("sw/point_000.csv").exists());
}
