use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const CONSTANT: &str = "\
[coefficients]
l = pi
rho = 1
sigma = 1
q = 0
grid_m = 400

[discretization]
modes = 8
dt = 1e-4

[control]
horizon = 2
samples = 20001
trials = 20
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boussinesq"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn spectrum_reproduces_fourth_powers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANT);
    let out = dir.path().join("out");
    let o = run(&["spectrum", "--modes", "10", "--grid-m", "800"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,lambda,omega,dphi_l,tflux_l,sign_product"
    );
    for (n, line) in lines.enumerate() {
        let lambda: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let exact = ((n + 1) as f64).powi(4);
        assert!((lambda - exact).abs() <= 1e-3 * exact, "mode {}: {lambda}", n + 1);
    }
    assert!(out.join("eigenfunctions/phi_0010.csv").exists());
}

#[test]
fn missing_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONSTANT.replace("l = pi\n", ""));
    let o = run(&["spectrum"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[coefficients] l"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{CONSTANT}colour = red\n"));
    let o = run(&["spectrum"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
    let o = bin().arg("no-such-command").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANT);
    let out = dir.path().join("out");
    assert!(run(&["transform-check"], &cfg, &out).status.success());
    let o = run(&["transform-check"], &cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--force"));
    assert!(run(&["transform-check", "--force"], &cfg, &out).status.success());
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // 101 samples cannot resolve mode 8 over T = 2
    let cfg = write_config(dir.path(), &CONSTANT.replace("samples = 20001", "samples = 101"));
    let o = run(&["control"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn outputs_are_deterministic_and_listed_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["observe", "--seed", "3"], &cfg, out);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = |d: &Path| std::fs::read(d.join("observability.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["subcommand"], "observe");
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let bytes = std::fs::read(a.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn control_then_simulate_reaches_rest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANT);
    let ctl = dir.path().join("ctl");
    let o = run(&["control"], &cfg, &ctl);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(ctl.join("control.json")).unwrap()).unwrap();
    assert!(report["final_error_modal"].as_f64().unwrap() < 1e-6);
    assert!(report["residual"].as_f64().unwrap() < 1e-8);

    let sim = dir.path().join("sim");
    let control = ctl.join("control.csv");
    let o = run(&["simulate", "--control", control.to_str().unwrap()], &cfg, &sim);
    assert!(o.status.success(), "{}", stderr(&o));
    let fin = std::fs::read_to_string(sim.join("final_state.csv")).unwrap();
    for line in fin.lines().skip(1) {
        let v: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v[0].abs() < 1e-3 && v[1].abs() < 1e-2, "{line}");
    }
    let bin_len = std::fs::metadata(sim.join("snapshots.bin")).unwrap().len();
    // header plus 201 snapshots of t and 401 nodal values
    assert_eq!(bin_len, 24 + 201 * 402 * 8);
}

#[test]
fn nonlinear_sweep_and_verify_all() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSTANT);
    let out = dir.path().join("nl");
    let o = run(&["nonlinear", "--radius-sweep", "1e-2,1e-3", "--jobs", "2"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = std::fs::read_to_string(out.join("eps_00/iterations.csv")).unwrap();
    assert!(log.starts_with("k,distance,ratio,u_l2,u_h1\n"));

    let o = run(&["verify-all"], &cfg, &dir.path().join("v"));
    assert!(o.status.success(), "{}", stderr(&o));
}
