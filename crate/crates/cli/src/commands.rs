use std::f64::consts::PI;
use std::path::PathBuf;

use boussinesq_core::control::{synthesize_and_verify, ControlOptions, FdCheck};
use boussinesq_core::fd::{simulate_linear, simulate_nonlinear, SimulationOptions};
use boussinesq_core::io;
use boussinesq_core::modal::{
    duality_balance, forced_evolution, ControlSignal, ModalState,
};
use boussinesq_core::nonlinear::{fixed_point_iterate, verify_fd, FixedPointOptions};
use boussinesq_core::observability::{haraux_hypothesis_check, observability_ratio};
use boussinesq_core::spectral::{
    check_asymptotics, check_sign_condition, check_trace_asymptote, leighton_nehari_transform,
    max_modes, solve_spectrum, Anchor,
};
use boussinesq_core::{CoefficientSetF64, SpectrumF64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::CliError;
use crate::output::OutputDir;

/// Subcommand-specific flags that are not config overrides.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub nonlinear: bool,
    pub control_file: Option<PathBuf>,
    pub jobs: usize,
}

/// What a subcommand produced. `failure` marks a numerical failure that is
/// reported after all outputs and the manifest have been written.
pub struct Outcome {
    pub summary: Value,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Self {
            summary,
            failure: None,
        }
    }
}

fn status<T, E: std::fmt::Display>(r: &Result<T, E>) -> Value {
    match r {
        Ok(_) => json!({ "pass": true }),
        Err(e) => json!({ "pass": false, "error": e.to_string() }),
    }
}

/// Too few modes is reported as a skipped check, not a failure.
fn failed_check(e: &boussinesq_core::Error) -> Value {
    match e {
        boussinesq_core::Error::InvalidArgument(msg) => json!({ "skipped": msg }),
        e => json!({ "pass": false, "error": e.to_string() }),
    }
}

/// Spectrum with all modes the grid supports, for FD measurements.
fn fd_spectrum(coeffs: &CoefficientSetF64) -> Result<SpectrumF64, CliError> {
    Ok(solve_spectrum(coeffs, max_modes(coeffs.grid().intervals()))?)
}

pub fn spectrum(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let spec = solve_spectrum(&coeffs, cfg.modes)?;
    out.write("spectrum.csv", |w| Ok(io::write_spectrum(w, &spec)?))?;
    for n in 1..=spec.len() {
        out.write(&format!("eigenfunctions/phi_{n:04}.csv"), |w| {
            Ok(io::write_eigenfunction(w, &spec, n)?)
        })?;
    }
    let sign = check_sign_condition(&spec);
    let asym = check_asymptotics(&spec);
    let trace = check_trace_asymptote(&spec);
    let summary = json!({
        "n_modes": spec.len(),
        "gamma": spec.gamma,
        "zeta_l": spec.zeta_l,
        "zeta_norm": spec.zeta_norm,
        "sign_condition": status(&sign),
        "asymptotics": match &asym {
            Ok(r) => json!({ "pass": true, "c_fit": r.c_fit, "beta": r.beta }),
            Err(e) => failed_check(e),
        },
        "trace_asymptote": match &trace {
            Ok(r) => json!({ "pass": true, "limit": r.limit, "tail": r.tail }),
            Err(e) => failed_check(e),
        },
    });
    out.write_json("spectrum.json", &summary)?;
    Ok(Outcome::ok(summary))
}

pub fn transform_check(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let t = leighton_nehari_transform(&coeffs, Anchor::Left)?;
    out.write("transform.csv", |w| Ok(io::write_transform(w, &t)?))?;
    let end = t.s.last().copied().unwrap_or(0.0);
    let summary = json!({
        "strictly_increasing": t.is_strictly_increasing(),
        "s_l_minus_l": end - cfg.l,
        "identity_defect": t.identity_defect(),
        "h_min": t.h.iter().copied().fold(f64::INFINITY, f64::min),
        "h_max": t.h.iter().copied().fold(0.0, f64::max),
    });
    out.write_json("transform.json", &summary)?;
    Ok(Outcome::ok(summary))
}

pub fn simulate(cfg: &Config, extras: &Extras, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let spec = solve_spectrum(&coeffs, cfg.modes)?;
    let init = cfg.init.build(cfg.modes)?;
    let (y0, v0) = init.to_nodal(&spec)?;
    let u = match &extras.control_file {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| {
                CliError::Invalid(format!("cannot open control file {}: {e}", path.display()))
            })?;
            io::read_control(file)?
        }
        None => ControlSignal::zero(cfg.horizon, cfg.samples)?,
    };
    let opts = SimulationOptions::new(cfg.dt).with_snapshots(cfg.snapshot_every);
    let sim = if extras.nonlinear {
        simulate_nonlinear(&coeffs, &y0, &v0, &u, opts)?
    } else {
        simulate_linear(&coeffs, &y0, &v0, &u, opts)?
    };
    out.write("snapshots.csv", |w| Ok(io::write_snapshots(w, &sim)?))?;
    out.write("snapshots.bin", |w| Ok(io::write_snapshots_binary(w, &sim)?))?;
    out.write("trace.csv", |w| Ok(io::write_fd_trace(w, &sim)?))?;
    let fin = ModalState::from_nodal(&spec, cfg.modes, sim.final_position(), sim.final_velocity())?;
    out.write("final_state.csv", |w| Ok(io::write_state(w, &fin)?))?;
    let e0 = sim.energy[0];
    let drift = sim
        .energy
        .iter()
        .map(|e| (e - e0).abs())
        .fold(0.0, f64::max);
    let summary = json!({
        "model": if extras.nonlinear { "nonlinear" } else { "linear" },
        "dt": sim.dt,
        "steps": sim.step_t.len() - 1,
        "horizon": u.horizon(),
        "energy_initial": e0,
        "energy_final": sim.energy.last().copied().unwrap_or(e0),
        // quadratic energy; not conserved under control or the nonlinear term
        "max_energy_drift": drift,
        "sup_norm": sim.sup_norm(),
    });
    out.write_json("simulate.json", &summary)?;
    Ok(Outcome::ok(summary))
}

pub fn observe(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let spec = solve_spectrum(&coeffs, cfg.modes)?;
    let r = observability_ratio(&spec, cfg.horizon, cfg.trials, cfg.seed)?;
    out.write("observability.csv", |w| Ok(io::write_observability(w, &r)?))?;
    let gap_modes = max_modes(cfg.grid_m).min(40).max(cfg.modes);
    let haraux = solve_spectrum(&coeffs, gap_modes)
        .map_err(CliError::from)
        .and_then(|s| Ok(haraux_hypothesis_check(&s, &[cfg.horizon])?));
    let summary = json!({
        "c_min": r.c_min,
        "c_max": r.c_max,
        "T": r.horizon,
        "n_modes": r.n_modes,
        "seed": r.seed,
        "samples": r.samples,
        "haraux": match &haraux {
            Ok(h) => json!({
                "beta": h.beta,
                "N": h.windows[0].n,
                "pi_over_T": h.windows[0].required,
                "achieved_gap": h.windows[0].achieved,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        },
    });
    out.write_json("observability.json", &summary)?;
    Ok(Outcome::ok(summary))
}

pub fn control(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let fd_spec = if cfg.fd_check {
        Some(fd_spectrum(&coeffs)?)
    } else {
        None
    };
    let spec = match &fd_spec {
        Some(s) => s.truncated(cfg.modes)?,
        None => solve_spectrum(&coeffs, cfg.modes)?,
    };
    let init = cfg.init.build(cfg.modes)?;
    let target = cfg.target.build(cfg.modes)?;
    let opts = ControlOptions {
        samples: cfg.samples,
        epsilon: cfg.epsilon,
        fd: fd_spec.as_ref().map(|s| FdCheck {
            spectrum: s,
            dt: cfg.dt,
        }),
    };
    let (ctrl, report) = synthesize_and_verify(&init, &target, &spec, cfg.horizon, opts)?;
    out.write("control.csv", |w| Ok(io::write_control(w, &ctrl.signal)?))?;
    let traj = forced_evolution(&init, &spec, &ctrl.signal)?;
    out.write("modal_trace.csv", |w| Ok(io::write_modal_trace(w, &traj)?))?;
    out.write("final_state.csv", |w| Ok(io::write_state(w, &traj.final_state())?))?;
    let summary = json!({
        "final_error_modal": report.final_error_modal,
        "final_error_fd": report.fd.map(|f| f.total),
        "final_error_fd_controlled_modes": report.fd.map(|f| f.controlled),
        "final_error_fd_spillover": report.fd.map(|f| f.spillover),
        "u_l2": report.u_l2,
        "u_h1": report.u_h1,
        "cond_estimate": report.cond,
        "residual": report.residual,
        "max_imag": report.max_imag,
    });
    out.write_json("control.json", &summary)?;
    Ok(Outcome::ok(summary))
}

pub fn nonlinear(cfg: &Config, extras: &Extras, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let fd_spec = if cfg.fd_check {
        Some(fd_spectrum(&coeffs)?)
    } else {
        None
    };
    let spec = match &fd_spec {
        Some(s) => s.truncated(cfg.modes)?,
        None => solve_spectrum(&coeffs, cfg.modes)?,
    };
    let init = cfg.init.build(cfg.modes)?;
    let target = cfg.target.build(cfg.modes)?;
    let opts = FixedPointOptions {
        samples: cfg.samples,
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
        tol: cfg.tol,
    };
    let run = |eps: f64| {
        let (i, t) = (init.scaled(eps), target.scaled(eps));
        let r = fixed_point_iterate(&i, &t, &spec, cfg.horizon, opts)?;
        let fd = match &fd_spec {
            Some(s) => Some(verify_fd(&i, &t, &r, s, cfg.dt)?),
            None => None,
        };
        Ok::<_, boussinesq_core::Error>((r, fd))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(extras.jobs.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| cfg.radius_sweep.par_iter().map(|&e| run(e)).collect());

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (idx, (eps, res)) in cfg.radius_sweep.iter().zip(results).enumerate() {
        match res {
            Ok((r, fd)) => {
                let dir = format!("eps_{idx:02}");
                out.write(&format!("{dir}/iterations.csv"), |w| {
                    Ok(io::write_iteration_log(w, &r.log)?)
                })?;
                out.write(&format!("{dir}/control.csv"), |w| {
                    Ok(io::write_control(w, &r.control.signal)?)
                })?;
                let max_ratio = r.log.iter().filter_map(|l| l.ratio).fold(0.0, f64::max);
                entries.push(json!({
                    "epsilon": eps,
                    "dir": dir,
                    "converged": true,
                    "iterations": r.iterations(),
                    "max_ratio": max_ratio,
                    "u_l2": r.control.signal.l2_norm(),
                    "u_h1": r.control.signal.h1_seminorm(),
                    "final_error_fd": fd.map(|f| f.total),
                    "final_error_fd_controlled_modes": fd.map(|f| f.controlled),
                }));
            }
            Err(e) => {
                failures.push(format!("epsilon {eps}: {e}"));
                entries.push(json!({ "epsilon": eps, "converged": false, "error": e.to_string() }));
            }
        }
    }
    let summary = json!({ "sweep": entries });
    out.write_json("nonlinear.json", &summary)?;
    Ok(Outcome {
        summary,
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

/// Smooth test control vanishing to second order at both ends.
fn test_signal(rng: &mut ChaCha8Rng, horizon: f64, samples: usize) -> Result<ControlSignal<f64>, CliError> {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..8.0),
                rng.random_range(0.0..PI),
            )
        })
        .collect();
    Ok(ControlSignal::from_fn(horizon, samples, move |t| {
        let envelope = (PI * t / horizon).sin().powi(2);
        envelope * terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum::<f64>()
    })?)
}

pub fn verify_all(cfg: &Config, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let coeffs = cfg.coefficients()?;
    let cap = max_modes(cfg.grid_m);
    let wide = solve_spectrum(&coeffs, cap.min(cfg.modes.max(20)))?;
    let spec = wide.truncated(cfg.modes)?;
    let mut suites: Vec<(String, bool, String)> = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        suites.push((name.to_string(), pass, detail));
    };

    let sign = check_sign_condition(&wide);
    push("sign_condition", sign.is_ok(), format!("{} modes", wide.len()));
    match check_asymptotics(&wide) {
        Ok(r) => push("asymptotics", true, format!("C_fit {:.3e}, beta {:.3e}", r.c_fit, r.beta)),
        Err(e) => push("asymptotics", false, e.to_string()),
    }
    match check_trace_asymptote(&wide) {
        Ok(r) => push("trace_asymptote", true, format!("limit {:.6}", r.limit)),
        Err(e) => push("trace_asymptote", false, e.to_string()),
    }
    match haraux_hypothesis_check(&wide, &[cfg.horizon]) {
        Ok(h) => push("haraux", true, format!("N = {} at T = {}", h.windows[0].n, cfg.horizon)),
        Err(e) => push("haraux", false, e.to_string()),
    }

    let t = leighton_nehari_transform(&coeffs, Anchor::Left)?;
    let end = (t.s.last().copied().unwrap_or(0.0) - cfg.l).abs();
    push(
        "transform",
        t.is_strictly_increasing() && end <= 1e-10 && t.h.iter().all(|h| *h > 0.0),
        format!("|s(l) - l| = {end:.2e}"),
    );

    let obs = observability_ratio(&spec, cfg.horizon, cfg.trials.max(20), cfg.seed)?;
    push(
        "observability",
        obs.c_min > 0.0 && obs.c_max.is_finite(),
        format!("c_min {:.4e}, c_max {:.4e}", obs.c_min, obs.c_max),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = cfg.init.build(cfg.modes)?;
    let u = test_signal(&mut rng, cfg.horizon, cfg.samples)?;
    let traj = forced_evolution(&init, &spec, &u)?;
    let mut worst: f64 = 0.0;
    for n in 1..=cfg.modes {
        let (a, b) = traj.mode_series(n);
        let p = spec.mode(n);
        let (lhs, rhs) = duality_balance(p.omega, p.dphi_l, &a, &b, &u);
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE));
    }
    push("duality", worst <= 1e-6, format!("max relative imbalance {worst:.2e}"));

    let target = cfg.target.build(cfg.modes)?;
    let opts = ControlOptions {
        samples: cfg.samples,
        epsilon: cfg.epsilon,
        fd: None,
    };
    match synthesize_and_verify(&init, &target, &spec, cfg.horizon, opts) {
        Ok((_, r)) => push(
            "control",
            r.final_error_modal <= 1e-6 && r.residual <= 1e-8,
            format!("modal error {:.2e}, residual {:.2e}", r.final_error_modal, r.residual),
        ),
        Err(e) => push("control", false, e.to_string()),
    }

    // modal and FD trajectories under a control with a smooth envelope
    let (y0, v0) = init.to_nodal(&spec)?;
    let sim = simulate_linear(&coeffs, &y0, &v0, &u, SimulationOptions::new(cfg.dt).with_snapshots(10))?;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, tk) in sim.t.iter().enumerate() {
        let (ym, _) = traj.state((tk / u.dt()).round() as usize).to_nodal(&spec)?;
        for (a, b) in ym.iter().zip(&sim.y[k]) {
            num += (a - b) * (a - b);
            den += b * b;
        }
    }
    let cross = (num / den.max(f64::MIN_POSITIVE)).sqrt();
    push("cross_oracle", cross <= 1e-3, format!("relative L2 difference {cross:.2e}"));

    let failed: Vec<String> = suites
        .iter()
        .filter(|s| !s.1)
        .map(|s| format!("{}: {}", s.0, s.2))
        .collect();
    let summary = json!({
        "suites": suites
            .iter()
            .map(|(n, p, d)| json!({ "name": n, "pass": p, "detail": d }))
            .collect::<Vec<_>>(),
    });
    out.write_json("verify.json", &summary)?;
    Ok(Outcome {
        summary,
        failure: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}
