//! Exact boundary controls for the truncated linear system by the moment
//! method.
//!
//! Steering `(a, b)` to `(a^T, b^T)` in time `T` is equivalent to
//! `int_0^T u(t) e^{i omega t} dt = d(omega)` for every `omega = +-omega_n`,
//! where `d(omega_n) = [e^{i omega_n T}(b^T_n - i omega_n a^T_n) - (b_n - i omega_n a_n)] / phi_n'(l)`
//! and `d(-omega_n) = conj(d(omega_n))`. The least-`L^2` solution lies in the
//! span of `e^{-i omega_k t}`; its coefficients solve a Gram system.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fd::{simulate_linear, SimulationOptions};
use crate::linalg::{hermitian_condition, HermitianCholesky};
use crate::modal::{
    check_truncation, forced_evolution, norm_theta, pair_norm, ControlSignal, ModalState,
};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// Default Tikhonov parameter; the Gram matrix is shifted by `epsilon * T`.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Largest accepted condition estimate of the shifted Gram matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct MomentProblem<T> {
    /// `omega_1, -omega_1, omega_2, -omega_2, ...`
    pub omegas: Vec<T>,
    /// Right-hand sides in the same order.
    pub d: Vec<Complex<T>>,
    pub horizon: T,
    /// `phi_n'(l)`, `n = 1..N`.
    pub traces: Vec<T>,
}

impl<T: Real> MomentProblem<T> {
    pub fn n_modes(&self) -> usize {
        self.traces.len()
    }

    /// Closed-form Gram matrix `G_nk = int_0^T e^{i (w_n - w_k) t} dt`, row-major.
    pub fn gram(&self) -> Vec<Complex<T>> {
        let k = self.omegas.len();
        let mut g = vec![Complex::new(T::zero(), T::zero()); k * k];
        for i in 0..k {
            for j in 0..k {
                g[i * k + j] = gram_entry(self.omegas[i] - self.omegas[j], self.horizon);
            }
        }
        g
    }
}

fn gram_entry<T: Real>(dw: T, horizon: T) -> Complex<T> {
    if dw == T::zero() {
        return Complex::new(horizon, T::zero());
    }
    // (e^{i dw T} - 1) / (i dw) = (sin(dw T) + i (1 - cos(dw T))) / dw
    let (s, c) = (dw * horizon).sin_cos();
    Complex::new(s / dw, (T::one() - c) / dw)
}

/// Moment data for steering `init` to `target` on the first `N` modes.
pub fn build_moment_problem<T: Real>(
    init: &ModalState<T>,
    target: &ModalState<T>,
    spec: &Spectrum<T>,
    horizon: T,
) -> Result<MomentProblem<T>> {
    let n = init.n_modes();
    if target.n_modes() != n {
        return Err(Error::TruncationMismatch {
            state: target.n_modes(),
            spectrum: n,
        });
    }
    check_truncation(n, spec)?;
    if !(horizon > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let mut omegas = Vec::with_capacity(2 * n);
    let mut d = Vec::with_capacity(2 * n);
    let mut traces = Vec::with_capacity(n);
    for (i, p) in spec.pairs()[..n].iter().enumerate() {
        if p.dphi_l == T::zero() {
            return Err(Error::ZeroTrace { n: p.index });
        }
        let w = p.omega;
        let z0 = Complex::new(init.b[i], -w * init.a[i]);
        let z1 = Complex::new(target.b[i], -w * target.a[i]);
        let phase = Complex::new(T::zero(), w * horizon).exp();
        let dn = (phase * z1 - z0) / p.dphi_l;
        omegas.push(w);
        d.push(dn);
        omegas.push(-w);
        d.push(dn.conj());
        traces.push(p.dphi_l);
    }
    Ok(MomentProblem {
        omegas,
        d,
        horizon,
        traces,
    })
}

#[derive(Debug, Clone)]
pub struct MinNormControl<T> {
    /// `u(t) = Re sum beta_k e^{-i omega_k t}`.
    pub beta: Vec<Complex<T>>,
    pub omegas: Vec<T>,
    pub signal: ControlSignal<T>,
    /// `||G beta - d|| / ||d||` with the unshifted Gram matrix (0 when `d = 0`).
    pub residual: T,
    /// Condition estimate of the shifted Gram matrix.
    pub cond: T,
    /// Largest `|Im u(t_k)|` before taking the real part.
    pub max_imag: T,
}

impl<T: Real> MinNormControl<T> {
    /// `u(t)` from the exponential sum, at any time.
    pub fn value_at(&self, t: T) -> Complex<T> {
        self.beta
            .iter()
            .zip(&self.omegas)
            .map(|(b, w)| *b * Complex::new(T::zero(), -*w * t).exp())
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
    }
}

/// Least-norm control solving `(G + epsilon T I) beta = d`, sampled on
/// `samples` uniform nodes.
pub fn solve_min_norm<T: Real>(
    problem: &MomentProblem<T>,
    epsilon: T,
    samples: usize,
) -> Result<MinNormControl<T>> {
    let k = problem.omegas.len();
    let g = problem.gram();
    let mut shifted = g.clone();
    let shift = epsilon * problem.horizon;
    for i in 0..k {
        shifted[i * k + i] += Complex::new(shift, T::zero());
    }
    let cond = hermitian_condition(&shifted, k);
    if !(cond <= T::lit(MAX_CONDITION)) {
        return Err(Error::IllConditioned {
            cond: cond.to_f64_lossy(),
        });
    }
    let chol = HermitianCholesky::new(&shifted, k).ok_or(Error::IllConditioned {
        cond: f64::INFINITY,
    })?;
    let beta = chol.solve(&problem.d);
    let mut res2 = T::zero();
    let mut d2 = T::zero();
    for i in 0..k {
        let mut r = -problem.d[i];
        for j in 0..k {
            r += g[i * k + j] * beta[j];
        }
        res2 += r.norm_sqr();
        d2 += problem.d[i].norm_sqr();
    }
    let residual = if d2 > T::zero() {
        (res2 / d2).sqrt()
    } else {
        res2.sqrt()
    };
    let mut out = MinNormControl {
        beta,
        omegas: problem.omegas.clone(),
        signal: ControlSignal::zero(problem.horizon, samples.max(crate::modal::MIN_SAMPLES))?,
        residual,
        cond,
        max_imag: T::zero(),
    };
    let n_samples = out.signal.len();
    let dt = problem.horizon / T::from_count(n_samples - 1);
    let mut u = Vec::with_capacity(n_samples);
    let mut max_imag = T::zero();
    for j in 0..n_samples {
        let v = out.value_at(T::from_count(j) * dt);
        max_imag = max_imag.max(v.im.abs());
        u.push(v.re);
    }
    out.signal = ControlSignal::new(problem.horizon, u)?;
    out.max_imag = max_imag;
    Ok(out)
}

/// FD re-simulation settings for [`synthesize_and_verify`].
#[derive(Debug, Clone, Copy)]
pub struct FdCheck<'a, T> {
    /// Spectrum on the FD grid; its modes measure the final FD state.
    pub spectrum: &'a Spectrum<T>,
    pub dt: T,
}

#[derive(Debug, Clone, Copy)]
pub struct ControlOptions<'a, T> {
    pub samples: usize,
    pub epsilon: T,
    pub fd: Option<FdCheck<'a, T>>,
}

/// Relative FD final-state errors, split at the truncation index `N`.
#[derive(Debug, Clone, Copy)]
pub struct FdVerification<T> {
    /// All modes of the FD spectrum.
    pub total: T,
    /// Modes `1..=N`, the ones the control was built for.
    pub controlled: T,
    /// Modes beyond `N`: spillover into the unmodeled part.
    pub spillover: T,
}

#[derive(Debug, Clone)]
pub struct VerificationReport<T> {
    /// Final-state error in the `theta = 1/4` pair norm, relative to the
    /// initial data (to the target when the initial data vanish).
    pub final_error_modal: T,
    pub fd: Option<FdVerification<T>>,
    pub u_l2: T,
    pub u_h1: T,
    pub cond: T,
    pub residual: T,
    pub max_imag: T,
}

/// Synthesizes the least-norm control steering `init` to `target` and checks
/// it with the modal Duhamel solver and, optionally, the FD simulator.
pub fn synthesize_and_verify<T: Real>(
    init: &ModalState<T>,
    target: &ModalState<T>,
    spec: &Spectrum<T>,
    horizon: T,
    opts: ControlOptions<'_, T>,
) -> Result<(MinNormControl<T>, VerificationReport<T>)> {
    let problem = build_moment_problem(init, target, spec, horizon)?;
    let ctrl = solve_min_norm(&problem, opts.epsilon, opts.samples)?;
    let quarter = T::lit(0.25);
    let scale = {
        let s = pair_norm(init, spec, quarter)?;
        if s > T::zero() {
            s
        } else {
            pair_norm(target, spec, quarter)?.max(T::min_positive_value())
        }
    };
    let traj = forced_evolution(init, spec, &ctrl.signal)?;
    let final_error_modal = pair_norm(&traj.final_state().sub(target), spec, quarter)? / scale;

    let fd = match opts.fd {
        None => None,
        Some(check) => Some(fd_final_error(init, target, &ctrl.signal, check, scale)?),
    };
    let report = VerificationReport {
        final_error_modal,
        fd,
        u_l2: ctrl.signal.l2_norm(),
        u_h1: ctrl.signal.h1_seminorm(),
        cond: ctrl.cond,
        residual: ctrl.residual,
        max_imag: ctrl.max_imag,
    };
    Ok((ctrl, report))
}

fn fd_final_error<T: Real>(
    init: &ModalState<T>,
    target: &ModalState<T>,
    u: &ControlSignal<T>,
    check: FdCheck<'_, T>,
    scale: T,
) -> Result<FdVerification<T>> {
    let fd_spec = check.spectrum;
    check_truncation(init.n_modes(), fd_spec)?;
    let (y0, v0) = init.to_nodal(fd_spec)?;
    let sim = simulate_linear(fd_spec.coeffs(), &y0, &v0, u, SimulationOptions::new(check.dt))?;
    let all = fd_spec.len();
    let fin = ModalState::from_nodal(fd_spec, all, sim.final_position(), sim.final_velocity())?;
    let mut tgt = ModalState::zeros(all);
    tgt.a[..target.n_modes()].copy_from_slice(&target.a);
    tgt.b[..target.n_modes()].copy_from_slice(&target.b);
    let err = fin.sub(&tgt);
    split_error(&err, target.n_modes(), fd_spec, scale)
}

/// Splits a final-state error at mode `n` into relative `theta = 1/4` norms.
pub fn split_error<T: Real>(
    err: &ModalState<T>,
    n: usize,
    spec: &Spectrum<T>,
    scale: T,
) -> Result<FdVerification<T>> {
    let quarter = T::lit(0.25);
    let (a, b) = norm_theta(err, spec, quarter)?;
    let low = ModalState {
        a: err.a[..n].to_vec(),
        b: err.b[..n].to_vec(),
    };
    let (la, lb) = norm_theta(&low, spec, quarter)?;
    let total = a + b;
    let controlled = la + lb;
    Ok(FdVerification {
        total: total.sqrt() / scale,
        controlled: controlled.sqrt() / scale,
        spillover: (total - controlled).max(T::zero()).sqrt() / scale,
    })
}
