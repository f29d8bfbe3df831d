//! States in the eigenbasis and their evolution under boundary control.
//!
//! With `y = sum a_n phi_n` and the control acting through
//! `sigma(l) y_xx(t, l) = u(t)`, integration by parts against `phi_n` gives
//!
//! ```text
//! a_n'' + lambda_n a_n = phi_n'(l) u(t) + f_n(t)
//! ```
//!
//! where `f_n` collects any distributed forcing. Equivalently, for every mode
//! `[(b_n - i omega_n a_n) e^{i omega_n t}]_0^T = phi_n'(l) int_0^T u e^{i omega_n t} dt`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// Minimum number of samples of a [`ControlSignal`].
pub const MIN_SAMPLES: usize = 64;

/// Largest admissible `omega_n * dt` for the Duhamel quadrature.
pub const MAX_OMEGA_DT: f64 = 0.5;

/// Position and velocity coefficients: `y = sum a_n phi_n`, `y_t = sum b_n phi_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> ModalState<T> {
    pub fn new(a: Vec<T>, b: Vec<T>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite modal coefficient".into()));
        }
        Ok(Self { a, b })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![T::zero(); n],
            b: vec![T::zero(); n],
        }
    }

    /// `amplitude * phi_k` at rest (1-based `k`).
    pub fn single_mode(n: usize, k: usize, amplitude: T) -> Self {
        let mut s = Self::zeros(n);
        s.a[k - 1] = amplitude;
        s
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    /// Projects nodal position and velocity fields onto the first `n` modes.
    pub fn from_nodal(spec: &Spectrum<T>, n: usize, y: &[T], v: &[T]) -> Result<Self> {
        check_truncation(n, spec)?;
        let mut a = spec.project(y);
        let mut b = spec.project(v);
        a.truncate(n);
        b.truncate(n);
        Ok(Self { a, b })
    }

    /// Nodal position and velocity on the spectrum's grid.
    pub fn to_nodal(&self, spec: &Spectrum<T>) -> Result<(Vec<T>, Vec<T>)> {
        check_truncation(self.n_modes(), spec)?;
        Ok((spec.synthesize(&self.a), spec.synthesize(&self.b)))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            a: self.a.iter().map(|v| *v * s).collect(),
            b: self.b.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            a: self.a.iter().zip(&other.a).map(|(x, y)| *x - *y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| *x - *y).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            a: self.a.iter().zip(&other.a).map(|(x, y)| *x + *y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| *x + *y).collect(),
        }
    }
}

pub(crate) fn check_truncation<T: Real>(n: usize, spec: &Spectrum<T>) -> Result<()> {
    if n > spec.len() {
        return Err(Error::TruncationMismatch {
            state: n,
            spectrum: spec.len(),
        });
    }
    Ok(())
}

/// A real control sampled on a uniform grid over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal<T> {
    horizon: T,
    u: Vec<T>,
}

impl<T: Real> ControlSignal<T> {
    /// `u[k]` is the value at `t_k = k T / (len - 1)`.
    pub fn new(horizon: T, u: Vec<T>) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "control horizon must be positive, got {horizon}"
            )));
        }
        if u.len() < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "control needs at least {MIN_SAMPLES} samples, got {}",
                u.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite control sample".into()));
        }
        Ok(Self { horizon, u })
    }

    pub fn zero(horizon: T, samples: usize) -> Result<Self> {
        Self::new(horizon, vec![T::zero(); samples])
    }

    pub fn from_fn(horizon: T, samples: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let dt = horizon / T::from_count(samples.max(2) - 1);
        Self::new(
            horizon,
            (0..samples).map(|k| f(T::from_count(k) * dt)).collect(),
        )
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_count(self.u.len() - 1)
    }

    pub fn time(&self, k: usize) -> T {
        T::from_count(k) * self.dt()
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn samples(&self) -> &[T] {
        &self.u
    }

    /// Piecewise-linear interpolant, clamped to `[0, T]`.
    pub fn value_at(&self, t: T) -> T {
        let dt = self.dt();
        let s = (t / dt).max(T::zero());
        let k = s.floor().to_usize().unwrap_or(0);
        if k + 1 >= self.u.len() {
            return *self.u.last().expect("non-empty");
        }
        let f = s - T::from_count(k);
        self.u[k] * (T::one() - f) + self.u[k + 1] * f
    }

    /// Trapezoid `L^2(0, T)` norm.
    pub fn l2_norm(&self) -> T {
        let sq: Vec<T> = self.u.iter().map(|v| *v * *v).collect();
        trapezoid(&sq, self.dt()).sqrt()
    }

    /// Discrete `H^1` seminorm `(sum (u_{k+1} - u_k)^2 / dt)^{1/2}`.
    pub fn h1_seminorm(&self) -> T {
        let dt = self.dt();
        self.u
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]) / dt)
            .sum::<T>()
            .sqrt()
    }

    /// Same signal on a finer grid with `samples` points (linear interpolation).
    pub fn resampled(&self, samples: usize) -> Result<Self> {
        Self::from_fn(self.horizon, samples, |t| self.value_at(t))
    }
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid<T: Real>(f: &[T], dt: T) -> T {
    if f.len() < 2 {
        return T::zero();
    }
    let inner: T = f[1..f.len() - 1].iter().copied().sum();
    dt * (inner + T::lit(0.5) * (f[0] + f[f.len() - 1]))
}

/// `(sum lambda_n^{2 theta} a_n^2, sum lambda_n^{2 theta - 1} b_n^2)`.
pub fn norm_theta<T: Real>(state: &ModalState<T>, spec: &Spectrum<T>, theta: T) -> Result<(T, T)> {
    check_truncation(state.n_modes(), spec)?;
    let two = T::lit(2.0);
    let mut na = T::zero();
    let mut nb = T::zero();
    for ((a, b), p) in state.a.iter().zip(&state.b).zip(spec.pairs()) {
        na += p.lambda.powf(two * theta) * *a * *a;
        nb += p.lambda.powf(two * theta - T::one()) * *b * *b;
    }
    Ok((na, nb))
}

/// Sum of both slots of [`norm_theta`], square-rooted.
pub fn pair_norm<T: Real>(state: &ModalState<T>, spec: &Spectrum<T>, theta: T) -> Result<T> {
    let (a, b) = norm_theta(state, spec, theta)?;
    Ok((a + b).sqrt())
}

/// `sum (lambda_n a_n^2 + b_n^2)`, invariant under free evolution.
pub fn modal_energy<T: Real>(state: &ModalState<T>, spec: &Spectrum<T>) -> Result<T> {
    let (a, b) = norm_theta(state, spec, T::lit(0.5))?;
    Ok(a + b)
}

/// Exact harmonic rotation of every mode over time `t`.
pub fn free_evolution<T: Real>(
    state0: &ModalState<T>,
    spec: &Spectrum<T>,
    t: T,
) -> Result<ModalState<T>> {
    check_truncation(state0.n_modes(), spec)?;
    let mut out = state0.clone();
    for (k, p) in spec.pairs().iter().take(state0.n_modes()).enumerate() {
        let (s, c) = (p.omega * t).sin_cos();
        let (a, b) = (state0.a[k], state0.b[k]);
        out.a[k] = a * c + b / p.omega * s;
        out.b[k] = -a * p.omega * s + b * c;
    }
    Ok(out)
}

/// Modal coefficients at every node of a time grid plus the boundary slope
/// `y_x(t, l) = sum a_n(t) phi_n'(l)`.
#[derive(Debug, Clone)]
pub struct ModalTrajectory<T> {
    pub t: Vec<T>,
    /// `a[k][n]`: mode `n` at time `t[k]`.
    pub a: Vec<Vec<T>>,
    pub b: Vec<Vec<T>>,
    pub trace: Vec<T>,
}

impl<T: Real> ModalTrajectory<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, k: usize) -> ModalState<T> {
        ModalState {
            a: self.a[k].clone(),
            b: self.b[k].clone(),
        }
    }

    pub fn final_state(&self) -> ModalState<T> {
        self.state(self.len() - 1)
    }

    /// Time series of mode `n` (1-based): `(a_n(t_k), b_n(t_k))`.
    pub fn mode_series(&self, n: usize) -> (Vec<T>, Vec<T>) {
        assert!(n >= 1, "modes are numbered from 1");
        (
            self.a.iter().map(|row| row[n - 1]).collect(),
            self.b.iter().map(|row| row[n - 1]).collect(),
        )
    }
}

/// Evolves `state0` under the boundary control `u` by Duhamel's formula with
/// trapezoid quadrature on the control grid.
pub fn forced_evolution<T: Real>(
    state0: &ModalState<T>,
    spec: &Spectrum<T>,
    u: &ControlSignal<T>,
) -> Result<ModalTrajectory<T>> {
    forced_evolution_with(state0, spec, u, None)
}

/// As [`forced_evolution`] with an additional distributed forcing:
/// `forcing[k][n]` is `f_n(t_k)`.
pub fn forced_evolution_with<T: Real>(
    state0: &ModalState<T>,
    spec: &Spectrum<T>,
    u: &ControlSignal<T>,
    forcing: Option<&[Vec<T>]>,
) -> Result<ModalTrajectory<T>> {
    let n = state0.n_modes();
    check_truncation(n, spec)?;
    let dt = u.dt();
    let samples = u.len();
    if let Some(f) = forcing {
        if f.len() != samples {
            return Err(Error::LengthMismatch {
                expected: samples,
                got: f.len(),
            });
        }
        if let Some(row) = f.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: row.len(),
            });
        }
    }
    let pairs = &spec.pairs()[..n];
    if let Some(p) = pairs.last() {
        let omega_dt = p.omega * dt;
        if omega_dt > T::lit(MAX_OMEGA_DT) {
            return Err(Error::QuadratureUnderResolved {
                omega_dt: omega_dt.to_f64_lossy(),
            });
        }
    }
    let half_dt = T::lit(0.5) * dt;
    let rot: Vec<(T, T)> = pairs.iter().map(|p| (p.omega * dt).sin_cos()).collect();
    let mut a = Vec::with_capacity(samples);
    let mut b = Vec::with_capacity(samples);
    let mut trace = Vec::with_capacity(samples);
    let mut cur = state0.clone();
    let g = |k: usize, i: usize| -> T {
        let extra = forcing.map_or(T::zero(), |f| f[k][i]);
        pairs[i].dphi_l * u.u[k] + extra
    };
    for k in 0..samples {
        if k > 0 {
            // one trapezoid panel of the Duhamel integral, propagated exactly
            for (i, p) in pairs.iter().enumerate() {
                let (s, c) = rot[i];
                let (a0, b0) = (cur.a[i], cur.b[i]);
                let g0 = g(k - 1, i);
                let g1 = g(k, i);
                cur.a[i] = a0 * c + b0 / p.omega * s + half_dt * s / p.omega * g0;
                cur.b[i] = -a0 * p.omega * s + b0 * c + half_dt * (c * g0 + g1);
            }
        }
        trace.push(
            cur.a
                .iter()
                .zip(pairs)
                .map(|(ai, p)| *ai * p.dphi_l)
                .sum(),
        );
        a.push(cur.a.clone());
        b.push(cur.b.clone());
    }
    Ok(ModalTrajectory {
        t: u.times(),
        a,
        b,
        trace,
    })
}

/// Both sides of the duality balance for one mode:
/// `lhs = [(b - i omega a) e^{i omega t}]_0^T` and
/// `rhs = trace * int_0^T u(t) e^{i omega t} dt` (trapezoid).
pub fn duality_balance<T: Real>(
    omega: T,
    trace: T,
    a: &[T],
    b: &[T],
    u: &ControlSignal<T>,
) -> (Complex<T>, Complex<T>) {
    let last = a.len() - 1;
    let phase = |t: T| Complex::new(T::zero(), omega * t).exp();
    let z = |k: usize| Complex::new(b[k], -omega * a[k]);
    let lhs = z(last) * phase(u.horizon()) - z(0);
    let re: Vec<T> = (0..u.len())
        .map(|k| u.u[k] * (omega * u.time(k)).cos())
        .collect();
    let im: Vec<T> = (0..u.len())
        .map(|k| u.u[k] * (omega * u.time(k)).sin())
        .collect();
    let dt = u.dt();
    let rhs = Complex::new(trapezoid(&re, dt), trapezoid(&im, dt)) * trace;
    (lhs, rhs)
}
