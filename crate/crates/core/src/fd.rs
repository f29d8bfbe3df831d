//! Finite-difference time-domain solver for
//! `rho y_tt = -(sigma y_xx)_xx + (q y_x)_x - (y^2)_xx` with hinged ends and
//! `sigma(l) y_xx(t, l) = u(t)`.
//!
//! Space uses the same factored operator as the eigen solver. The control
//! enters through the ghost value `y_{m+1} = -y_{m-1} + h^2 u / sigma(l)`,
//! which adds `-u / h^2` to the right-hand side at node `m - 1`. Time stepping
//! is Newmark average acceleration (`beta = 1/4`, `gamma = 1/2`); the
//! quadratic term is explicit at the Newmark predictor.

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::modal::ControlSignal;
use crate::scalar::Real;
use crate::spectral::{assemble, Operator, Spectrum};

/// Relative energy drift per step tolerated for the free linear problem.
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;

/// Blow-up threshold relative to the initial sup norm.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy)]
pub struct SimulationOptions<T> {
    /// Requested time step; adjusted down so that it divides the horizon.
    pub dt: T,
    /// Store a snapshot every this many steps (the final state is always stored).
    /// `0` keeps only the initial and final states.
    pub snapshot_every: usize,
}

impl<T: Real> SimulationOptions<T> {
    pub fn new(dt: T) -> Self {
        Self {
            dt,
            snapshot_every: 0,
        }
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SimulationResult<T> {
    /// Snapshot times.
    pub t: Vec<T>,
    /// Nodal positions on the full grid, one row per snapshot.
    pub y: Vec<Vec<T>>,
    /// Nodal velocities, one row per snapshot.
    pub v: Vec<Vec<T>>,
    /// Every step time.
    pub step_t: Vec<T>,
    /// `y_x(t, l)` by a one-sided three-point difference, per step.
    pub trace: Vec<T>,
    /// Control value used at each step.
    pub u: Vec<T>,
    /// `(1/2)(<rho y_t, y_t> + <sigma y'', y''> + <q y', y'>)` per step.
    /// Conserved only by the free linear problem.
    pub energy: Vec<T>,
    pub dt: T,
    h: T,
    sigma_l: T,
}

impl<T: Real> SimulationResult<T> {
    pub fn final_position(&self) -> &[T] {
        self.y.last().expect("at least one snapshot")
    }

    pub fn final_velocity(&self) -> &[T] {
        self.v.last().expect("at least one snapshot")
    }

    /// `sigma(l) y_xx(t_k, l)` reconstructed from the ghost relation at step `k`.
    pub fn boundary_moment(&self, k: usize, y_m_minus_1: T) -> T {
        let h2 = self.h * self.h;
        let ghost = -y_m_minus_1 + h2 * self.u[k] / self.sigma_l;
        self.sigma_l * (ghost + y_m_minus_1) / h2
    }

    /// Grid spacing.
    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn sup_norm(&self) -> T {
        self.y
            .iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Trace `-phi_{m-1} / h` of mode `n` (1-based) seen by the FD scheme: the
/// modal amplitudes of an FD solution obey `a'' + lambda a = trace * u`.
pub fn semi_discrete_trace<T: Real>(spec: &Spectrum<T>, n: usize) -> T {
    let phi = &spec.mode(n).phi;
    -phi[phi.len() - 2] / spec.coeffs().grid().spacing()
}

/// Called after every step (and once at `t = 0`) with the step index, the
/// time and the interior nodal position and velocity.
pub type StepObserver<'a, T> = &'a mut dyn FnMut(usize, T, &[T], &[T]);

/// Linear problem.
pub fn simulate_linear<T: Real>(
    coeffs: &CoefficientSet<T>,
    y0: &[T],
    v0: &[T],
    u: &ControlSignal<T>,
    opts: SimulationOptions<T>,
) -> Result<SimulationResult<T>> {
    run(coeffs, y0, v0, u, opts, false, None)
}

/// [`simulate_linear`] with a per-step observer.
pub fn simulate_linear_observed<T: Real>(
    coeffs: &CoefficientSet<T>,
    y0: &[T],
    v0: &[T],
    u: &ControlSignal<T>,
    opts: SimulationOptions<T>,
    observer: StepObserver<'_, T>,
) -> Result<SimulationResult<T>> {
    run(coeffs, y0, v0, u, opts, false, Some(observer))
}

/// Nonlinear problem with the `-(y^2)_xx` term.
pub fn simulate_nonlinear<T: Real>(
    coeffs: &CoefficientSet<T>,
    y0: &[T],
    v0: &[T],
    u: &ControlSignal<T>,
    opts: SimulationOptions<T>,
) -> Result<SimulationResult<T>> {
    run(coeffs, y0, v0, u, opts, true, None)
}

fn run<T: Real>(
    coeffs: &CoefficientSet<T>,
    y0: &[T],
    v0: &[T],
    u: &ControlSignal<T>,
    opts: SimulationOptions<T>,
    nonlinear: bool,
    mut observer: Option<StepObserver<'_, T>>,
) -> Result<SimulationResult<T>> {
    let m = coeffs.grid().intervals();
    for f in [y0, v0] {
        if f.len() != m + 1 {
            return Err(Error::LengthMismatch {
                expected: m + 1,
                got: f.len(),
            });
        }
    }
    if !(opts.dt > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {}",
            opts.dt
        )));
    }
    let op = assemble(coeffs)?;
    let horizon = u.horizon();
    let steps = (horizon / opts.dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = horizon / T::from_count(steps);
    let h = op.spacing();
    let h2 = h * h;
    let sigma_l = *coeffs.sigma().last().expect("non-empty");
    let mass = op.mass().to_vec();
    let n = op.dim();
    let quarter_dt2 = T::lit(0.25) * dt * dt;
    let half_dt = T::lit(0.5) * dt;
    // acceleration form: (M + dt^2/4 K) a_{n+1} = f_{n+1} - K y_pred
    let mut k_eff = op.stiffness().clone();
    k_eff.scale(quarter_dt2);
    k_eff.add_diagonal(&mass, T::one());
    let factor = k_eff.ldl();

    let control_free = u.samples().iter().all(|v| *v == T::zero());
    let mut y: Vec<T> = y0[1..m].to_vec();
    let mut v: Vec<T> = v0[1..m].to_vec();
    let load = |yy: &[T], t: T| -> Vec<T> {
        let mut f = if nonlinear {
            quadratic_load(&op, yy)
        } else {
            vec![T::zero(); n]
        };
        f[n - 1] -= u.value_at(t) / h2;
        f
    };
    let mut a: Vec<T> = {
        let f = load(&y, T::zero());
        let ky = op.stiffness().matvec(&y);
        f.iter()
            .zip(&ky)
            .zip(&mass)
            .map(|((fi, ki), mi)| (*fi - *ki) / *mi)
            .collect()
    };

    let full = |inner: &[T]| {
        let mut out = Vec::with_capacity(m + 1);
        out.push(T::zero());
        out.extend_from_slice(inner);
        out.push(T::zero());
        out
    };
    let energy_of = |yy: &[T], vv: &[T]| {
        T::lit(0.5) * h * (op.mass_form(vv, vv) + op.energy_form(yy, yy))
    };
    let trace_of = |yy: &[T]| {
        let ym1 = yy[n - 1];
        let ym2 = if n >= 2 { yy[n - 2] } else { T::zero() };
        (-T::lit(4.0) * ym1 + ym2) / (T::lit(2.0) * h)
    };
    let sup_of = |yy: &[T]| yy.iter().fold(T::zero(), |s, x| s.max(x.abs()));
    let sup0 = sup_of(&y);

    let mut res = SimulationResult {
        t: vec![T::zero()],
        y: vec![full(&y)],
        v: vec![full(&v)],
        step_t: Vec::with_capacity(steps + 1),
        trace: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        dt,
        h,
        sigma_l,
    };
    res.step_t.push(T::zero());
    res.trace.push(trace_of(&y));
    res.u.push(u.value_at(T::zero()));
    res.energy.push(energy_of(&y, &v));
    if let Some(obs) = observer.as_mut() {
        obs(0, T::zero(), &y, &v);
    }

    let mut pred = vec![T::zero(); n];
    for step in 1..=steps {
        let t = T::from_count(step) * dt;
        for i in 0..n {
            pred[i] = y[i] + dt * v[i] + quarter_dt2 * a[i];
        }
        let mut rhs = load(&pred, t);
        let kp = op.stiffness().matvec(&pred);
        for (r, k) in rhs.iter_mut().zip(&kp) {
            *r -= *k;
        }
        factor.solve_in_place(&mut rhs);
        for i in 0..n {
            let a_new = rhs[i];
            y[i] = pred[i] + quarter_dt2 * a_new;
            v[i] += half_dt * (a[i] + a_new);
            a[i] = a_new;
        }
        let e = energy_of(&y, &v);
        if !nonlinear && control_free {
            let prev = *res.energy.last().expect("non-empty");
            let drift = ((e - prev) / prev.max(T::min_positive_value())).abs();
            if prev > T::zero() && drift > T::lit(ENERGY_DRIFT_TOL) {
                return Err(Error::UnstableStep {
                    step,
                    drift: drift.to_f64_lossy(),
                });
            }
        }
        let sup = sup_of(&y);
        if !sup.is_finite() || (nonlinear && sup0 > T::zero() && sup > T::lit(BLOWUP_FACTOR) * sup0)
        {
            return Err(Error::BlowupDetected {
                t: t.to_f64_lossy(),
                sup: sup.to_f64_lossy(),
            });
        }
        if let Some(obs) = observer.as_mut() {
            obs(step, t, &y, &v);
        }
        res.step_t.push(t);
        res.trace.push(trace_of(&y));
        res.u.push(u.value_at(t));
        res.energy.push(e);
        let store = step == steps || (opts.snapshot_every > 0 && step % opts.snapshot_every == 0);
        if store {
            res.t.push(t);
            res.y.push(full(&y));
            res.v.push(full(&v));
        }
    }
    Ok(res)
}

/// `-D2(y^2)` at the interior nodes, with `y = 0` at both ends.
fn quadratic_load<T: Real>(op: &Operator<T>, y: &[T]) -> Vec<T> {
    let n = y.len();
    let h2 = op.spacing() * op.spacing();
    let sq = |i: isize| -> T {
        if i < 0 || i as usize >= n {
            T::zero()
        } else {
            y[i as usize] * y[i as usize]
        }
    };
    (0..n as isize)
        .map(|i| -(sq(i + 1) - T::lit(2.0) * sq(i) + sq(i - 1)) / h2)
        .collect()
}
