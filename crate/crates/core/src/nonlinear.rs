//! Local exact control of the nonlinear problem by fixed-point iteration on
//! modal trajectories.
//!
//! A trajectory splits as `y = psi0 + w + psi1(u)`, where `psi0` is the free
//! evolution of the initial data, `w` solves the zero-data problem forced by
//! `-(y^2)_xx` and `psi1(u)` is the zero-data response to the control. The
//! control is the least-norm moment solution steering `psi1` to
//! `target - psi0(T) - w(T)`, so every iterate hits the target at `t = T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coefficients::quadrature;
use crate::control::{
    build_moment_problem, solve_min_norm, split_error, FdVerification, MinNormControl,
};
use crate::error::{Error, Result};
use crate::fd::{simulate_nonlinear, SimulationOptions};
use crate::modal::{
    check_truncation, forced_evolution, forced_evolution_with, norm_theta, pair_norm, ControlSignal,
    ModalState, ModalTrajectory,
};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// Consecutive non-contracting iterations tolerated before giving up.
pub const MAX_EXPANDING: usize = 3;

/// `f_n = -int_0^l y^2 phi_n'' dx` from nodal values of `y`, by Simpson
/// quadrature on the spectrum's grid.
pub fn nodal_forcing<T: Real>(spec: &Spectrum<T>, n: usize, y: &[T]) -> Result<Vec<T>> {
    check_truncation(n, spec)?;
    let grid = spec.grid();
    let sq: Vec<T> = y.iter().map(|v| *v * *v).collect();
    (1..=n)
        .map(|k| {
            let d2 = spec.second_derivative(k);
            let f: Vec<T> = sq.iter().zip(&d2).map(|(s, d)| -*s * *d).collect();
            quadrature(&f, grid)
        })
        .collect()
}

/// Precomputed `C[n][j][k] = -int phi_j phi_k phi_n'' dx`, so that
/// `f_n = sum_jk C[n][j][k] a_j a_k` for `y = sum a_j phi_j`.
#[derive(Debug, Clone)]
pub struct QuadraticForcing<T> {
    n: usize,
    c: Vec<T>,
}

impl<T: Real> QuadraticForcing<T> {
    pub fn new(spec: &Spectrum<T>, n: usize) -> Result<Self> {
        check_truncation(n, spec)?;
        let grid = spec.grid();
        let d2: Vec<Vec<T>> = (1..=n).map(|k| spec.second_derivative(k)).collect();
        let mut c = vec![T::zero(); n * n * n];
        for (i, d2i) in d2.iter().enumerate() {
            for j in 0..n {
                let pj = &spec.mode(j + 1).phi;
                for k in 0..=j {
                    let pk = &spec.mode(k + 1).phi;
                    let f: Vec<T> = (0..pj.len()).map(|x| -pj[x] * pk[x] * d2i[x]).collect();
                    let v = quadrature(&f, grid)?;
                    c[(i * n + j) * n + k] = v;
                    c[(i * n + k) * n + j] = v;
                }
            }
        }
        Ok(Self { n, c })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> T {
        self.c[(i * self.n + j) * self.n + k]
    }

    /// Forcing vector for position coefficients `a`.
    pub fn apply(&self, a: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..n {
                    let mut inner = T::zero();
                    for k in 0..n {
                        inner += self.c[(i * n + j) * n + k] * a[k];
                    }
                    s += inner * a[j];
                }
                s
            })
            .collect()
    }

    /// Forcing at every time node of a trajectory.
    pub fn along(&self, traj: &ModalTrajectory<T>) -> Vec<Vec<T>> {
        traj.a.iter().map(|a| self.apply(a)).collect()
    }
}

/// Quadratic forcing along a trajectory via nodal synthesis at each time node.
pub fn quadratic_forcing<T: Real>(
    traj: &ModalTrajectory<T>,
    spec: &Spectrum<T>,
) -> Result<Vec<Vec<T>>> {
    let n = traj.a.first().map_or(0, |a| a.len());
    traj.a
        .iter()
        .map(|a| nodal_forcing(spec, n, &spec.synthesize(a)))
        .collect()
}

/// Zero-data response to the distributed forcing `forcing[k][n]` on a uniform
/// grid over `[0, horizon]`.
pub fn psi2_solve<T: Real>(
    forcing: &[Vec<T>],
    spec: &Spectrum<T>,
    horizon: T,
) -> Result<ModalTrajectory<T>> {
    let n = forcing.first().map_or(0, |f| f.len());
    let u = ControlSignal::zero(horizon, forcing.len())?;
    forced_evolution_with(&ModalState::zeros(n), spec, &u, Some(forcing))
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions<T> {
    /// Time nodes of the control and trajectory grid.
    pub samples: usize,
    pub epsilon: T,
    pub max_iter: usize,
    /// Stop once the iterate distance falls below `tol` times the first one.
    pub tol: T,
}

impl<T: Real> FixedPointOptions<T> {
    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            epsilon: T::lit(crate::control::DEFAULT_EPSILON),
            max_iter: 20,
            tol: T::lit(1e-10),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord<T> {
    pub k: usize,
    /// `sup_t ||y_k(t) - y_{k-1}(t)||` in the `theta = 3/4` position norm.
    pub distance: T,
    /// `distance_k / distance_{k-1}` (undefined for the first iterate).
    pub ratio: Option<T>,
    pub u_l2: T,
    pub u_h1: T,
}

#[derive(Debug, Clone)]
pub struct FixedPointResult<T> {
    pub control: MinNormControl<T>,
    pub trajectory: ModalTrajectory<T>,
    pub log: Vec<IterationRecord<T>>,
}

impl<T: Real> FixedPointResult<T> {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }

    /// Largest ratio over the iterations after the first two.
    pub fn max_ratio(&self) -> Option<T> {
        self.log
            .iter()
            .skip(2)
            .filter_map(|r| r.ratio)
            .fold(None, |m, r| Some(m.map_or(r, |v: T| v.max(r))))
    }
}

/// `sup_k (sum lambda_n^{3/2} (a_n - b_n)^2)^{1/2}` between two trajectories.
pub fn trajectory_distance<T: Real>(
    x: &ModalTrajectory<T>,
    y: &ModalTrajectory<T>,
    spec: &Spectrum<T>,
) -> T {
    let w: Vec<T> = spec
        .pairs()
        .iter()
        .map(|p| p.lambda.powf(T::lit(1.5)))
        .collect();
    x.a.iter()
        .zip(&y.a)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .zip(&w)
                .map(|((p, q), wi)| *wi * (*p - *q) * (*p - *q))
                .sum::<T>()
                .sqrt()
        })
        .fold(T::zero(), T::max)
}

fn combine<T: Real>(parts: &[&ModalTrajectory<T>]) -> ModalTrajectory<T> {
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        for k in 0..out.len() {
            for i in 0..out.a[k].len() {
                out.a[k][i] += p.a[k][i];
                out.b[k][i] += p.b[k][i];
            }
            out.trace[k] += p.trace[k];
        }
    }
    out
}

fn zero_trajectory<T: Real>(like: &ModalTrajectory<T>) -> ModalTrajectory<T> {
    let n = like.a.first().map_or(0, |a| a.len());
    ModalTrajectory {
        t: like.t.clone(),
        a: vec![vec![T::zero(); n]; like.len()],
        b: vec![vec![T::zero(); n]; like.len()],
        trace: vec![T::zero(); like.len()],
    }
}

/// Iterates `y <- psi0 + w(y) + psi1(Gamma(target - psi0(T) - w(y)(T)))`
/// from `y = 0` until successive iterates agree.
pub fn fixed_point_iterate<T: Real>(
    init: &ModalState<T>,
    target: &ModalState<T>,
    spec: &Spectrum<T>,
    horizon: T,
    opts: FixedPointOptions<T>,
) -> Result<FixedPointResult<T>> {
    let n = init.n_modes();
    if target.n_modes() != n {
        return Err(Error::TruncationMismatch {
            state: target.n_modes(),
            spectrum: n,
        });
    }
    check_truncation(n, spec)?;
    let zero_u = ControlSignal::zero(horizon, opts.samples)?;
    let psi0 = forced_evolution(init, spec, &zero_u)?;
    let psi0_t = psi0.final_state();
    let quad = QuadraticForcing::new(spec, n)?;
    let zero_state = ModalState::zeros(n);

    let mut y = zero_trajectory(&psi0);
    let mut log: Vec<IterationRecord<T>> = Vec::new();
    let mut first = None;
    let mut expanding = 0;
    for k in 1..=opts.max_iter {
        let w = psi2_solve(&quad.along(&y), spec, horizon)?;
        let correction = target.sub(&psi0_t).sub(&w.final_state());
        let problem = build_moment_problem(&zero_state, &correction, spec, horizon)?;
        let control = solve_min_norm(&problem, opts.epsilon, opts.samples)?;
        let hat = forced_evolution(&zero_state, spec, &control.signal)?;
        let next = combine(&[&psi0, &w, &hat]);
        let distance = trajectory_distance(&next, &y, spec);
        let ratio = log.last().and_then(|r| {
            if r.distance > T::zero() {
                Some(distance / r.distance)
            } else {
                None
            }
        });
        log.push(IterationRecord {
            k,
            distance,
            ratio,
            u_l2: control.signal.l2_norm(),
            u_h1: control.signal.h1_seminorm(),
        });
        y = next;
        let d1 = *first.get_or_insert(distance);
        if distance <= opts.tol * d1 || distance == T::zero() {
            return Ok(FixedPointResult {
                control,
                trajectory: y,
                log,
            });
        }
        match ratio {
            Some(r) if r >= T::one() => expanding += 1,
            _ => expanding = 0,
        }
        if expanding >= MAX_EXPANDING {
            return Err(Error::NoContraction {
                ratios: log
                    .iter()
                    .filter_map(|r| r.ratio.map(|v| v.to_f64_lossy()))
                    .collect(),
            });
        }
    }
    Err(Error::MaxIterExceeded {
        max_iter: opts.max_iter,
    })
}

/// `||Q(y) - Q(z)||_{L^1(0,T; H^1)} / (||y + z||_{L^2(0,T; H)} ||y - z||_{L^2(0,T; H)})`
/// for the quadratic forcing map `Q`, with the modal surrogates
/// `H^1 ~ sum lambda^{1/2} f_n^2` and `H ~ sum lambda^{3/2} a_n^2`.
pub fn quadratic_difference_ratio<T: Real>(
    quad: &QuadraticForcing<T>,
    spec: &Spectrum<T>,
    y: &ModalTrajectory<T>,
    z: &ModalTrajectory<T>,
) -> T {
    let n = quad.n_modes();
    let half: Vec<T> = spec.pairs()[..n]
        .iter()
        .map(|p| p.lambda.sqrt())
        .collect();
    let three_halves: Vec<T> = spec.pairs()[..n]
        .iter()
        .map(|p| p.lambda.powf(T::lit(1.5)))
        .collect();
    let dt = y.t[1] - y.t[0];
    let mut num = Vec::with_capacity(y.len());
    let mut sum2 = Vec::with_capacity(y.len());
    let mut diff2 = Vec::with_capacity(y.len());
    for k in 0..y.len() {
        let fy = quad.apply(&y.a[k]);
        let fz = quad.apply(&z.a[k]);
        num.push(
            (0..n)
                .map(|i| half[i] * (fy[i] - fz[i]) * (fy[i] - fz[i]))
                .sum::<T>()
                .sqrt(),
        );
        let (mut s, mut d) = (T::zero(), T::zero());
        for i in 0..n {
            let (p, q) = (y.a[k][i], z.a[k][i]);
            s += three_halves[i] * (p + q) * (p + q);
            d += three_halves[i] * (p - q) * (p - q);
        }
        sum2.push(s);
        diff2.push(d);
    }
    let trap = crate::modal::trapezoid;
    trap(&num, dt) / (trap(&sum2, dt).sqrt() * trap(&diff2, dt).sqrt())
}

#[derive(Debug, Clone)]
pub struct QuadraticConstantReport<T> {
    /// Largest ratio within each batch.
    pub batch_max: Vec<T>,
    /// `max(batch_max) / min(batch_max)`.
    pub spread: T,
}

/// Empirical constant of the quadratic-difference bound: random small free
/// trajectories in `batches` groups of `pairs`, seeded deterministically.
pub fn quadratic_constant<T: Real>(
    spec: &Spectrum<T>,
    n: usize,
    horizon: T,
    samples: usize,
    batches: usize,
    pairs: usize,
    seed: u64,
) -> Result<QuadraticConstantReport<T>> {
    let quad = QuadraticForcing::new(spec, n)?;
    let u = ControlSignal::zero(horizon, samples)?;
    let mut batch_max = Vec::with_capacity(batches);
    for batch in 0..batches {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch as u64);
        let mut best = T::zero();
        for _ in 0..pairs {
            let mut draw = |scale: T| -> ModalState<T> {
                let mut g = || -> T {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::lit(z)
                };
                let a: Vec<T> = (0..n).map(|_| g()).collect();
                let b: Vec<T> = (0..n).map(|_| g()).collect();
                let s = ModalState { a, b };
                let (na, nb) = norm_theta(&s, spec, T::lit(0.75)).expect("n within spectrum");
                s.scaled(scale / (na + nb).sqrt())
            };
            let ys = draw(T::lit(1e-2));
            let zs = draw(T::lit(1e-2));
            let y = forced_evolution(&ys, spec, &u)?;
            let z = forced_evolution(&zs, spec, &u)?;
            best = best.max(quadratic_difference_ratio(&quad, spec, &y, &z));
        }
        batch_max.push(best);
    }
    let hi = batch_max.iter().copied().fold(T::zero(), T::max);
    let lo = batch_max.iter().copied().fold(T::infinity(), T::min);
    Ok(QuadraticConstantReport {
        batch_max,
        spread: hi / lo,
    })
}

/// Re-simulates `result.control` with the nonlinear FD scheme on the grid of
/// `fd_spec` and splits the final-state error against `target`, relative to
/// the `theta = 1/4` pair norm of `init`.
pub fn verify_fd<T: Real>(
    init: &ModalState<T>,
    target: &ModalState<T>,
    result: &FixedPointResult<T>,
    fd_spec: &Spectrum<T>,
    dt: T,
) -> Result<FdVerification<T>> {
    check_truncation(init.n_modes(), fd_spec)?;
    let (y0, v0) = init.to_nodal(fd_spec)?;
    let sim = simulate_nonlinear(
        fd_spec.coeffs(),
        &y0,
        &v0,
        &result.control.signal,
        SimulationOptions::new(dt),
    )?;
    let all = fd_spec.len();
    let fin = ModalState::from_nodal(fd_spec, all, sim.final_position(), sim.final_velocity())?;
    let mut tgt = ModalState::zeros(all);
    tgt.a[..target.n_modes()].copy_from_slice(&target.a);
    tgt.b[..target.n_modes()].copy_from_slice(&target.b);
    let scale = pair_norm(init, fd_spec, T::lit(0.25))?.max(T::min_positive_value());
    split_error(&fin.sub(&tgt), target.n_modes(), fd_spec, scale)
}
