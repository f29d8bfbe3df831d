//! Boundary observation `int_0^T |y_x(t, l)|^2 dt` of free solutions and
//! empirical two-sided bounds against the `H_0^1 x H^{-1}` data norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coefficients::{quadrature_weights, Grid};
use crate::error::{Error, Result};
use crate::modal::{check_truncation, norm_theta, ModalState};
use crate::scalar::Real;
use crate::spectral::Spectrum;

/// Samples per period of the fastest mode required by [`observe`].
pub const SAMPLES_PER_PERIOD: f64 = 20.0;

/// Minimum trial count of [`observability_ratio`].
pub const MIN_TRIALS: usize = 20;

/// Smallest admissible sample count for `observe` over `[0, horizon]`.
pub fn required_samples<T: Real>(spec: &Spectrum<T>, n_modes: usize, horizon: T) -> usize {
    let omega_n = spec.mode(n_modes.max(1)).omega.to_f64_lossy();
    (SAMPLES_PER_PERIOD * omega_n * horizon.to_f64_lossy() / (2.0 * std::f64::consts::PI)).ceil()
        as usize
}

/// `int_0^T |sum a_n(t) phi_n'(l)|^2 dt` for the free solution from `state0`,
/// by composite Simpson quadrature on `samples` uniformly spaced nodes.
pub fn observe<T: Real>(
    state0: &ModalState<T>,
    spec: &Spectrum<T>,
    horizon: T,
    samples: usize,
) -> Result<T> {
    let n = state0.n_modes();
    check_truncation(n, spec)?;
    if !(horizon > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let required = required_samples(spec, n, horizon).max(crate::coefficients::MIN_INTERVALS + 1);
    if samples < required {
        return Err(Error::UnderSampled { samples, required });
    }
    let grid = Grid::new(horizon, samples - 1)?;
    let w = quadrature_weights(&grid);
    let pairs = &spec.pairs()[..n];
    let mut total = T::zero();
    for (k, wk) in w.iter().enumerate() {
        let t = grid.node(k);
        let mut yx = T::zero();
        for (i, p) in pairs.iter().enumerate() {
            let (s, c) = (p.omega * t).sin_cos();
            yx += (state0.a[i] * c + state0.b[i] / p.omega * s) * p.dphi_l;
        }
        total += *wk * yx * yx;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct Trial<T> {
    pub trial: usize,
    /// Squared `theta = 1/4` pair norm of the data (one by construction).
    pub norm: T,
    pub observed: T,
    pub ratio: T,
}

#[derive(Debug, Clone)]
pub struct ObservabilityReport<T> {
    pub c_min: T,
    pub c_max: T,
    pub horizon: T,
    pub n_modes: usize,
    pub seed: u64,
    pub samples: usize,
    pub trials: Vec<Trial<T>>,
}

/// Random unit-norm data for trial `trial` of a study seeded with `seed`:
/// i.i.d. standard normal coefficients scaled to unit `theta = 1/4` pair norm.
pub fn random_unit_state<T: Real>(spec: &Spectrum<T>, n: usize, seed: u64, trial: usize) -> ModalState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut draw = || -> T {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::lit(z)
    };
    let a: Vec<T> = (0..n).map(|_| draw()).collect();
    let b: Vec<T> = (0..n).map(|_| draw()).collect();
    let state = ModalState { a, b };
    let (na, nb) = norm_theta(&state, spec, T::lit(0.25)).expect("n within spectrum");
    state.scaled(T::one() / (na + nb).sqrt())
}

/// Empirical constants `c_min <= observe / ||data||^2 <= c_max` over random
/// unit data on all modes of `spec`.
pub fn observability_ratio<T: Real>(
    spec: &Spectrum<T>,
    horizon: T,
    trials: usize,
    seed: u64,
) -> Result<ObservabilityReport<T>> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let n = spec.len();
    // twice the minimum sampling, odd for the plain Simpson rule
    let samples = (2 * required_samples(spec, n, horizon)).max(1024) | 1;
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let state = random_unit_state(spec, n, seed, trial);
        let (na, nb) = norm_theta(&state, spec, T::lit(0.25))?;
        let norm = na + nb;
        let observed = observe(&state, spec, horizon, samples)?;
        out.push(Trial {
            trial,
            norm,
            observed,
            ratio: observed / norm,
        });
    }
    let c_min = out.iter().map(|t| t.ratio).fold(T::infinity(), T::min);
    let c_max = out.iter().map(|t| t.ratio).fold(T::zero(), T::max);
    Ok(ObservabilityReport {
        c_min,
        c_max,
        horizon,
        n_modes: n,
        seed,
        samples,
        trials: out,
    })
}

#[derive(Debug, Clone)]
pub struct GapWindow<T> {
    pub horizon: T,
    /// `pi / T`.
    pub required: T,
    /// Largest index whose gap does not exceed `pi / T` (0 if none).
    pub n: usize,
    /// Smallest gap beyond index `n`.
    pub achieved: T,
}

#[derive(Debug, Clone)]
pub struct HarauxReport<T> {
    /// Smallest gap of the symmetrized sequence, including `2 omega_1`.
    pub beta: T,
    /// `omega_{n+1} - omega_n`, `n = 1..N-1`.
    pub gaps: Vec<T>,
    /// `2 omega_1`, the gap across zero.
    pub central_gap: T,
    pub windows: Vec<GapWindow<T>>,
}

/// Checks the gap structure of `{+-omega_n}` and, for every horizon, the
/// index beyond which all gaps exceed `pi / T`.
pub fn haraux_hypothesis_check<T: Real>(
    spec: &Spectrum<T>,
    horizons: &[T],
) -> Result<HarauxReport<T>> {
    if spec.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "gap check needs at least 10 modes, got {}",
            spec.len()
        )));
    }
    let omegas = spec.omegas();
    let gaps: Vec<T> = omegas.windows(2).map(|w| w[1] - w[0]).collect();
    let central_gap = T::lit(2.0) * omegas[0];
    let beta = gaps.iter().copied().fold(central_gap, T::min);
    if !(beta > T::zero()) {
        return Err(Error::GapViolation(format!("minimal gap {beta} is not positive")));
    }
    let mut windows = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        if !(horizon > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let required = T::PI() / horizon;
        // gaps[i] is the gap between modes i+1 and i+2
        let n = gaps
            .iter()
            .rposition(|g| *g <= required)
            .map_or(0, |i| i + 1);
        if n >= gaps.len() {
            return Err(Error::GapViolation(format!(
                "no gap above pi/T = {} among the {} computed modes (T = {horizon})",
                required,
                spec.len()
            )));
        }
        let achieved = gaps[n..].iter().copied().fold(T::infinity(), T::min);
        windows.push(GapWindow {
            horizon,
            required,
            n,
            achieved,
        });
    }
    Ok(HarauxReport {
        beta,
        gaps,
        central_gap,
        windows,
    })
}
