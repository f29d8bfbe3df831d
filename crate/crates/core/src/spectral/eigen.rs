//! Lowest eigenpairs of `K v = lambda B v`.
//!
//! The default path isolates each eigenvalue by bisection on the inertia of
//! `K - s B`, refines it by shifted inverse iteration, and finishes with a
//! Rayleigh-Ritz step on the computed subspace using the factored energy
//! form. The dense path runs Jacobi on `B^{-1/2} K B^{-1/2}` and is meant for
//! small grids and cross-validation.

use crate::coefficients::{gamma, zeta, CoefficientSet};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;
use crate::spectral::assembly::{assemble, Operator};
use crate::spectral::{EigenPair, Spectrum};

/// Relative eigenvalue separation below which two modes count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Banded,
    Dense,
}

/// Largest mode count resolved on a grid of `m` intervals (8 points per
/// wavelength of the last mode).
pub fn max_modes(m: usize) -> usize {
    m / 8
}

/// Computes the first `n_modes` eigenpairs with the banded path.
pub fn solve_spectrum<T: Real>(coeffs: &CoefficientSet<T>, n_modes: usize) -> Result<Spectrum<T>> {
    solve_spectrum_with(coeffs, n_modes, EigenMethod::Banded)
}

pub fn solve_spectrum_with<T: Real>(
    coeffs: &CoefficientSet<T>,
    n_modes: usize,
    method: EigenMethod,
) -> Result<Spectrum<T>> {
    let m = coeffs.grid().intervals();
    let max = max_modes(m);
    if n_modes == 0 || n_modes > max {
        return Err(Error::TooManyModes {
            requested: n_modes,
            max,
        });
    }
    let op = assemble(coeffs)?;
    let (values, vectors) = match method {
        EigenMethod::Banded => banded_pairs(&op, n_modes)?,
        EigenMethod::Dense => dense_pairs(&op, n_modes)?,
    };
    for n in 0..values.len().saturating_sub(1) {
        let rel_gap = (values[n + 1] - values[n]) / values[n].abs();
        if !(rel_gap >= T::lit(DEGENERACY_TOL)) {
            return Err(Error::DegenerateEigenvalue {
                n: n + 1,
                rel_gap: rel_gap.to_f64_lossy(),
            });
        }
    }
    if let Some(v) = values.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::EigenSolveFailure(format!(
            "non-positive eigenvalue {v}"
        )));
    }
    let pairs = values
        .into_iter()
        .zip(vectors)
        .enumerate()
        .map(|(k, (lambda, v))| make_pair(coeffs, &op, k + 1, lambda, v))
        .collect();
    let z = zeta(coeffs);
    Ok(Spectrum {
        gamma: gamma(coeffs),
        zeta_l: z.at_right_end(),
        zeta_norm: z.norm_rho,
        coeffs: coeffs.clone(),
        op,
        pairs,
    })
}

fn make_pair<T: Real>(
    coeffs: &CoefficientSet<T>,
    op: &Operator<T>,
    index: usize,
    lambda: T,
    interior: Vec<T>,
) -> EigenPair<T> {
    let m = coeffs.grid().intervals();
    let h = op.spacing();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut phi = Vec::with_capacity(m + 1);
    phi.push(T::zero());
    phi.extend_from_slice(&interior);
    phi.push(T::zero());
    // one-sided three-point differences at x = l
    let dphi_l = (-four * phi[m - 1] + phi[m - 2]) / (two * h);
    let d2 = op.second_difference(&interior);
    let w = |j: usize| coeffs.sigma()[j] * d2[j];
    let dw_l = (T::lit(3.0) * w(m) - four * w(m - 1) + w(m - 2)) / (two * h);
    let q_l = *coeffs.q().last().expect("non-empty");
    EigenPair {
        index,
        lambda,
        omega: lambda.sqrt(),
        phi,
        dphi_l,
        tflux_l: dw_l - q_l * dphi_l,
    }
}

/// B-normalize in the discrete `L^2_rho` norm and fix the sign so that the
/// first interior value is positive.
fn normalize<T: Real>(op: &Operator<T>, v: &mut [T]) {
    let nrm = op.inner_rho(v, v).sqrt();
    let s = if v.first().copied().unwrap_or(T::one()) < T::zero() {
        -T::one()
    } else {
        T::one()
    };
    for x in v.iter_mut() {
        *x = *x * s / nrm;
    }
}

fn dense_pairs<T: Real>(op: &Operator<T>, n_modes: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = op.dim();
    let k = op.stiffness();
    let b = op.mass();
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        let lo = i.saturating_sub(2);
        for j in lo..(i + 3).min(n) {
            c[i * n + j] = k.get(i, j) / (b[i] * b[j]).sqrt();
        }
    }
    let eig = symmetric_eigen(&c, n);
    let mut values = Vec::with_capacity(n_modes);
    let mut vectors = Vec::with_capacity(n_modes);
    for idx in 0..n_modes {
        let w = eig.vector(idx);
        let mut v: Vec<T> = w.iter().zip(b).map(|(x, bi)| *x / bi.sqrt()).collect();
        normalize(op, &mut v);
        let lambda = op.energy_form(&v, &v) / op.mass_form(&v, &v);
        values.push(lambda);
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn banded_pairs<T: Real>(op: &Operator<T>, n_modes: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = op.dim();
    let upper = op.spectral_upper_bound() * T::lit(1.01);
    let rel_tol = T::lit(1e-13).max(T::lit(8.0) * T::epsilon());
    let mut vectors: Vec<Vec<T>> = Vec::with_capacity(n_modes);
    let mut lo = T::zero();
    for target in 1..=n_modes {
        // bisection: count(lo) < target <= count(hi)
        let mut a = lo;
        let mut b = upper;
        for _ in 0..200 {
            if b - a <= rel_tol * b {
                break;
            }
            let mid = T::lit(0.5) * (a + b);
            if op.count_below(mid) >= target {
                b = mid;
            } else {
                a = mid;
            }
        }
        lo = a;
        let shift = T::lit(0.5) * (a + b);
        let mut v = inverse_iteration(op, shift, target, &vectors)?;
        // keep B-orthogonality against the modes already found
        for _ in 0..2 {
            for u in &vectors {
                let c = op.mass_form(u, &v) / op.mass_form(u, u);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * *y;
                }
            }
        }
        normalize(op, &mut v);
        vectors.push(v);
    }
    rayleigh_ritz(op, vectors, n)
}

fn inverse_iteration<T: Real>(
    op: &Operator<T>,
    shift: T,
    target: usize,
    previous: &[Vec<T>],
) -> Result<Vec<T>> {
    let n = op.dim();
    let factor = op.shifted(shift).ldl();
    // start from the sine with the expected number of nodal lines plus a
    // deterministic irregular component
    let mut v: Vec<T> = (0..n)
        .map(|i| {
            let s = T::from_count(i + 1) / T::from_count(n + 1);
            let arg = T::from_count(target) * T::PI() * s;
            arg.sin() + T::lit(1e-3) * (T::lit(12.9898) * T::from_count(i + 1)).sin()
        })
        .collect();
    normalize(op, &mut v);
    let mut last_rq = T::infinity();
    for _ in 0..60 {
        let rhs: Vec<T> = v.iter().zip(op.mass()).map(|(x, b)| *x * *b).collect();
        let mut w = factor.solve(&rhs);
        for u in previous {
            let c = op.mass_form(u, &w) / op.mass_form(u, u);
            for (x, y) in w.iter_mut().zip(u) {
                *x -= c * *y;
            }
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::EigenSolveFailure(format!(
                "inverse iteration diverged for mode {target}"
            )));
        }
        normalize(op, &mut w);
        let rq = op.energy_form(&w, &w) / op.mass_form(&w, &w);
        let diff = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        let peak = w.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        v = w;
        if (rq - last_rq).abs() <= T::lit(1e-14) * rq.abs() && diff <= T::lit(1e-10) * peak {
            break;
        }
        last_rq = rq;
    }
    Ok(v)
}

/// Rotates a B-orthonormal basis into Ritz vectors of `K` using the factored
/// energy form.
fn rayleigh_ritz<T: Real>(
    op: &Operator<T>,
    vectors: Vec<Vec<T>>,
    n: usize,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let k = vectors.len();
    // the basis is B-orthogonal with h * v^T B v = 1, so scale accordingly
    let h = op.spacing();
    let mut a = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..=i {
            let e = h * op.energy_form(&vectors[i], &vectors[j]);
            a[i * k + j] = e;
            a[j * k + i] = e;
        }
    }
    let eig = symmetric_eigen(&a, k);
    let mut values = Vec::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let mut v = vec![T::zero(); n];
        for (r, basis) in vectors.iter().enumerate() {
            let coef = eig.vectors[r * k + c];
            for (x, y) in v.iter_mut().zip(basis) {
                *x += coef * *y;
            }
        }
        normalize(op, &mut v);
        values.push(op.energy_form(&v, &v) / op.mass_form(&v, &v));
        out.push(v);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolveFailure("non-finite Ritz value".into()));
    }
    Ok((values, out))
}
