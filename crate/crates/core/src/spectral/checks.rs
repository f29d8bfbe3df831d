use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::Spectrum;

#[derive(Debug, Clone)]
pub struct SignReport<T> {
    /// `phi_n'(l) * T phi_n(l)` per mode.
    pub products: Vec<T>,
}

/// Every mode must satisfy `phi_n'(l) * T phi_n(l) < 0`.
pub fn check_sign_condition<T: Real>(spec: &Spectrum<T>) -> Result<SignReport<T>> {
    let products: Vec<T> = spec.pairs().iter().map(|p| p.sign_product()).collect();
    if let Some((i, p)) = products.iter().enumerate().find(|(_, p)| !(**p < T::zero())) {
        return Err(Error::SignViolation {
            n: i + 1,
            product: p.to_f64_lossy(),
        });
    }
    Ok(SignReport { products })
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticOptions {
    /// First mode subject to the residual and gap-band checks.
    pub n_start: usize,
    /// Admissible band for `(omega_{n+1} - omega_n) / n` in units of `(pi/gamma)^2`.
    pub gap_band: (f64, f64),
    /// Allowed growth of `n |r_n|` over the constant fitted on the mid-range.
    pub growth_factor: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self {
            n_start: 5,
            gap_band: (1.5, 2.5),
            growth_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticReport<T> {
    /// `mu_n = lambda_n^{1/4}`.
    pub mu: Vec<T>,
    /// `r_n = mu_n - n pi / gamma`.
    pub residuals: Vec<T>,
    /// `n |r_n|`.
    pub scaled_residuals: Vec<T>,
    /// Discretization allowance added to the `n |r_n|` bound.
    pub allowance: Vec<T>,
    /// `g_n = omega_{n+1} - omega_n`.
    pub gaps: Vec<T>,
    /// `g_n / n / (pi/gamma)^2`.
    pub gap_ratios: Vec<T>,
    /// Fitted `C` in `|r_n| <= C / n`.
    pub c_fit: T,
    /// Smallest gap.
    pub beta: T,
}

pub fn check_asymptotics<T: Real>(spec: &Spectrum<T>) -> Result<AsymptoticReport<T>> {
    check_asymptotics_with(spec, AsymptoticOptions::default())
}

pub fn check_asymptotics_with<T: Real>(
    spec: &Spectrum<T>,
    opts: AsymptoticOptions,
) -> Result<AsymptoticReport<T>> {
    let n_modes = spec.len();
    if n_modes < 10 {
        return Err(Error::InvalidArgument(format!(
            "asymptotic check needs at least 10 modes, got {n_modes}"
        )));
    }
    let k0 = T::PI() / spec.gamma;
    let quarter = T::lit(0.25);
    let mu: Vec<T> = spec.lambdas().iter().map(|l| l.powf(quarter)).collect();
    let residuals: Vec<T> = mu
        .iter()
        .enumerate()
        .map(|(i, m)| *m - T::from_count(i + 1) * k0)
        .collect();
    let scaled: Vec<T> = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| T::from_count(i + 1) * r.abs())
        .collect();

    // relative eigenvalue error of the second-order scheme ~ (mu k h)^2 / 6,
    // i.e. (mu k h)^2 / 24 on mu; allow twice that
    let coeffs = spec.coeffs();
    let k_max = coeffs
        .rho()
        .iter()
        .zip(coeffs.sigma())
        .map(|(r, s)| (*r / *s).powf(quarter))
        .fold(T::zero(), T::max);
    let h = spec.grid().spacing();
    let allowance: Vec<T> = mu
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let kh = *m * k_max * h;
            T::from_count(i + 1) * *m * kh * kh / T::lit(12.0)
        })
        .collect();

    let mid_lo = (n_modes / 4).max(opts.n_start.min(n_modes) - 1).max(1);
    let mid_hi = (3 * n_modes / 4).max(mid_lo + 1);
    let c_fit = scaled[mid_lo - 1..mid_hi]
        .iter()
        .copied()
        .fold(T::zero(), T::max);
    let growth = T::lit(opts.growth_factor);
    for i in (opts.n_start - 1).min(n_modes)..n_modes {
        if scaled[i] > growth * c_fit + allowance[i] {
            return Err(Error::AsymptoticMismatch {
                n: i + 1,
                quantity: format!(
                    "n|r_n| = {:e} exceeds {} * C = {:e} (+ allowance {:e})",
                    scaled[i].to_f64_lossy(),
                    opts.growth_factor,
                    c_fit.to_f64_lossy(),
                    allowance[i].to_f64_lossy()
                ),
            });
        }
    }

    let omegas = spec.omegas();
    let gaps: Vec<T> = omegas.windows(2).map(|w| w[1] - w[0]).collect();
    let unit = k0 * k0;
    let gap_ratios: Vec<T> = gaps
        .iter()
        .enumerate()
        .map(|(i, g)| *g / T::from_count(i + 1) / unit)
        .collect();
    let (lo, hi) = (T::lit(opts.gap_band.0), T::lit(opts.gap_band.1));
    for (i, r) in gap_ratios.iter().enumerate().skip(opts.n_start - 1) {
        if *r < lo || *r > hi {
            return Err(Error::AsymptoticMismatch {
                n: i + 1,
                quantity: format!("gap ratio {} outside [{lo}, {hi}]", r.to_f64_lossy()),
            });
        }
    }
    let beta = gaps.iter().copied().fold(T::infinity(), T::min);
    if !(beta > T::zero()) {
        let n = gaps.iter().position(|g| *g == beta).unwrap_or(0) + 1;
        return Err(Error::AsymptoticMismatch {
            n,
            quantity: format!("non-positive gap {beta}"),
        });
    }
    Ok(AsymptoticReport {
        mu,
        residuals,
        scaled_residuals: scaled,
        allowance,
        gaps,
        gap_ratios,
        c_fit,
        beta,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Relative tolerance on `lambda_n^{-1/4} |phi_n'(l)|` against its limit.
    pub tol: f64,
    /// Modes from this index on must be within `tol`.
    pub from_mode: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            tol: 0.05,
            from_mode: 15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceReport<T> {
    /// `sqrt(2) zeta(l) / ||zeta|| * (rho(l)/sigma(l))^{1/4}`.
    pub limit: T,
    /// `lambda_n^{-1/4} |phi_n'(l)|` per mode.
    pub ratios: Vec<T>,
    /// Mean of the ratios over the last quarter of the modes.
    pub tail: T,
    /// Two-sided bounds `m_hat lambda^{1/4} < |phi'(l)| < M_hat lambda^{1/4}`.
    pub m_hat: T,
    pub big_m_hat: T,
}

pub fn check_trace_asymptote<T: Real>(spec: &Spectrum<T>) -> Result<TraceReport<T>> {
    check_trace_asymptote_with(spec, TraceOptions::default())
}

pub fn check_trace_asymptote_with<T: Real>(
    spec: &Spectrum<T>,
    opts: TraceOptions,
) -> Result<TraceReport<T>> {
    let n_modes = spec.len();
    if n_modes < 10 {
        return Err(Error::InvalidArgument(format!(
            "trace check needs at least 10 modes, got {n_modes}"
        )));
    }
    let coeffs = spec.coeffs();
    let rho_l = *coeffs.rho().last().expect("non-empty");
    let sigma_l = *coeffs.sigma().last().expect("non-empty");
    let quarter = T::lit(0.25);
    let limit =
        T::lit(2.0).sqrt() * spec.zeta_l / spec.zeta_norm * (rho_l / sigma_l).powf(quarter);
    if let Some(p) = spec.pairs().iter().find(|p| p.dphi_l == T::zero()) {
        return Err(Error::TraceMismatch(format!(
            "phi'(l) vanishes for mode {}",
            p.index
        )));
    }
    let ratios: Vec<T> = spec
        .pairs()
        .iter()
        .map(|p| p.dphi_l.abs() / p.lambda.powf(quarter))
        .collect();
    let tail_start = n_modes - (n_modes / 4).max(1);
    let tail = ratios[tail_start..].iter().copied().sum::<T>() / T::from_count(n_modes - tail_start);
    let m_hat = ratios.iter().copied().fold(T::infinity(), T::min);
    let big_m_hat = ratios.iter().copied().fold(T::zero(), T::max);
    let tol = T::lit(opts.tol);
    let first = opts.from_mode.min(n_modes);
    for (i, r) in ratios.iter().enumerate().skip(first - 1) {
        if ((*r - limit) / limit).abs() > tol {
            return Err(Error::TraceMismatch(format!(
                "mode {}: ratio {} vs limit {} (tolerance {})",
                i + 1,
                r.to_f64_lossy(),
                limit.to_f64_lossy(),
                opts.tol
            )));
        }
    }
    Ok(TraceReport {
        limit,
        ratios,
        tail,
        m_hat,
        big_m_hat,
    })
}
