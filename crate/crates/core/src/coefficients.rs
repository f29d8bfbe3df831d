//! Physical coefficients rho, sigma, q on `[0, l]`, the uniform grid, and the
//! derived quantities gamma and zeta.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Real;

/// Minimum number of grid intervals.
pub const MIN_INTERVALS: usize = 16;

/// A closed-form coefficient profile `x -> f(x)`.
#[derive(Clone)]
pub struct Profile<T> {
    label: String,
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Real> Profile<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        let v = T::lit(c);
        Self::new(format!("{c}"), move |_| v)
    }

    /// `a + b x`
    pub fn affine(a: f64, b: f64) -> Self {
        let (ta, tb) = (T::lit(a), T::lit(b));
        Self::new(format!("{a} + {b}*x"), move |x| ta + tb * x)
    }

    /// `a exp(k x)`
    pub fn exponential(a: f64, k: f64) -> Self {
        let (ta, tk) = (T::lit(a), T::lit(k));
        Self::new(format!("{a}*exp({k}*x)"), move |x| ta * (tk * x).exp())
    }

    /// `a (1 + eps sin(k x))`
    pub fn sine_perturbed(a: f64, eps: f64, k: f64) -> Self {
        let (ta, te, tk) = (T::lit(a), T::lit(eps), T::lit(k));
        Self::new(format!("{a}*(1 + {eps}*sin({k}*x))"), move |x| {
            ta * (T::one() + te * (tk * x).sin())
        })
    }

    pub fn from_expr(expr: Expr) -> Self {
        let label = expr.to_string();
        Self::new(label, move |x| expr.eval(x))
    }

    pub fn parse(src: &str) -> Result<Self> {
        let expr = Expr::parse(src)?;
        Ok(Self::new(src.trim(), move |x| expr.eval(x)))
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl<T> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile({})", self.label)
    }
}

/// Uniform grid `x_j = j h`, `j = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    m: usize,
    l: T,
    h: T,
}

impl<T: Real> Grid<T> {
    pub fn new(l: T, m: usize) -> Result<Self> {
        if m < MIN_INTERVALS {
            return Err(Error::GridTooCoarse {
                m,
                min: MIN_INTERVALS,
            });
        }
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::InvalidCoefficient(format!(
                "length l must be positive, got {l}"
            )));
        }
        Ok(Self {
            m,
            l,
            h: l / T::from_count(m),
        })
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> T {
        self.l
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    #[inline]
    pub fn node(&self, j: usize) -> T {
        if j == self.m {
            self.l
        } else {
            T::from_count(j) * self.h
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.m).map(|j| self.node(j)).collect()
    }

    pub fn sample(&self, p: &Profile<T>) -> Vec<T> {
        (0..=self.m).map(|j| p.eval(self.node(j))).collect()
    }
}

/// Unvalidated coefficient description.
#[derive(Debug, Clone)]
pub struct RawCoefficients<T> {
    pub grid: Grid<T>,
    pub rho: Profile<T>,
    pub sigma: Profile<T>,
    pub q: Profile<T>,
}

impl<T: Real> RawCoefficients<T> {
    pub fn new(l: T, m: usize, rho: Profile<T>, sigma: Profile<T>, q: Profile<T>) -> Result<Self> {
        Ok(Self {
            grid: Grid::new(l, m)?,
            rho,
            sigma,
            q,
        })
    }
}

/// Validated coefficients together with their nodal samples.
#[derive(Debug, Clone)]
pub struct CoefficientSet<T> {
    grid: Grid<T>,
    rho: Profile<T>,
    sigma: Profile<T>,
    q: Profile<T>,
    rho_s: Vec<T>,
    sigma_s: Vec<T>,
    q_s: Vec<T>,
    rho0: T,
    sigma0: T,
}

/// Checks positivity of rho, sigma and non-negativity of q at every node.
pub fn validate<T: Real>(raw: RawCoefficients<T>) -> Result<CoefficientSet<T>> {
    let RawCoefficients {
        grid,
        rho,
        sigma,
        q,
    } = raw;
    let rho_s = grid.sample(&rho);
    let sigma_s = grid.sample(&sigma);
    let q_s = grid.sample(&q);
    let x_at = |j: usize| grid.node(j).to_f64_lossy();
    if let Some(j) = rho_s.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::NonPositiveDensity { x: x_at(j) });
    }
    if let Some(j) = sigma_s.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::NonPositiveStiffness { x: x_at(j) });
    }
    if let Some(j) = q_s.iter().position(|v| !(*v >= T::zero())) {
        return Err(Error::NegativePotential { x: x_at(j) });
    }
    let min = |v: &[T]| v.iter().copied().fold(T::infinity(), T::min);
    let rho0 = min(&rho_s);
    let sigma0 = min(&sigma_s);
    Ok(CoefficientSet {
        grid,
        rho,
        sigma,
        q,
        rho_s,
        sigma_s,
        q_s,
        rho0,
        sigma0,
    })
}

impl<T: Real> CoefficientSet<T> {
    /// Builds and validates in one step.
    pub fn new(l: T, m: usize, rho: Profile<T>, sigma: Profile<T>, q: Profile<T>) -> Result<Self> {
        validate(RawCoefficients::new(l, m, rho, sigma, q)?)
    }

    /// rho = sigma = 1, q = 0.
    pub fn unit(l: T, m: usize) -> Result<Self> {
        Self::new(
            l,
            m,
            Profile::constant(1.0),
            Profile::constant(1.0),
            Profile::constant(0.0),
        )
    }

    /// Same profiles sampled on a different grid.
    pub fn regrid(&self, m: usize) -> Result<Self> {
        Self::new(
            self.grid.len(),
            m,
            self.rho.clone(),
            self.sigma.clone(),
            self.q.clone(),
        )
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn len(&self) -> T {
        self.grid.len()
    }

    pub fn rho(&self) -> &[T] {
        &self.rho_s
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma_s
    }

    pub fn q(&self) -> &[T] {
        &self.q_s
    }

    pub fn rho_profile(&self) -> &Profile<T> {
        &self.rho
    }

    pub fn sigma_profile(&self) -> &Profile<T> {
        &self.sigma
    }

    pub fn q_profile(&self) -> &Profile<T> {
        &self.q
    }

    pub fn rho0(&self) -> T {
        self.rho0
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    /// `q` sampled at the cell midpoints `x_{j+1/2}`, `j = 0..m`.
    pub fn q_midpoints(&self) -> Vec<T> {
        let h = self.grid.spacing();
        let half = T::lit(0.5);
        (0..self.grid.intervals())
            .map(|j| self.q.eval((T::from_count(j) + half) * h))
            .collect()
    }

    /// Largest scaled second difference `max |f_{j+1} - 2 f_j + f_{j-1}| / h^2`
    /// of the rho and sigma samples; stays bounded under refinement for C^2 data.
    pub fn second_difference_bound(&self) -> T {
        let h2 = self.grid.spacing() * self.grid.spacing();
        let d2 = |v: &[T]| {
            v.windows(3)
                .map(|w| ((w[2] - w[1] - w[1] + w[0]) / h2).abs())
                .fold(T::zero(), T::max)
        };
        d2(&self.rho_s).max(d2(&self.sigma_s))
    }
}

/// Composite Simpson quadrature of nodal samples on `grid`.
///
/// Even `m` uses Simpson's 1/3 rule throughout; odd `m` closes the last three
/// intervals with Simpson's 3/8 rule. Both are fourth order.
pub fn quadrature<T: Real>(f: &[T], grid: &Grid<T>) -> Result<T> {
    let w = quadrature_weights(grid);
    if f.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: f.len(),
        });
    }
    Ok(f.iter().zip(&w).map(|(a, b)| *a * *b).sum())
}

/// Nodal weights of the composite rule used by [`quadrature`].
pub fn quadrature_weights<T: Real>(grid: &Grid<T>) -> Vec<T> {
    let m = grid.intervals();
    let h = grid.spacing();
    let mut w = vec![T::zero(); m + 1];
    let simpson_end = if m % 2 == 0 { m } else { m - 3 };
    let third = h / T::lit(3.0);
    let mut j = 0;
    while j < simpson_end {
        w[j] += third;
        w[j + 1] += T::lit(4.0) * third;
        w[j + 2] += third;
        j += 2;
    }
    if m % 2 == 1 {
        let e = T::lit(3.0) * h / T::lit(8.0);
        let s = simpson_end;
        w[s] += e;
        w[s + 1] += T::lit(3.0) * e;
        w[s + 2] += T::lit(3.0) * e;
        w[s + 3] += e;
    }
    w
}

/// `gamma = int_0^l (rho/sigma)^{1/4} dx`.
pub fn gamma<T: Real>(coeffs: &CoefficientSet<T>) -> T {
    let quarter = T::lit(0.25);
    let f: Vec<T> = coeffs
        .rho()
        .iter()
        .zip(coeffs.sigma())
        .map(|(r, s)| (*r / *s).powf(quarter))
        .collect();
    quadrature(&f, coeffs.grid()).expect("samples aligned with grid")
}

/// Nodal samples of `zeta = (rho^{3/4} sigma^{1/4})^{-1/2}` and `||zeta||` in `L^2_rho`.
#[derive(Debug, Clone)]
pub struct Zeta<T> {
    pub values: Vec<T>,
    pub norm_rho: T,
}

impl<T: Real> Zeta<T> {
    pub fn at_right_end(&self) -> T {
        *self.values.last().expect("non-empty grid")
    }
}

pub fn zeta<T: Real>(coeffs: &CoefficientSet<T>) -> Zeta<T> {
    let (three_q, quarter, neg_half) = (T::lit(0.75), T::lit(0.25), T::lit(-0.5));
    let values: Vec<T> = coeffs
        .rho()
        .iter()
        .zip(coeffs.sigma())
        .map(|(r, s)| (r.powf(three_q) * s.powf(quarter)).powf(neg_half))
        .collect();
    let weighted: Vec<T> = values
        .iter()
        .zip(coeffs.rho())
        .map(|(z, r)| *r * *z * *z)
        .collect();
    let norm_rho = quadrature(&weighted, coeffs.grid())
        .expect("samples aligned with grid")
        .sqrt();
    Zeta { values, norm_rho }
}
