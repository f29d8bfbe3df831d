//! Eigenpairs of the hinged fourth-order problem
//! `(sigma phi'')'' - (q phi')' = lambda rho phi`, `phi = phi'' = 0` at both ends,
//! and numerical checks of their qualitative properties.

mod assembly;
mod checks;
mod eigen;
mod transform;

pub use assembly::{assemble, Operator};
pub use checks::{
    check_asymptotics, check_asymptotics_with, check_sign_condition, check_trace_asymptote,
    check_trace_asymptote_with, AsymptoticOptions, AsymptoticReport, SignReport, TraceOptions,
    TraceReport,
};
pub use eigen::{max_modes, solve_spectrum, solve_spectrum_with, EigenMethod, DEGENERACY_TOL};
pub use transform::{leighton_nehari_transform, Anchor, TransformData};

use crate::coefficients::{CoefficientSet, Grid};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One eigenpair with its boundary traces at `x = l`.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    /// 1-based mode number.
    pub index: usize,
    pub lambda: T,
    pub omega: T,
    /// Nodal values on the full grid, `L^2_rho`-normalized, zero at both ends.
    pub phi: Vec<T>,
    /// `phi'(l)`.
    pub dphi_l: T,
    /// `(sigma phi'')'(l) - q(l) phi'(l)`.
    pub tflux_l: T,
}

impl<T: Real> EigenPair<T> {
    pub fn sign_product(&self) -> T {
        self.dphi_l * self.tflux_l
    }

    pub fn interior(&self) -> &[T] {
        &self.phi[1..self.phi.len() - 1]
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    coeffs: CoefficientSet<T>,
    op: Operator<T>,
    pairs: Vec<EigenPair<T>>,
    pub gamma: T,
    pub zeta_l: T,
    pub zeta_norm: T,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[EigenPair<T>] {
        &self.pairs
    }

    /// Mode `n`, 1-based.
    pub fn mode(&self, n: usize) -> &EigenPair<T> {
        &self.pairs[n - 1]
    }

    pub fn coeffs(&self) -> &CoefficientSet<T> {
        &self.coeffs
    }

    pub fn grid(&self) -> &Grid<T> {
        self.coeffs.grid()
    }

    pub fn operator(&self) -> &Operator<T> {
        &self.op
    }

    pub fn lambdas(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn omegas(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.omega).collect()
    }

    pub fn traces(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.dphi_l).collect()
    }

    /// The first `n` modes only.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::TruncationMismatch {
                state: n,
                spectrum: self.len(),
            });
        }
        let mut s = self.clone();
        s.pairs.truncate(n);
        Ok(s)
    }

    /// Nodal field `sum_n c_n phi_n` on the full grid.
    pub fn synthesize(&self, c: &[T]) -> Vec<T> {
        assert!(c.len() <= self.len());
        let mut y = vec![T::zero(); self.grid().intervals() + 1];
        for (cn, p) in c.iter().zip(&self.pairs) {
            if *cn == T::zero() {
                continue;
            }
            for (yj, pj) in y.iter_mut().zip(&p.phi) {
                *yj += *cn * *pj;
            }
        }
        y
    }

    /// Discrete `L^2_rho` projections `<y, phi_n>` of a nodal field onto all modes.
    pub fn project(&self, nodal: &[T]) -> Vec<T> {
        let m = self.grid().intervals();
        assert_eq!(nodal.len(), m + 1);
        self.project_interior(&nodal[1..m])
    }

    /// As [`Spectrum::project`] for interior values only.
    pub fn project_interior(&self, inner: &[T]) -> Vec<T> {
        assert_eq!(inner.len(), self.grid().intervals() - 1);
        self.pairs
            .iter()
            .map(|p| self.op.inner_rho(inner, p.interior()))
            .collect()
    }

    /// Nodal second differences of mode `n` (1-based).
    pub fn second_derivative(&self, n: usize) -> Vec<T> {
        self.op.second_difference(self.mode(n).interior())
    }

    /// Number of discrete eigenvalues below `lambda`.
    pub fn count_below(&self, lambda: T) -> usize {
        self.op.count_below(lambda)
    }
}

#[cfg(test)]
mod tests;
