//! Finite-difference discretization of `y -> (sigma y'')'' - (q y')'` with
//! hinged ends, in factored form `D2^T diag(sigma) D2 + D1^T diag(q) D1`.
//!
//! Unknowns are the interior nodal values `y_1..y_{m-1}`; `y_0 = y_m = 0` and
//! `y''_0 = y''_m = 0` (ghost values `y_{-1} = -y_1`, `y_{m+1} = -y_{m-1}`).

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::linalg::SymBand;
use crate::scalar::Real;

/// Assembled stiffness `K` (half-bandwidth 2) and diagonal mass `B = diag(rho)`.
///
/// `K v = lambda B v` is the discrete eigenproblem; the discrete `L^2_rho`
/// inner product is `h * sum_j rho_j u_j v_j`.
#[derive(Debug, Clone)]
pub struct Operator<T> {
    h: T,
    stiffness: SymBand<T>,
    mass: Vec<T>,
    sigma: Vec<T>,
    q_mid: Vec<T>,
}

pub fn assemble<T: Real>(coeffs: &CoefficientSet<T>) -> Result<Operator<T>> {
    let grid = coeffs.grid();
    let m = grid.intervals();
    if m < crate::coefficients::MIN_INTERVALS {
        return Err(Error::GridTooCoarse {
            m,
            min: crate::coefficients::MIN_INTERVALS,
        });
    }
    let h = grid.spacing();
    let n = m - 1;
    let sigma = coeffs.sigma().to_vec();
    let q_mid = coeffs.q_midpoints();
    let mut k = SymBand::zeros(n, 2);
    let h2 = h * h;
    let h4 = h2 * h2;
    let two = T::lit(2.0);
    // D2 row at node j touches nodes j-1, j, j+1 with weights (1, -2, 1)/h^2.
    for j in 1..m {
        let s = sigma[j] / h4;
        let stencil = [(j - 1, T::one()), (j, -two), (j + 1, T::one())];
        for &(a, wa) in &stencil {
            if a == 0 || a == m {
                continue;
            }
            for &(b, wb) in &stencil {
                if b == 0 || b == m || b > a {
                    continue;
                }
                k.add(a - 1, b - 1, s * wa * wb);
            }
        }
    }
    // D1 row at midpoint j+1/2 touches nodes j, j+1 with weights (-1, 1)/h.
    for j in 0..m {
        let s = q_mid[j] / h2;
        if s == T::zero() {
            continue;
        }
        let stencil = [(j, -T::one()), (j + 1, T::one())];
        for &(a, wa) in &stencil {
            if a == 0 || a == m {
                continue;
            }
            for &(b, wb) in &stencil {
                if b == 0 || b == m || b > a {
                    continue;
                }
                k.add(a - 1, b - 1, s * wa * wb);
            }
        }
    }
    let mass = coeffs.rho()[1..m].to_vec();
    Ok(Operator {
        h,
        stiffness: k,
        mass,
        sigma,
        q_mid,
    })
}

impl<T: Real> Operator<T> {
    pub fn stiffness(&self) -> &SymBand<T> {
        &self.stiffness
    }

    /// Diagonal of `B` (rho at interior nodes).
    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    /// Number of interior unknowns.
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// `K - shift B`.
    pub fn shifted(&self, shift: T) -> SymBand<T> {
        let mut a = self.stiffness.clone();
        a.add_diagonal(&self.mass, -shift);
        a
    }

    /// Number of discrete eigenvalues strictly below `shift`.
    pub fn count_below(&self, shift: T) -> usize {
        self.shifted(shift).ldl().negative_count()
    }

    /// Nodal second differences `(D2 y)_j`, `j = 0..=m`, of interior data
    /// (zero at both ends by the hinged conditions).
    pub fn second_difference(&self, interior: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(interior.len(), n);
        let h2 = self.h * self.h;
        let at = |j: usize| {
            if j == 0 || j == n + 1 {
                T::zero()
            } else {
                interior[j - 1]
            }
        };
        let mut d = vec![T::zero(); n + 2];
        for j in 1..=n {
            d[j] = (at(j + 1) - at(j) - at(j) + at(j - 1)) / h2;
        }
        d
    }

    /// `u^T K v` evaluated through the factored form, which avoids the
    /// cancellation in the assembled fourth-difference stencil.
    pub fn energy_form(&self, u: &[T], v: &[T]) -> T {
        let du = self.second_difference(u);
        let dv = self.second_difference(v);
        let mut s = T::zero();
        for j in 1..du.len() - 1 {
            s += self.sigma[j] * du[j] * dv[j];
        }
        let n = self.dim();
        let at = |w: &[T], j: usize| {
            if j == 0 || j == n + 1 {
                T::zero()
            } else {
                w[j - 1]
            }
        };
        let h2 = self.h * self.h;
        for j in 0..=n {
            let qj = self.q_mid[j];
            if qj != T::zero() {
                s += qj * (at(u, j + 1) - at(u, j)) * (at(v, j + 1) - at(v, j)) / h2;
            }
        }
        s
    }

    /// `u^T B v`.
    pub fn mass_form(&self, u: &[T], v: &[T]) -> T {
        self.mass
            .iter()
            .zip(u.iter().zip(v))
            .map(|(b, (x, y))| *b * *x * *y)
            .sum()
    }

    /// Discrete `L^2_rho` inner product of interior data.
    pub fn inner_rho(&self, u: &[T], v: &[T]) -> T {
        self.h * self.mass_form(u, v)
    }

    /// Gershgorin bound on the spectrum of `B^{-1/2} K B^{-1/2}`.
    pub fn spectral_upper_bound(&self) -> T {
        let n = self.dim();
        let p = self.stiffness.half_bandwidth();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(p);
                let hi = (i + p).min(n - 1);
                (lo..=hi)
                    .map(|j| self.stiffness.get(i, j).abs() / (self.mass[i] * self.mass[j]).sqrt())
                    .sum::<T>()
            })
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Profile;

    #[test]
    fn constant_interior_stencil() {
        let c = CoefficientSet::<f64>::unit(1.0, 20).unwrap();
        let op = assemble(&c).unwrap();
        let h4 = op.spacing().powi(4);
        let k = op.stiffness();
        let row = 8;
        let got: Vec<f64> = (row - 2..=row + 2).map(|j| k.get(row, j) * h4).collect();
        for (g, e) in got.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
            assert!((g - e).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn hinged_first_row() {
        let c = CoefficientSet::<f64>::unit(1.0, 20).unwrap();
        let op = assemble(&c).unwrap();
        let h4 = op.spacing().powi(4);
        let k = op.stiffness();
        let n = op.dim();
        for (g, e) in [k.get(0, 0), k.get(0, 1), k.get(0, 2)].iter().zip([5.0, -4.0, 1.0]) {
            assert!((g * h4 - e).abs() < 1e-9);
        }
        for (g, e) in [k.get(n - 1, n - 1), k.get(n - 1, n - 2), k.get(n - 1, n - 3)]
            .iter()
            .zip([5.0, -4.0, 1.0])
        {
            assert!((g * h4 - e).abs() < 1e-9);
        }
    }

    #[test]
    fn ghost_elimination_matches_direct_stencil() {
        // y_{-1} = -y_1 turns (1,-4,6,-4,1) at node 1 into (5,-4,1)
        let c = CoefficientSet::<f64>::unit(1.0, 16).unwrap();
        let op = assemble(&c).unwrap();
        let h = op.spacing();
        let y: Vec<f64> = (1..16).map(|j| ((j as f64) * 0.3).sin()).collect();
        let ky = op.stiffness().matvec(&y);
        let ghost = -y[0];
        let direct = (ghost - 4.0 * 0.0 + 6.0 * y[0] - 4.0 * y[1] + y[2]) / h.powi(4);
        assert!((ky[0] - direct).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn factored_form_agrees_with_matrix() {
        let c = CoefficientSet::<f64>::new(
            1.3,
            40,
            Profile::affine(1.0, 0.5),
            Profile::exponential(1.0, 0.3),
            Profile::sine_perturbed(1.0, 0.5, 2.0),
        )
        .unwrap();
        let op = assemble(&c).unwrap();
        let u: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.21).cos()).collect();
        let v: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.13).sin()).collect();
        let kv = op.stiffness().matvec(&v);
        let direct: f64 = u.iter().zip(&kv).map(|(a, b)| a * b).sum();
        assert!((direct - op.energy_form(&u, &v)).abs() < 1e-9 * direct.abs());
    }

    #[test]
    fn exactly_symmetric() {
        let c = CoefficientSet::<f64>::new(
            1.0,
            30,
            Profile::affine(1.0, 1.0),
            Profile::sine_perturbed(2.0, 0.3, 5.0),
            Profile::affine(0.5, 2.0),
        )
        .unwrap();
        let op = assemble(&c).unwrap();
        let d = op.stiffness().to_dense();
        let n = op.dim();
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((d[i * n + j] - d[j * n + i]).abs());
            }
        }
        assert_eq!(asym, 0.0);
    }
}
