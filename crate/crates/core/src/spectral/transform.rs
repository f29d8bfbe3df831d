//! Positive solution of `(sigma h')' = q h` and the induced substitution
//! `s(x) = l * int_0^x h / int_0^l h`.

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Where the initial conditions `h = 1, h' = 0` are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchor {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct TransformData<T> {
    pub x: Vec<T>,
    pub h: Vec<T>,
    /// `h'` on the grid.
    pub dh: Vec<T>,
    pub s: Vec<T>,
}

impl<T: Real> TransformData<T> {
    /// Largest `|s(x_j) - x_j|`.
    pub fn identity_defect(&self) -> T {
        self.s
            .iter()
            .zip(&self.x)
            .map(|(s, x)| (*s - *x).abs())
            .fold(T::zero(), T::max)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.s.windows(2).all(|w| w[1] > w[0])
    }
}

/// Integrates the system `h' = p / sigma`, `p' = q h`, `S' = h` with classical
/// RK4 on the coefficient grid.
pub fn leighton_nehari_transform<T: Real>(
    coeffs: &CoefficientSet<T>,
    anchor: Anchor,
) -> Result<TransformData<T>> {
    let grid = coeffs.grid();
    let m = grid.intervals();
    let x = grid.nodes();
    let sigma = coeffs.sigma_profile();
    let q = coeffs.q_profile();
    let rhs = |t: T, y: [T; 3]| -> [T; 3] { [y[1] / sigma.eval(t), q.eval(t) * y[0], y[0]] };

    let (dx, order): (T, Vec<usize>) = match anchor {
        Anchor::Left => (grid.spacing(), (0..=m).collect()),
        Anchor::Right => (-grid.spacing(), (0..=m).rev().collect()),
    };
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut h = vec![T::zero(); m + 1];
    let mut p = vec![T::zero(); m + 1];
    let mut big_s = vec![T::zero(); m + 1];
    let mut y = [T::one(), T::zero(), T::zero()];
    let first = order[0];
    h[first] = y[0];
    p[first] = y[1];
    for w in order.windows(2) {
        let t = x[w[0]];
        let k1 = rhs(t, y);
        let k2 = rhs(t + half * dx, axpy(y, half * dx, k1));
        let k3 = rhs(t + half * dx, axpy(y, half * dx, k2));
        let k4 = rhs(t + dx, axpy(y, dx, k3));
        for i in 0..3 {
            y[i] += dx * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        let j = w[1];
        h[j] = y[0];
        p[j] = y[1];
        big_s[j] = y[2];
        if !(y[0] > T::zero()) {
            return Err(Error::NonPositiveH { x: x[j].to_f64_lossy() });
        }
    }
    // for the right anchor S was accumulated from l, shift to start at 0
    let s0 = big_s[0];
    let total = big_s[m] - s0;
    let l = grid.len();
    let s: Vec<T> = big_s.iter().map(|v| l * (*v - s0) / total).collect();
    let dh: Vec<T> = p
        .iter()
        .zip(coeffs.sigma())
        .map(|(pj, sj)| *pj / *sj)
        .collect();
    Ok(TransformData { x, h, dh, s })
}

fn axpy<T: Real>(y: [T; 3], a: T, k: [T; 3]) -> [T; 3] {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]]
}
