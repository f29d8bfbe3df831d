//! Hermitian positive-definite solves for the complex Gram systems of the
//! moment method.

use num_complex::Complex;

use crate::linalg::jacobi::symmetric_eigen;
use crate::scalar::Real;

/// `A = L L^*` for a Hermitian positive-definite row-major matrix.
#[derive(Debug, Clone)]
pub struct HermitianCholesky<T> {
    n: usize,
    l: Vec<Complex<T>>,
}

impl<T: Real> HermitianCholesky<T> {
    /// Returns `None` if a non-positive pivot is met.
    pub fn new(a: &[Complex<T>], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![Complex::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            let mut d = a[j * n + j].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > T::zero()) {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i].conj() * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// 2-norm condition number of a Hermitian matrix, from the spectrum of its
/// real symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn hermitian_condition<T: Real>(a: &[Complex<T>], n: usize) -> T {
    let m = 2 * n;
    let mut e = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            e[i * m + j] = z.re;
            e[(i + n) * m + (j + n)] = z.re;
            e[i * m + (j + n)] = -z.im;
            e[(i + n) * m + j] = z.im;
        }
    }
    let eig = symmetric_eigen(&e, m);
    let lo = eig.values.iter().fold(T::infinity(), |a, v| a.min(v.abs()));
    let hi = eig.values.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if lo > T::zero() {
        hi / lo
    } else {
        T::infinity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn solves_small_hermitian_system() {
        let a = vec![
            C::new(4.0, 0.0),
            C::new(1.0, 2.0),
            C::new(1.0, -2.0),
            C::new(6.0, 0.0),
        ];
        let x = vec![C::new(1.0, -1.0), C::new(0.5, 2.0)];
        let b = vec![a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        let ch = HermitianCholesky::new(&a, 2).unwrap();
        let y = ch.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-13);
        }
        // eigenvalues 5 +- sqrt(6)
        let k = hermitian_condition(&a, 2);
        let s6 = 6f64.sqrt();
        assert!((k - (5.0 + s6) / (5.0 - s6)).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let a = vec![C::new(1.0, 0.0), C::new(2.0, 0.0), C::new(2.0, 0.0), C::new(1.0, 0.0)];
        assert!(HermitianCholesky::new(&a, 2).is_none());
    }
}
