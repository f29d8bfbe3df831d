//! Symmetric banded matrices and their LDL^T factorization.
//!
//! The factorization is unpivoted. It is used for two things: solving with
//! SPD (or nearly SPD) shifted operators, and counting eigenvalues below a
//! shift through the inertia of `K - s B` (Sylvester's law).

use crate::scalar::Real;

/// Symmetric matrix with half-bandwidth `p`, lower triangle stored by rows:
/// `lower(i, k) = A[i][i - k]` for `k = 0..=p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand<T> {
    n: usize,
    p: usize,
    data: Vec<T>,
}

impl<T: Real> SymBand<T> {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            data: vec![T::zero(); n * (p + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.p
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.p {
            T::zero()
        } else {
            self.data[i * (self.p + 1) + k]
        }
    }

    /// Adds `v` to `A[i][j]` (and, implicitly, `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.p, "entry ({i}, {j}) outside band {}", self.p);
        self.data[i * (self.p + 1) + k] += v;
    }

    pub fn add_diagonal(&mut self, d: &[T], scale: T) {
        assert_eq!(d.len(), self.n);
        for (i, v) in d.iter().enumerate() {
            self.data[i * (self.p + 1)] += scale * *v;
        }
    }

    pub fn scale(&mut self, s: T) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.p + 1)..(i + 1) * (self.p + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.p.min(i) {
                let a = row[k];
                y[i] += a * x[i - k];
                y[i - k] += a * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n;
        let mut d = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }

    /// Unpivoted `A = L D L^T`.
    pub fn ldl(&self) -> LdlBand<T> {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        let mut l = vec![T::zero(); n * w];
        let mut d = vec![T::zero(); n];
        let scale = self
            .data
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        let pivmin = T::min_positive_value().max(scale * T::epsilon() * T::epsilon());
        for j in 0..n {
            let mut dj = self.data[j * w];
            for k in 1..=p.min(j) {
                let ljk = l[j * w + k];
                dj -= ljk * ljk * d[j - k];
            }
            if dj.abs() < pivmin {
                dj = -pivmin;
            }
            d[j] = dj;
            l[j * w] = T::one();
            for i in (j + 1)..n.min(j + p + 1) {
                let mut s = self.data[i * w + (i - j)];
                let lo = i.saturating_sub(p);
                for c in lo..j {
                    s -= l[i * w + (i - c)] * l[j * w + (j - c)] * d[c];
                }
                l[i * w + (i - j)] = s / dj;
            }
        }
        LdlBand { n, p, l, d }
    }
}

#[derive(Debug, Clone)]
pub struct LdlBand<T> {
    n: usize,
    p: usize,
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> LdlBand<T> {
    /// Number of negative pivots, i.e. of negative eigenvalues.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|v| **v < T::zero()).count()
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 1..=p.min(i) {
                s -= self.l[i * w + k] * x[i - k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in 1..=p.min(n - 1 - i) {
                s -= self.l[(i + k) * w + k] * x[i + k];
            }
            x[i] = s;
        }
        x
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let x = self.solve(b);
        b.copy_from_slice(&x);
    }
}
