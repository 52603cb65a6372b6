//! Small dense factorizations for the LP engines.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub(crate) struct Dense {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U` with partial pivoting; L has a unit diagonal and is stored
/// below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub(crate) struct Lu {
    lu: Dense,
    perm: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot falls below `pivot_tol` in magnitude.
    pub fn factor(mut a: Dense, pivot_tol: f64) -> Option<Self> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = math::abs(a.at(k, k));
            for i in k + 1..n {
                let v = math::abs(a.at(i, k));
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= pivot_tol {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a.at(k, k);
            for i in k + 1..n {
                let f = a.at(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                *a.at_mut(i, k) = f;
                for j in k + 1..n {
                    let v = a.at(k, j);
                    *a.at_mut(i, j) -= f * v;
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.lu.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.at(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.at(i, j) * x[j];
            }
            x[i] = s / self.lu.at(i, i);
        }
        b.copy_from_slice(&x);
    }

    /// Solves `Aᵀ y = c` in place.
    pub fn solve_transpose(&self, c: &mut [f64]) {
        let n = self.lu.n;
        // Uᵀ z = c
        let mut z = c.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu.at(j, i) * z[j];
            }
            z[i] = s / self.lu.at(i, i);
        }
        // Lᵀ w = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu.at(j, i) * z[j];
            }
            z[i] = s;
        }
        // y = Pᵀ w
        for (k, &p) in self.perm.iter().enumerate() {
            c[p] = z[k];
        }
    }
}

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
/// Pivots below `floor` are replaced by a large value, which effectively
/// drops the corresponding direction (standard IPM safeguard).
pub(crate) struct Cholesky {
    l: Dense,
}

impl Cholesky {
    pub fn factor(mut a: Dense, floor: f64) -> Self {
        let n = a.n;
        for j in 0..n {
            let mut d = a.at(j, j);
            for k in 0..j {
                d -= a.at(j, k) * a.at(j, k);
            }
            let d = if d <= floor { 1e64 } else { math::sqrt(d) };
            *a.at_mut(j, j) = d;
            for i in j + 1..n {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= a.at(i, k) * a.at(j, k);
                }
                *a.at_mut(i, j) = s / d;
            }
        }
        Self { l: a }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.l.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.at(i, k) * b[k];
            }
            b[i] = s / self.l.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l.at(k, i) * b[k];
            }
            b[i] = s / self.l.at(i, i);
        }
    }
}
