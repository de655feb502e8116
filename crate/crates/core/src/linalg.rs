//! Small dense linear-algebra helpers shared by the cone oracle, the Newton
//! solver and certificate recovery.

use nalgebra::{DMatrix, DVector};

/// Lower Cholesky factor of a symmetric matrix, or `None` as soon as a pivot is
/// not strictly positive and finite. Only the lower triangle is read.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "cholesky of a non-square matrix");
    let mut l = a.clone();
    let data = l.as_mut_slice();
    for j in 0..n {
        let (done, rest) = data.split_at_mut(j * n);
        let col_j = &mut rest[..n];
        for k in 0..j {
            let col_k = &done[k * n..(k + 1) * n];
            let ljk = col_k[j];
            if ljk != 0.0 {
                for (dst, src) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                    *dst -= ljk * src;
                }
            }
        }
        let pivot = col_j[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return None;
        }
        let root = pivot.sqrt();
        col_j[j] = root;
        let inv = 1.0 / root;
        for v in &mut col_j[j + 1..] {
            *v *= inv;
        }
    }
    // zero the strict upper triangle
    for j in 1..n {
        for i in 0..j {
            data[j * n + i] = 0.0;
        }
    }
    Some(l)
}

/// `log det A` from its lower Cholesky factor.
pub fn logdet_from_cholesky(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Solves `L Lᵀ x = b` in place.
pub fn cholesky_solve_vec(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    l.solve_lower_triangular_mut(b);
    l.tr_solve_lower_triangular_mut(b);
}

/// Solves `L Lᵀ X = B` in place.
pub fn cholesky_solve_mat(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    l.solve_lower_triangular_mut(b);
    l.tr_solve_lower_triangular_mut(b);
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Double-double accumulator (error-free `TwoSum` / `fma`-based products).
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let s = self.hi + v;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (v - bp);
        self.hi = s;
        self.lo += err;
    }

    /// Adds the exact product `a * b`.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.lo += e;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}
