//! Interpolation point sets, tensor Chebyshev Vandermonde matrices, column
//! orthonormalization and box quadrature weights.
//!
//! Multivariate bases are indexed by multi-indices `α` with `|α| ≤ deg` in
//! graded lexicographic order: total degree ascending, and within one degree
//! lexicographically descending (`x₁` first), e.g. for `n = 2`:
//! `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), …`.

mod fekete;

pub use fekete::approx_fekete_points;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::binomial;

/// Axis-aligned box `[ℓ₁,u₁] × … × [ℓₙ,uₙ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Dimension(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::InvalidArgument(format!(
                "box side {j} is empty: [{}, {}]",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[-1, 1]ⁿ`.
    pub fn reference(n: usize) -> Self {
        Self {
            lower: vec![-1.0; n],
            upper: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    /// Maps a point of this box to `[-1, 1]ⁿ`.
    pub fn to_reference(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| 2.0 * (x - l) / (u - l) - 1.0)
            .collect()
    }

    /// Maps a point of `[-1, 1]ⁿ` into this box.
    pub fn from_reference(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&l, &u))| l + (u - l) * (x + 1.0) / 2.0)
            .collect()
    }

    pub fn contains(&self, t: &[f64], tol: f64) -> bool {
        t.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&x, (&l, &u))| {
            let slack = tol * (u - l);
            x >= l - slack && x <= u + slack
        })
    }
}

/// An ordered set of points inside a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
    domain: BoxDomain,
}

impl PointSet {
    /// Validates that every point has the box dimension, lies in the (closed)
    /// box, and that the points are pairwise distinct.
    pub fn new(points: Vec<Vec<f64>>, domain: BoxDomain) -> Result<Self> {
        let n = domain.dim();
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty point set".into()));
        }
        for (u, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::Dimension(format!(
                    "point {u} has {} coordinates, box has {n}",
                    p.len()
                )));
            }
            if !domain.contains(p, 1e-12) {
                return Err(Error::InvalidArgument(format!("point {u} lies outside the box")));
            }
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("point set has duplicate points".into()));
        }
        Ok(Self { points, domain })
    }

    pub(crate) fn new_unchecked(points: Vec<Vec<f64>>, domain: BoxDomain) -> Self {
        Self { points, domain }
    }

    pub fn n(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }
}

/// Values of basis polynomials at points: rows are points, columns basis
/// functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    pub values: DMatrix<f64>,
    pub orthonormal: bool,
}

impl BasisMatrix {
    pub fn new(values: DMatrix<f64>) -> Self {
        Self {
            values,
            orthonormal: false,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// Dimension of the space of `n`-variate polynomials of total degree `≤ deg`.
pub fn poly_space_dim(n: usize, deg: usize) -> usize {
    binomial(n + deg, n)
}

/// All multi-indices of length `n` with `|α| ≤ deg`, graded lexicographic.
pub fn multi_indices(n: usize, deg: usize) -> Vec<Vec<usize>> {
    fn fill(n: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            fill(n - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(poly_space_dim(n, deg));
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    for total in 0..=deg {
        fill(n, total, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// `T₀(t), …, T_deg(t)` by the three-term recurrence.
pub fn chebyshev_values(t: f64, deg: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(deg + 1);
    out.push(1.0);
    if deg >= 1 {
        out.push(t);
    }
    for k in 2..=deg {
        let next = 2.0 * t * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

/// Chebyshev points of the first kind, `cos((ℓ + ½)π/(d + 1))`, `ℓ = 0..=d`.
pub fn cheb1_points(d: usize) -> PointSet {
    let pts = (0..=d)
        .map(|l| vec![((l as f64 + 0.5) * PI / (d as f64 + 1.0)).cos()])
        .collect();
    PointSet::new_unchecked(pts, BoxDomain::reference(1))
}

/// Raw Chebyshev points of the second kind, `cos(ℓπ/d)`, `ℓ = 0..=d`.
pub(crate) fn cheb2_values(d: usize) -> Vec<f64> {
    (0..=d)
        .map(|l| {
            // exact endpoints and midpoint; cos(π/2) is not exactly zero in floating point
            if 2 * l == d {
                0.0
            } else {
                (l as f64 * PI / d as f64).cos()
            }
        })
        .collect()
}

/// Chebyshev points of the second kind (Chebyshev–Lobatto), including `±1`.
pub fn cheb2_points(d: usize) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "second-kind Chebyshev points need degree >= 1".into(),
        ));
    }
    let pts = cheb2_values(d).into_iter().map(|t| vec![t]).collect();
    Ok(PointSet::new_unchecked(pts, BoxDomain::reference(1)))
}

/// Padua points of degree `d` on `[-1, 1]²`: `(C_d^E × C_{d+1}^O) ∪ (C_d^O × C_{d+1}^E)`
/// where `E`/`O` select even/odd indices of the second-kind Chebyshev points.
pub fn padua_points(d: usize) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidArgument("Padua points need degree >= 1".into()));
    }
    let first = cheb2_values(d);
    let second = cheb2_values(d + 1);
    let mut pts = Vec::with_capacity((d + 1) * (d + 2) / 2);
    for parity in [0, 1] {
        for &a in first.iter().skip(parity).step_by(2) {
            for &b in second.iter().skip(1 - parity).step_by(2) {
                pts.push(vec![a, b]);
            }
        }
    }
    Ok(PointSet::new_unchecked(pts, BoxDomain::reference(2)))
}

/// Tensor Chebyshev Vandermonde matrix: entry `(u, j)` is `T_{α_j}` evaluated
/// at point `u` after mapping the point set's box onto `[-1, 1]ⁿ`.
pub fn cheb_vandermonde(pts: &PointSet, deg: usize) -> BasisMatrix {
    let n = pts.n();
    let indices = multi_indices(n, deg);
    let mut v = DMatrix::zeros(pts.len(), indices.len());
    for (u, p) in pts.points().iter().enumerate() {
        let r = pts.domain().to_reference(p);
        let tables: Vec<Vec<f64>> = r.iter().map(|&t| chebyshev_values(t, deg)).collect();
        for (j, alpha) in indices.iter().enumerate() {
            v[(u, j)] = alpha
                .iter()
                .enumerate()
                .map(|(k, &a)| tables[k][a])
                .product();
        }
    }
    BasisMatrix::new(v)
}

/// Affinely maps a point set from its current box onto `target`.
pub fn scale_to_box(pts: &PointSet, target: &BoxDomain) -> Result<PointSet> {
    if target.dim() != pts.n() {
        return Err(Error::Dimension(format!(
            "box dimension {} does not match point dimension {}",
            target.dim(),
            pts.n()
        )));
    }
    let mapped = pts
        .points()
        .iter()
        .map(|p| target.from_reference(&pts.domain().to_reference(p)))
        .collect();
    Ok(PointSet::new_unchecked(mapped, target.clone()))
}

/// Orthonormal basis of the column span of `m` (thin QR). Fails when the
/// columns are numerically dependent, which for a Vandermonde matrix means the
/// points are not unisolvent.
pub fn orthonormalize(m: &BasisMatrix) -> Result<BasisMatrix> {
    let (rows, cols) = m.values.shape();
    if cols == 0 || rows < cols {
        return Err(Error::NotUnisolvent(format!(
            "{rows}x{cols} matrix cannot have full column rank"
        )));
    }
    let scale = m.values.norm();
    let qr = m.values.clone().qr();
    let r = qr.r();
    if let Some(j) = (0..cols).find(|&j| !(r[(j, j)].abs() > 1e-12 * scale)) {
        return Err(Error::NotUnisolvent(format!(
            "column {j} is numerically dependent (|r_jj| = {:e})",
            r[(j, j)].abs()
        )));
    }
    Ok(BasisMatrix {
        values: qr.q(),
        orthonormal: true,
    })
}

/// `∫_{-1}^{1} T_k(t) dt`.
pub fn chebyshev_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (k * k) as f64)
    }
}

/// Quadrature weights `w` with `Σ w_u p(t_u) = ∫_box p` for every polynomial of
/// total degree `≤ deg`, obtained by matching tensor Chebyshev moments.
pub fn box_quadrature_weights(pts: &PointSet, deg: usize) -> Result<DVector<f64>> {
    let v = cheb_vandermonde(pts, deg).values;
    if v.nrows() != v.ncols() {
        return Err(Error::NotUnisolvent(format!(
            "{} points for a polynomial space of dimension {}",
            v.nrows(),
            v.ncols()
        )));
    }
    let jac: f64 = pts
        .domain()
        .lower
        .iter()
        .zip(&pts.domain().upper)
        .map(|(l, u)| (u - l) / 2.0)
        .product();
    let moments = DVector::from_iterator(
        v.ncols(),
        multi_indices(pts.n(), deg)
            .iter()
            .map(|alpha| jac * alpha.iter().map(|&a| chebyshev_moment(a)).product::<f64>()),
    );
    solve_square(&v.transpose(), &moments)
        .ok_or_else(|| Error::NotUnisolvent("Vandermonde matrix is singular".into()))
}

/// LU solve that refuses numerically singular systems.
pub(crate) fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let big = u.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if u.diagonal().iter().any(|v| !(v.abs() > 1e-13 * big)) {
        return None;
    }
    lu.solve(b)
}

/// Ratio of the smallest to the largest singular value of the square
/// Vandermonde matrix of `pts` at degree `deg` (0 when not square).
pub fn vandermonde_inverse_condition(pts: &PointSet, deg: usize) -> f64 {
    let v = cheb_vandermonde(pts, deg).values;
    if v.nrows() != v.ncols() {
        return 0.0;
    }
    let sv = v.singular_values();
    let max = sv.max();
    let min = sv.min();
    if max > 0.0 {
        min / max
    } else {
        0.0
    }
}

/// Point family used for a given dimension: second-kind Chebyshev (`n = 1`),
/// Padua (`n = 2`), approximate Fekete (`n ≥ 3`). The result is unisolvent
/// for total degree `deg` on `domain`.
pub fn standard_points(n: usize, deg: usize, domain: &BoxDomain) -> Result<PointSet> {
    if domain.dim() != n {
        return Err(Error::Dimension(format!("box of dimension {} for n = {n}", domain.dim())));
    }
    if deg == 0 {
        let mid = domain.from_reference(&vec![0.0; n]);
        return Ok(PointSet::new_unchecked(vec![mid], domain.clone()));
    }
    let reference = match n {
        0 => return Err(Error::InvalidArgument("dimension must be >= 1".into())),
        1 => cheb2_points(deg)?,
        2 => padua_points(deg)?,
        _ => return approx_fekete_points(n, deg, domain),
    };
    scale_to_box(&reference, domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(p: &PointSet) -> Vec<f64> {
        p.points().iter().map(|x| x[0]).collect()
    }

    #[test]
    fn multi_index_order() {
        let idx = multi_indices(2, 2);
        assert_eq!(
            idx,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(multi_indices(3, 12).len(), 455);
    }

    #[test]
    fn cheb1_small_degrees() {
        assert!(coords(&cheb1_points(0))[0].abs() < 1e-15);
        let h = 2f64.sqrt() / 2.0;
        let p = coords(&cheb1_points(1));
        assert!((p[0] - h).abs() < 1e-15 && (p[1] + h).abs() < 1e-15);
        let r3 = 3f64.sqrt() / 2.0;
        let p = coords(&cheb1_points(2));
        assert!((p[0] - r3).abs() < 1e-15 && p[1].abs() < 1e-15 && (p[2] + r3).abs() < 1e-15);
    }

    #[test]
    fn cheb2_small_degrees() {
        assert!(cheb2_points(0).is_err());
        assert_eq!(coords(&cheb2_points(1).unwrap()), vec![1.0, -1.0]);
        assert_eq!(coords(&cheb2_points(2).unwrap()), vec![1.0, 0.0, -1.0]);
        let h = 2f64.sqrt() / 2.0;
        let p = coords(&cheb2_points(4).unwrap());
        let expect = [1.0, h, 0.0, -h, -1.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn padua_degree_one() {
        let p = padua_points(1).unwrap();
        let pts = p.points();
        assert_eq!(pts.len(), 3);
        let expect = [[1.0, 0.0], [-1.0, 1.0], [-1.0, -1.0]];
        for (a, b) in pts.iter().zip(expect) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
        assert_eq!(padua_points(2).unwrap().len(), 6);
        assert_eq!(padua_points(20).unwrap().len(), 231);
    }

    #[test]
    fn vandermonde_small() {
        let pts = PointSet::new(vec![vec![0.0]], BoxDomain::reference(1)).unwrap();
        let v = cheb_vandermonde(&pts, 2).values;
        assert_eq!(v.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, -1.0]);
        let v = cheb_vandermonde(&cheb2_points(1).unwrap(), 1).values;
        assert_eq!(v, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]));
    }

    #[test]
    fn scale_examples() {
        let unit = BoxDomain::new(vec![0.0], vec![1.0]).unwrap();
        let p = scale_to_box(&cheb2_points(2).unwrap(), &unit).unwrap();
        assert_eq!(coords(&p), vec![1.0, 0.5, 0.0]);
        let same = scale_to_box(&cheb2_points(2).unwrap(), &BoxDomain::reference(1)).unwrap();
        assert_eq!(coords(&same), vec![1.0, 0.0, -1.0]);
        let src = PointSet::new(vec![vec![1.0, 0.0]], BoxDomain::reference(2)).unwrap();
        let dst = BoxDomain::new(vec![-1.0, -0.1], vec![0.0, 0.9]).unwrap();
        let p = scale_to_box(&src, &dst).unwrap();
        assert!((p.points()[0][0] - 0.0).abs() < 1e-15);
        assert!((p.points()[0][1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn orthonormalize_examples() {
        let eye = BasisMatrix::new(DMatrix::identity(3, 3));
        let q = orthonormalize(&eye).unwrap().values;
        assert!((q.abs() - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-15);
        let two = BasisMatrix::new(DMatrix::identity(3, 3) * 2.0);
        let q = orthonormalize(&two).unwrap().values;
        assert!((q.abs() - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-15);
        let singular = BasisMatrix::new(DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]));
        assert!(matches!(orthonormalize(&singular), Err(Error::NotUnisolvent(_))));
    }

    #[test]
    fn quadrature_small_cases() {
        let pts = PointSet::new(vec![vec![0.0]], BoxDomain::reference(1)).unwrap();
        let w = box_quadrature_weights(&pts, 0).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-15);
        assert!((chebyshev_moment(2) + 2.0 / 3.0).abs() < 1e-15);
        let pts = cheb2_points(8).unwrap();
        let w = box_quadrature_weights(&pts, 8).unwrap();
        assert!((w.sum() - 2.0).abs() < 1e-12);
        let second: f64 = w.iter().zip(pts.points()).map(|(w, p)| w * p[0] * p[0]).sum();
        assert!((second - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fewer_points_than_space_is_rejected() {
        let pts = cheb2_points(2).unwrap();
        assert!(box_quadrature_weights(&pts, 3).is_err());
    }
}
