//! The dual weighted-SOS cone in the interpolant basis and its log-det barrier.
//!
//! A point `x ∈ ℝᵁ` (one value per interpolation point) lies in the interior
//! of the cone iff every block matrix `Λᵢ(x) = P̃ᵢᵀ diag(x) P̃ᵢ` is positive
//! definite, where `P̃ᵢ = diag(√gᵢ(t_u)) Pᵢ` and `Pᵢ` has orthonormal columns
//! spanning polynomials of degree `dᵢ`. The barrier is
//! `F(x) = −Σᵢ ln det Λᵢ(x)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolation::{cheb_vandermonde, orthonormalize, poly_space_dim, PointSet};
use crate::linalg::{cholesky_lower, cholesky_solve_mat, cholesky_solve_vec, logdet_from_cholesky};

/// Weight polynomial `gᵢ` of a WSOS block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `g = 1`
    Unit,
    /// `g(t) = (upper − t_dim)(t_dim − lower)`
    Interval { dim: usize, lower: f64, upper: f64 },
}

impl Weight {
    pub fn degree(&self) -> usize {
        match self {
            Weight::Unit => 0,
            Weight::Interval { .. } => 2,
        }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match *self {
            Weight::Unit => 1.0,
            Weight::Interval { dim, lower, upper } => (upper - t[dim]) * (t[dim] - lower),
        }
    }

    /// Magnitude of the weight on its interval, used to tell round-off from a
    /// genuinely negative value.
    fn scale(&self) -> f64 {
        match *self {
            Weight::Unit => 1.0,
            Weight::Interval { lower, upper, .. } => 0.25 * (upper - lower).powi(2),
        }
    }
}

/// One WSOS block: the scaled basis matrix `P̃ᵢ` plus descriptive metadata
/// (absent for cones read back from a problem file).
#[derive(Debug, Clone, PartialEq)]
pub struct WsosBlock {
    pub weight: Option<Weight>,
    pub degree: Option<usize>,
    p_scaled: DMatrix<f64>,
}

impl WsosBlock {
    /// `U × Lᵢ`
    pub fn p_scaled(&self) -> &DMatrix<f64> {
        &self.p_scaled
    }

    pub fn size(&self) -> usize {
        self.p_scaled.ncols()
    }
}

/// Dual WSOS cone at `U` interpolation points.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpWsosCone {
    u: usize,
    blocks: Vec<WsosBlock>,
}

impl InterpWsosCone {
    /// Builds the blocks for weights `gᵢ` and degrees `dᵢ` at `pts`. The point
    /// count must be the dimension of some polynomial space of degree `D` with
    /// `2dᵢ + deg gᵢ ≤ D` for every block.
    pub fn build(pts: &PointSet, weights: &[Weight], degrees: &[usize]) -> Result<Self> {
        if weights.len() != degrees.len() || weights.is_empty() {
            return Err(Error::Dimension(format!(
                "{} weights for {} degrees",
                weights.len(),
                degrees.len()
            )));
        }
        let n = pts.n();
        let u = pts.len();
        let top = weights
            .iter()
            .zip(degrees)
            .map(|(w, &d)| 2 * d + w.degree())
            .max()
            .unwrap_or(0);
        let mut space = 0;
        while poly_space_dim(n, space) < u {
            space += 1;
        }
        if poly_space_dim(n, space) != u || top > space {
            return Err(Error::Degree {
                found: top,
                max: if poly_space_dim(n, space) == u { space } else { 0 },
            });
        }
        for w in weights {
            if let Weight::Interval { dim, .. } = w {
                if *dim >= n {
                    return Err(Error::Dimension(format!("weight refers to coordinate {dim} of {n}")));
                }
            }
        }
        let mut blocks = Vec::with_capacity(weights.len());
        for (i, (w, &d)) in weights.iter().zip(degrees).enumerate() {
            let mut p = orthonormalize(&cheb_vandermonde(pts, d))?.values;
            for (row, t) in pts.points().iter().enumerate() {
                let mut g = w.eval(t);
                if g < 0.0 {
                    if g >= -1e-12 * w.scale() {
                        g = 0.0;
                    } else {
                        return Err(Error::NegativeWeight {
                            block: i,
                            point: row,
                            value: g,
                        });
                    }
                }
                let root = g.sqrt();
                p.row_mut(row).iter_mut().for_each(|v| *v *= root);
            }
            blocks.push(WsosBlock {
                weight: Some(w.clone()),
                degree: Some(d),
                p_scaled: p,
            });
        }
        let cone = Self { u, blocks };
        cone.check_full_rank()?;
        Ok(cone)
    }

    /// Cone from already scaled `U × Lᵢ` block matrices.
    pub fn from_scaled_blocks(u: usize, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Dimension("cone without blocks".into()));
        }
        for (i, p) in blocks.iter().enumerate() {
            if p.nrows() != u || p.ncols() == 0 || p.ncols() > u {
                return Err(Error::Dimension(format!(
                    "block {i} is {}x{}, expected {u} rows and 1..={u} columns",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("block {i} has non-finite entries")));
            }
        }
        let cone = Self {
            u,
            blocks: blocks
                .into_iter()
                .map(|p| WsosBlock {
                    weight: None,
                    degree: None,
                    p_scaled: p,
                })
                .collect(),
        };
        cone.check_full_rank()?;
        Ok(cone)
    }

    fn check_full_rank(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            let sv = b.p_scaled.singular_values();
            if !(sv.min() > 1e-12 * sv.max()) {
                return Err(Error::NotUnisolvent(format!(
                    "scaled basis matrix of block {i} is rank deficient"
                )));
            }
        }
        Ok(())
    }

    /// Ambient dimension `U`.
    pub fn dim(&self) -> usize {
        self.u
    }

    pub fn blocks(&self) -> &[WsosBlock] {
        &self.blocks
    }

    /// `ν = Σ Lᵢ`.
    pub fn barrier_parameter(&self) -> usize {
        self.blocks.iter().map(WsosBlock::size).sum()
    }

    /// `Λᵢ(x) = P̃ᵢᵀ diag(x) P̃ᵢ`.
    pub fn lambda(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        let p = &self.blocks[i].p_scaled;
        let mut scaled = p.clone();
        for (mut row, &xv) in scaled.row_iter_mut().zip(x.iter()) {
            row *= xv;
        }
        let mut out = scaled.tr_mul(p);
        crate::linalg::symmetrize(&mut out);
        out
    }

    /// `Λᵢ*(S) = diag(P̃ᵢ S P̃ᵢᵀ)`.
    pub fn lambda_adjoint(&self, i: usize, s: &DMatrix<f64>) -> DVector<f64> {
        let p = &self.blocks[i].p_scaled;
        let ps = p * s;
        DVector::from_iterator(
            self.u,
            (0..self.u).map(|r| ps.row(r).dot(&p.row(r))),
        )
    }

    /// Cholesky factors of every `Λᵢ(x)`, or `None` when `x` is not interior.
    pub fn factor(&self, x: &DVector<f64>) -> Option<Vec<DMatrix<f64>>> {
        if x.len() != self.u || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        (0..self.blocks.len())
            .map(|i| cholesky_lower(&self.lambda(i, x)))
            .collect()
    }

    pub fn in_interior(&self, x: &DVector<f64>) -> bool {
        self.factor(x).is_some()
    }

    /// Barrier value, gradient and Hessian at an interior point.
    pub fn barrier(&self, x: &DVector<f64>) -> Result<BarrierEval> {
        let factors = self.factor(x).ok_or(Error::NotInterior)?;
        let u = self.u;
        let mut value = 0.0;
        let mut gradient = DVector::zeros(u);
        let mut hessian = DMatrix::zeros(u, u);
        let mut vs = Vec::with_capacity(self.blocks.len());
        for (block, l) in self.blocks.iter().zip(&factors) {
            value -= logdet_from_cholesky(l);
            let mut v = block.p_scaled.transpose();
            l.solve_lower_triangular_mut(&mut v);
            let q = v.tr_mul(&v);
            for j in 0..u {
                gradient[j] -= q[(j, j)];
            }
            for (h, e) in hessian.as_mut_slice().iter_mut().zip(q.as_slice()) {
                *h += e * e;
            }
            vs.push(v);
        }
        let hess_chol = match cholesky_lower(&hessian).filter(|l| well_scaled_diagonal(l)) {
            Some(l) => l,
            None => khatri_rao_factor(&vs, u).ok_or_else(|| {
                Error::Numerical("barrier Hessian is not numerically positive definite".into())
            })?,
        };
        Ok(BarrierEval {
            value,
            gradient,
            hessian,
            hess_chol,
            lambda_chol: factors,
        })
    }

    /// `Σᵢ (P̃ᵢP̃ᵢᵀ)^{∘2}`, the Gram matrix of the linear map `x ↦ (Λᵢ(x))ᵢ`.
    pub fn lambda_operator_gram(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.u, self.u);
        for b in &self.blocks {
            let pp = &b.p_scaled * b.p_scaled.transpose();
            out += pp.component_mul(&pp);
        }
        out
    }
}

/// Barrier derivatives at one point, with factorizations for reuse.
#[derive(Debug, Clone)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    hess_chol: DMatrix<f64>,
    lambda_chol: Vec<DMatrix<f64>>,
}

impl BarrierEval {
    /// `H⁻¹ v`.
    pub fn hess_inv_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v.clone();
        cholesky_solve_vec(&self.hess_chol, &mut out);
        out
    }

    /// `H⁻¹ M`.
    pub fn hess_inv_apply_mat(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = m.clone();
        cholesky_solve_mat(&self.hess_chol, &mut out);
        out
    }

    /// Lower Cholesky factor of the Hessian.
    pub fn hess_chol(&self) -> &DMatrix<f64> {
        &self.hess_chol
    }

    /// Lower Cholesky factors of the `Λᵢ(x)`.
    pub fn lambda_chol(&self) -> &[DMatrix<f64>] {
        &self.lambda_chol
    }
}

/// Cartesian product of dual WSOS cones over a concatenated variable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCone {
    factors: Vec<InterpWsosCone>,
    offsets: Vec<usize>,
}

impl ProductCone {
    pub fn new(factors: Vec<InterpWsosCone>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("product cone without factors".into()));
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut at = 0;
        for f in &factors {
            offsets.push(at);
            at += f.dim();
        }
        offsets.push(at);
        Ok(Self { factors, offsets })
    }

    pub fn single(cone: InterpWsosCone) -> Self {
        let dim = cone.dim();
        Self {
            factors: vec![cone],
            offsets: vec![0, dim],
        }
    }

    pub fn factors(&self) -> &[InterpWsosCone] {
        &self.factors
    }

    /// Start offset of every factor, followed by the total dimension.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn barrier_parameter(&self) -> usize {
        self.factors.iter().map(InterpWsosCone::barrier_parameter).sum()
    }

    /// The part of `x` belonging to factor `f`.
    pub fn slice(&self, x: &DVector<f64>, f: usize) -> DVector<f64> {
        x.rows(self.offsets[f], self.factors[f].dim()).into_owned()
    }

    pub fn in_interior(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && self
                .factors
                .iter()
                .enumerate()
                .all(|(f, c)| c.in_interior(&self.slice(x, f)))
    }

    /// Barrier of every factor at the matching slice of `x`.
    pub fn barrier(&self, x: &DVector<f64>) -> Result<ProductBarrier> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point of length {} for a cone of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let evals = self
            .factors
            .iter()
            .enumerate()
            .map(|(f, c)| c.barrier(&self.slice(x, f)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductBarrier {
            evals,
            offsets: self.offsets.clone(),
        })
    }
}

/// Barrier derivatives of a product cone; the Hessian is block diagonal.
#[derive(Debug, Clone)]
pub struct ProductBarrier {
    evals: Vec<BarrierEval>,
    offsets: Vec<usize>,
}

impl ProductBarrier {
    pub fn factors(&self) -> &[BarrierEval] {
        &self.evals
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn value(&self) -> f64 {
        self.evals.iter().map(|e| e.value).sum()
    }

    pub fn gradient(&self) -> DVector<f64> {
        let mut g = DVector::zeros(*self.offsets.last().unwrap());
        for (e, &o) in self.evals.iter().zip(&self.offsets) {
            g.rows_mut(o, e.gradient.len()).copy_from(&e.gradient);
        }
        g
    }

    fn blockwise(&self, v: &DVector<f64>, op: impl Fn(&BarrierEval, DVector<f64>) -> DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (e, &o) in self.evals.iter().zip(&self.offsets) {
            let n = e.gradient.len();
            let r = op(e, v.rows(o, n).into_owned());
            out.rows_mut(o, n).copy_from(&r);
        }
        out
    }

    pub fn hess_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.blockwise(v, |e, x| &e.hessian * x)
    }

    pub fn hess_inv_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.blockwise(v, |e, x| e.hess_inv_apply(&x))
    }

    /// Dense block-diagonal Hessian (test and diagnostic use).
    pub fn hessian_dense(&self) -> DMatrix<f64> {
        let n = *self.offsets.last().unwrap();
        let mut h = DMatrix::zeros(n, n);
        for (e, &o) in self.evals.iter().zip(&self.offsets) {
            let k = e.gradient.len();
            h.view_mut((o, o), (k, k)).copy_from(&e.hessian);
        }
        h
    }
}

/// A Cholesky diagonal spread beyond 1e8 means `cond(H) ≳ 1/ε`: the
/// factor of the formed `H` has lost its small eigenvalues.
fn well_scaled_diagonal(l: &DMatrix<f64>) -> bool {
    let d = l.diagonal();
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    lo > 1e-8 * hi
}

/// Lower factor of `H = Σᵢ (VᵢᵀVᵢ)^{∘2}` from a QR of the stacked rows
/// `(V_i[a,·] ∘ V_i[b,·])`, `a ≤ b` (off-diagonal pairs weighted by √2), so
/// that `H = KᵀK` is never squared up before factoring.
fn khatri_rao_factor(vs: &[DMatrix<f64>], u: usize) -> Option<DMatrix<f64>> {
    let rows: usize = vs.iter().map(|v| v.nrows() * (v.nrows() + 1) / 2).sum();
    if rows < u {
        return None;
    }
    let mut k = DMatrix::zeros(rows, u);
    let mut r = 0;
    for v in vs {
        for a in 0..v.nrows() {
            for b in a..v.nrows() {
                let w = if a == b { 1.0 } else { std::f64::consts::SQRT_2 };
                for j in 0..u {
                    k[(r, j)] = w * v[(a, j)] * v[(b, j)];
                }
                r += 1;
            }
        }
    }
    let mut l = k.qr().r().transpose();
    for j in 0..u {
        if l[(j, j)] == 0.0 || !l[(j, j)].is_finite() {
            return None;
        }
        if l[(j, j)] < 0.0 {
            l.column_mut(j).neg_mut();
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::{cheb2_points, padua_points, scale_to_box, BoxDomain};

    fn envelope_cone_1d(d: usize) -> InterpWsosCone {
        let pts = cheb2_points(2 * d).unwrap();
        InterpWsosCone::build(
            &pts,
            &[
                Weight::Interval {
                    dim: 0,
                    lower: -1.0,
                    upper: 1.0,
                },
                Weight::Unit,
            ],
            &[d - 1, d],
        )
        .unwrap()
    }

    #[test]
    fn block_sizes_and_parameter() {
        let c = envelope_cone_1d(5);
        assert_eq!(c.blocks()[0].size(), 5);
        assert_eq!(c.blocks()[1].size(), 6);
        assert_eq!(c.barrier_parameter(), 11);
        let single = InterpWsosCone::build(&cheb2_points(8).unwrap(), &[Weight::Unit], &[4]).unwrap();
        assert_eq!(single.barrier_parameter(), 5);
        let prod = ProductCone::new(vec![c.clone(), c.clone(), c]).unwrap();
        assert_eq!(prod.barrier_parameter(), 33);
        assert_eq!(prod.dim(), 33);
    }

    #[test]
    fn boundary_point_gives_zero_row() {
        let c = envelope_cone_1d(3);
        // cheb2 points include t = 1 and t = -1 where 1 - t² vanishes
        let p = c.blocks()[0].p_scaled();
        assert!(p.row(0).iter().all(|&v| v == 0.0));
        assert!(p.row(6).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_weight_is_rejected() {
        let pts = cheb2_points(4).unwrap();
        let w = Weight::Interval {
            dim: 0,
            lower: 0.0,
            upper: 1.0,
        };
        assert!(matches!(
            InterpWsosCone::build(&pts, &[w, Weight::Unit], &[1, 2]),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn degree_too_high_is_rejected() {
        let pts = cheb2_points(4).unwrap();
        assert!(InterpWsosCone::build(&pts, &[Weight::Unit], &[3]).is_err());
    }

    #[test]
    fn lambda_examples() {
        let c = InterpWsosCone::build(&padua_points(4).unwrap(), &[Weight::Unit], &[2]).unwrap();
        let u = c.dim();
        let eye = c.lambda(0, &DVector::from_element(u, 1.0));
        assert!((eye - DMatrix::<f64>::identity(6, 6)).abs().max() < 1e-13);
        assert_eq!(c.lambda(0, &DVector::zeros(u)).abs().max(), 0.0);
        let mut e = DVector::zeros(u);
        e[3] = 1.0;
        let l = c.lambda(0, &e);
        let p = c.blocks()[0].p_scaled().row(3).transpose();
        assert!((l - &p * p.transpose()).abs().max() < 1e-15);
        assert!(!c.in_interior(&e));
        assert!(!c.in_interior(&DVector::from_element(u, -1.0)));
        assert!(c.in_interior(&DVector::from_element(u, 1.0)));
    }

    #[test]
    fn adjoint_examples() {
        let c = envelope_cone_1d(4);
        let p = c.blocks()[1].p_scaled();
        let a = c.lambda_adjoint(1, &DMatrix::identity(p.ncols(), p.ncols()));
        for r in 0..c.dim() {
            assert!((a[r] - p.row(r).norm_squared()).abs() < 1e-14);
        }
        let z = c.lambda_adjoint(0, &DMatrix::zeros(4, 4));
        assert_eq!(z.abs().max(), 0.0);
    }

    #[test]
    fn barrier_at_ones() {
        let c = InterpWsosCone::build(&cheb2_points(10).unwrap(), &[Weight::Unit], &[5]).unwrap();
        let ev = c.barrier(&DVector::from_element(11, 1.0)).unwrap();
        let p = c.blocks()[0].p_scaled();
        let pp = p * p.transpose();
        assert!(ev.value.abs() < 1e-12);
        for i in 0..11 {
            assert!((ev.gradient[i] + pp[(i, i)]).abs() < 1e-13);
        }
        assert!((&ev.hessian - pp.component_mul(&pp)).abs().max() < 1e-13);
    }

    #[test]
    fn khatri_rao_factor_reproduces_hessian() {
        let c = envelope_cone_1d(5);
        let x = DVector::from_fn(c.dim(), |i, _| 0.4 + (i % 4) as f64 * 0.25);
        let ev = c.barrier(&x).unwrap();
        let vs: Vec<DMatrix<f64>> = c
            .blocks()
            .iter()
            .zip(c.factor(&x).unwrap())
            .map(|(b, l)| {
                let mut v = b.p_scaled().transpose();
                l.solve_lower_triangular_mut(&mut v);
                v
            })
            .collect();
        let l = khatri_rao_factor(&vs, c.dim()).unwrap();
        assert!((0..c.dim()).all(|j| l[(j, j)] > 0.0));
        let err = (&l * l.transpose() - &ev.hessian).abs().max();
        assert!(err <= 1e-12 * ev.hessian.abs().max(), "{err}");
    }

    #[test]
    fn hessian_inverse_round_trip() {
        let c = envelope_cone_1d(6);
        let x = DVector::from_fn(c.dim(), |i, _| 0.5 + (i % 3) as f64 * 0.3);
        let ev = c.barrier(&x).unwrap();
        let w = DVector::from_fn(c.dim(), |i, _| (i as f64).sin());
        let back = ev.hess_inv_apply(&(&ev.hessian * &w));
        assert!((&back - &w).norm() <= 1e-8 * w.norm());
        assert_eq!(ev.hess_inv_apply(&DVector::zeros(c.dim())).norm(), 0.0);
        let dense = ev.hessian.clone().lu().solve(&w).unwrap();
        assert!((ev.hess_inv_apply(&w) - &dense).norm() <= 1e-8 * dense.norm());
    }

    #[test]
    fn barrier_rejects_exterior() {
        let c = envelope_cone_1d(3);
        assert!(matches!(
            c.barrier(&DVector::from_element(c.dim(), -1.0)),
            Err(Error::NotInterior)
        ));
    }

    #[test]
    fn scaled_blocks_round_trip() {
        let dom = BoxDomain::new(vec![0.0, 2.0], vec![1.0, 5.0]).unwrap();
        let pts = scale_to_box(&padua_points(4).unwrap(), &dom).unwrap();
        let c = InterpWsosCone::build(
            &pts,
            &[
                Weight::Interval {
                    dim: 1,
                    lower: 2.0,
                    upper: 5.0,
                },
                Weight::Unit,
            ],
            &[1, 2],
        )
        .unwrap();
        let mats = c.blocks().iter().map(|b| b.p_scaled().clone()).collect();
        let back = InterpWsosCone::from_scaled_blocks(c.dim(), mats).unwrap();
        assert_eq!(back.barrier_parameter(), c.barrier_parameter());
        let bad = DMatrix::from_element(15, 2, 1.0);
        assert!(InterpWsosCone::from_scaled_blocks(15, vec![bad]).is_err());
    }
}
