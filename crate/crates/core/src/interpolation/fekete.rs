//! Approximate Fekete points: greedy determinant maximization over a product
//! Chebyshev grid, i.e. QR with column pivoting applied to the transposed
//! candidate Vandermonde matrix.
//!
//! The candidate grid can be large (hundreds of thousands of points for six
//! variables), so the N×U Vandermonde matrix is never formed. Each Householder
//! step only needs the products `V q` for one coefficient-space vector `q`,
//! and those are evaluated by contracting `q` against per-dimension Chebyshev
//! tables one axis at a time.

use super::{cheb2_values, chebyshev_values, multi_indices, BoxDomain, PointSet};
use crate::error::{Error, Result};

/// Product grid `C_{deg+1} × … × C_{deg+n}` of second-kind Chebyshev points,
/// flattened with the first coordinate varying slowest.
struct CandidateGrid {
    axes: Vec<Vec<f64>>,
    /// `tables[j][g * (deg+1) + a] = T_a(axes[j][g])`
    tables: Vec<Vec<f64>>,
    deg: usize,
}

impl CandidateGrid {
    fn new(n: usize, deg: usize) -> Self {
        let axes: Vec<Vec<f64>> = (1..=n).map(|j| cheb2_values(deg + j)).collect();
        let tables = axes
            .iter()
            .map(|axis| axis.iter().flat_map(|&t| chebyshev_values(t, deg)).collect())
            .collect();
        Self { axes, tables, deg }
    }

    fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    fn point(&self, mut p: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for j in (0..self.axes.len()).rev() {
            let g = self.axes[j].len();
            out[j] = self.axes[j][p % g];
            p /= g;
        }
        out
    }

    /// Values `Σ_α coef[α] Π_j table_j[g_j, α_j]` at every grid point, where
    /// `coef` is a dense `(deg+1)ⁿ` tensor (first index slowest).
    fn contract(&self, coef: &[f64], tables: &[Vec<f64>]) -> Vec<f64> {
        let d = self.deg + 1;
        let n = self.axes.len();
        let mut cur = coef.to_vec();
        let mut outer = 1;
        for j in 0..n {
            let g = self.axes[j].len();
            let inner = d.pow((n - j - 1) as u32);
            let table = &tables[j];
            let mut next = vec![0.0; outer * g * inner];
            for o in 0..outer {
                let src = &cur[o * d * inner..(o + 1) * d * inner];
                for gi in 0..g {
                    let dst = &mut next[(o * g + gi) * inner..(o * g + gi + 1) * inner];
                    for a in 0..d {
                        let w = table[gi * d + a];
                        if w == 0.0 {
                            continue;
                        }
                        let row = &src[a * inner..(a + 1) * inner];
                        for (x, y) in dst.iter_mut().zip(row) {
                            *x += w * y;
                        }
                    }
                }
            }
            cur = next;
            outer *= g;
        }
        cur
    }
}

/// Approximate Fekete points for total degree `deg` in `n` variables, mapped
/// onto `domain`. Single greedy pass; ties go to the lowest grid index.
pub fn approx_fekete_points(n: usize, deg: usize, domain: &BoxDomain) -> Result<PointSet> {
    if n == 0 || deg == 0 {
        return Err(Error::InvalidArgument(
            "approximate Fekete points need n >= 1 and deg >= 1".into(),
        ));
    }
    if domain.dim() != n {
        return Err(Error::Dimension(format!("box of dimension {} for n = {n}", domain.dim())));
    }
    let grid = CandidateGrid::new(n, deg);
    let indices = multi_indices(n, deg);
    let u = indices.len();
    let total = grid.len();
    assert!(total >= u, "candidate grid smaller than the polynomial space");

    let d = deg + 1;
    let dense_pos: Vec<usize> = indices
        .iter()
        .map(|alpha| alpha.iter().fold(0, |acc, &a| acc * d + a))
        .collect();
    let to_dense = |v: &[f64]| {
        let mut out = vec![0.0; d.pow(n as u32)];
        for (&pos, &x) in dense_pos.iter().zip(v) {
            out[pos] = x;
        }
        out
    };

    // squared residual norms of the candidate Vandermonde rows
    let ones: Vec<f64> = vec![1.0; u];
    let squared_tables: Vec<Vec<f64>> =
        grid.tables.iter().map(|t| t.iter().map(|v| v * v).collect()).collect();
    let mut residual = grid.contract(&to_dense(&ones), &squared_tables);

    let row_at = |p: usize| -> Vec<f64> {
        let pt = grid.point(p);
        let tabs: Vec<Vec<f64>> = pt.iter().map(|&t| chebyshev_values(t, deg)).collect();
        indices
            .iter()
            .map(|alpha| alpha.iter().enumerate().map(|(k, &a)| tabs[k][a]).product())
            .collect()
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(u);
    let mut chosen = Vec::with_capacity(u);
    for step in 0..u {
        let mut best = usize::MAX;
        let mut best_val = f64::NEG_INFINITY;
        for (p, &r) in residual.iter().enumerate() {
            if r > best_val {
                best_val = r;
                best = p;
            }
        }
        if !(best_val > 0.0) {
            return Err(Error::NotUnisolvent(format!(
                "greedy selection exhausted after {step} of {u} points"
            )));
        }
        let mut q = row_at(best);
        // classical Gram-Schmidt, applied twice
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = b.iter().zip(&q).map(|(x, y)| x * y).sum();
                for (qi, bi) in q.iter_mut().zip(b) {
                    *qi -= proj * bi;
                }
            }
        }
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotUnisolvent("dependent candidate row selected".into()));
        }
        q.iter_mut().for_each(|v| *v /= norm);
        let proj = grid.contract(&to_dense(&q), &grid.tables);
        for (r, pv) in residual.iter_mut().zip(&proj) {
            *r -= pv * pv;
        }
        residual[best] = f64::NEG_INFINITY;
        chosen.push(best);
        basis.push(q);
    }

    let points = chosen
        .into_iter()
        .map(|p| domain.from_reference(&grid.point(p)))
        .collect();
    Ok(PointSet::new_unchecked(points, domain.clone()))
}
