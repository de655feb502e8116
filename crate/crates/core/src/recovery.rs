//! Gram certificates from interior points of the dual cone.
//!
//! For interior `x` and any `s`, put `w = H(x)⁻¹s` and
//! `Sᵢ = Λᵢ(x)⁻¹ Λᵢ(w) Λᵢ(x)⁻¹`. Then `Σᵢ Λᵢ*(Sᵢ) = s` always, and every `Sᵢ`
//! is positive definite once `‖H(x)^{-1/2}(s + δg(x))‖ < δ`.
//!
//! Since `H(x)x = −g(x)`, `w = δx + H⁻¹(s + δg)`, so with `Λᵢ = LᵢLᵢᵀ` and
//! `Vᵢ = Lᵢ⁻¹P̃ᵢᵀ`
//!
//! ```text
//! Sᵢ = Lᵢ⁻ᵀ (δI + Vᵢ diag(H⁻¹(s + δg)) Vᵢᵀ) Lᵢ⁻¹
//! ```
//!
//! which is how it is computed: near the central path the middle factor is a
//! small perturbation of `δI` instead of the difference of two large terms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::cone::{InterpWsosCone, Weight};
use crate::error::{Error, Result};
use crate::linalg::DoubleDouble;
use crate::solver::{ConicProblem, SolveResult};

/// Eigenvalues above this (and below zero) are treated as round-off by
/// [`sos_terms`].
pub const EIGENVALUE_CLIP: f64 = -1e-10;

const REFINEMENT_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GramCertificate {
    /// One symmetric `Lᵢ × Lᵢ` matrix per block.
    pub grams: Vec<DMatrix<f64>>,
    /// `‖Σᵢ Λᵢ*(Sᵢ) − s‖_∞`
    pub adjoint_residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub delta: f64,
}

impl GramCertificate {
    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalues.iter().all(|&v| v > 0.0)
    }
}

/// Certificate with `δ = xᵀs/ν`, the complementarity of the pair.
pub fn recover_gram(cone: &InterpWsosCone, x: &DVector<f64>, s: &DVector<f64>) -> Result<GramCertificate> {
    let delta = x.dot(s) / cone.barrier_parameter() as f64;
    recover_gram_with_delta(cone, x, s, delta)
}

pub fn recover_gram_with_delta(
    cone: &InterpWsosCone,
    x: &DVector<f64>,
    s: &DVector<f64>,
    delta: f64,
) -> Result<GramCertificate> {
    if s.len() != cone.dim() {
        return Err(Error::Dimension(format!("s has length {}, cone dimension {}", s.len(), cone.dim())));
    }
    if !delta.is_finite() || s.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite s or delta".into()));
    }
    let ev = cone.barrier(x)?;
    let vts: Vec<DMatrix<f64>> = cone
        .blocks()
        .iter()
        .zip(ev.lambda_chol())
        .map(|(block, l)| {
            let mut vt = block.p_scaled().transpose();
            l.solve_lower_triangular_mut(&mut vt);
            vt
        })
        .collect();
    // Lᵢ⁻ᵀ (shift·I + Vᵢ diag(v) Vᵢᵀ) Lᵢ⁻¹ for every block
    let congruence = |v: &DVector<f64>, shift: f64| -> Vec<DMatrix<f64>> {
        vts.iter()
            .zip(ev.lambda_chol())
            .map(|(vt, l)| {
                let mut scaled = vt.clone();
                for (mut col, &vj) in scaled.column_iter_mut().zip(v.iter()) {
                    col *= vj;
                }
                let mut mid = scaled * vt.transpose();
                for j in 0..mid.nrows() {
                    mid[(j, j)] += shift;
                }
                let lt = l.transpose();
                lt.solve_upper_triangular_mut(&mut mid);
                let mut gram = mid.transpose();
                lt.solve_upper_triangular_mut(&mut gram);
                crate::linalg::symmetrize(&mut gram);
                gram
            })
            .collect()
    };
    let max_abs = |r: &[f64]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let r = s + &ev.gradient * delta;
    let mut grams = congruence(&ev.hess_inv_apply(&r), delta);
    let mut residual = adjoint_residuals(cone, &grams, s);
    // refinement against the compensated residual: when H is very badly
    // conditioned one solve does not reproduce s to working accuracy
    for _ in 0..REFINEMENT_ROUNDS {
        let current = max_abs(&residual);
        if current == 0.0 {
            break;
        }
        let rho = -DVector::from_vec(residual.clone());
        let corr = congruence(&ev.hess_inv_apply(&rho), 0.0);
        let trial: Vec<DMatrix<f64>> = grams.iter().zip(&corr).map(|(g, c)| g + c).collect();
        let trial_residual = adjoint_residuals(cone, &trial, s);
        if !(max_abs(&trial_residual) < current) {
            break;
        }
        grams = trial;
        residual = trial_residual;
    }
    let min_eigenvalues = grams.iter().map(min_eigenvalue).collect();
    let adjoint_residual = max_abs(&residual);
    Ok(GramCertificate {
        grams,
        adjoint_residual,
        min_eigenvalues,
        delta,
    })
}

/// One certificate per cone factor of a solved problem, from the scaled
/// final iterate with `δ = μ/τ²`.
pub fn certificates_from_result(problem: &ConicProblem, result: &SolveResult) -> Result<Vec<GramCertificate>> {
    let cone = problem.cone();
    let delta = result.mu / (result.tau * result.tau);
    cone.factors()
        .iter()
        .enumerate()
        .map(|(f, factor)| recover_gram_with_delta(factor, &cone.slice(&result.x, f), &cone.slice(&result.s, f), delta))
        .collect()
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// `Σᵢ Λᵢ*(Sᵢ) − s` pointwise, accumulated in double-double.
fn adjoint_residuals(cone: &InterpWsosCone, grams: &[DMatrix<f64>], s: &DVector<f64>) -> Vec<f64> {
    (0..cone.dim())
        .map(|u| {
            let mut acc = DoubleDouble::new();
            for (block, gram) in cone.blocks().iter().zip(grams) {
                let p = block.p_scaled();
                let l = gram.nrows();
                for a in 0..l {
                    let pa = p[(u, a)];
                    for b in 0..l {
                        // pa·S_ab split exactly, then each half times p_ub
                        let t = pa * gram[(a, b)];
                        let e = pa.mul_add(gram[(a, b)], -t);
                        acc.add_product(t, p[(u, b)]);
                        acc.add_product(e, p[(u, b)]);
                    }
                }
            }
            acc.add(-s[u]);
            acc.value()
        })
        .collect()
}

/// Pivots of the unpivoted `LDLᵀ` factorization, stopping at the first
/// non-positive one.
pub fn ldl_pivots(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::identity(n, n);
    let mut d = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        d.push(dj);
        if !(dj > 0.0) {
            break;
        }
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub block: usize,
    pub positive_definite: bool,
    pub min_pivot: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub tolerance: f64,
    /// `‖Σᵢ Λᵢ*(Sᵢ) − s‖_∞`, compensated.
    pub adjoint_residual: f64,
    /// The residual allowed, `tol·(1 + ‖s‖_∞)`.
    pub residual_bound: f64,
    pub blocks: Vec<BlockCheck>,
    /// `Σᵢ gᵢ(t_u) pᵢ(t_u)ᵀSᵢpᵢ(t_u) − s_u` at every interpolation point.
    pub pointwise_residuals: Vec<f64>,
    /// Points where the pointwise residual exceeds the bound.
    pub failing_points: Vec<usize>,
}

/// Recomputes the adjoint identity in double-double and checks each Gram
/// matrix for positive definiteness through its `LDLᵀ` pivots. Never fails;
/// problems are entries of the report.
pub fn verify_certificate(cone: &InterpWsosCone, s: &DVector<f64>, cert: &GramCertificate, tol: f64) -> VerificationReport {
    let shapes_ok = s.len() == cone.dim()
        && cert.grams.len() == cone.blocks().len()
        && cert
            .grams
            .iter()
            .zip(cone.blocks())
            .all(|(g, b)| g.nrows() == b.size() && g.ncols() == b.size());
    let residual_bound = tol * (1.0 + s.amax());
    if !shapes_ok {
        return VerificationReport {
            passed: false,
            tolerance: tol,
            adjoint_residual: f64::INFINITY,
            residual_bound,
            blocks: Vec::new(),
            pointwise_residuals: Vec::new(),
            failing_points: Vec::new(),
        };
    }
    let pointwise = adjoint_residuals(cone, &cert.grams, s);
    let adjoint_residual = pointwise.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let failing_points: Vec<usize> = pointwise
        .iter()
        .enumerate()
        .filter(|(_, v)| !(v.abs() <= residual_bound))
        .map(|(u, _)| u)
        .collect();
    let blocks: Vec<BlockCheck> = cert
        .grams
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let symmetric = (g - g.transpose()).amax() <= 1e-12 * (1.0 + g.amax());
            let pivots = ldl_pivots(g);
            let min_pivot = pivots.iter().copied().fold(f64::INFINITY, f64::min);
            BlockCheck {
                block: i,
                positive_definite: symmetric && pivots.len() == g.nrows() && min_pivot > 0.0,
                min_pivot,
                min_eigenvalue: min_eigenvalue(g),
            }
        })
        .collect();
    VerificationReport {
        passed: failing_points.is_empty() && blocks.iter().all(|b| b.positive_definite),
        tolerance: tol,
        adjoint_residual,
        residual_bound,
        blocks,
        pointwise_residuals: pointwise,
        failing_points,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosBlockTerms {
    pub block: usize,
    /// `None` for cones read back from a problem file.
    pub weight: Option<Weight>,
    /// Coefficients in the block's orthonormal polynomial basis.
    pub terms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosDecomposition {
    pub blocks: Vec<SosBlockTerms>,
}

impl SosDecomposition {
    /// `Σᵢ gᵢ(t_u) Σⱼ (termᵢⱼᵀ pᵢ(t_u))²` at every interpolation point.
    pub fn evaluate(&self, cone: &InterpWsosCone) -> DVector<f64> {
        let mut out = DVector::zeros(cone.dim());
        for (terms, block) in self.blocks.iter().zip(cone.blocks()) {
            let p = block.p_scaled();
            for term in &terms.terms {
                let q = p * DVector::from_column_slice(term);
                out += q.component_mul(&q);
            }
        }
        out
    }
}

/// Terms `√λⱼ vⱼ` from `Sᵢ = Σⱼ λⱼ vⱼvⱼᵀ`; eigenvalues in `[−1e−10, 0]` are
/// dropped, anything more negative is an error. Each block's terms are
/// ordered by decreasing eigenvalue.
pub fn sos_terms(cert: &GramCertificate, cone: &InterpWsosCone) -> Result<SosDecomposition> {
    if cert.grams.len() != cone.blocks().len() {
        return Err(Error::Dimension(format!(
            "{} Gram matrices for {} blocks",
            cert.grams.len(),
            cone.blocks().len()
        )));
    }
    let mut blocks = Vec::with_capacity(cert.grams.len());
    for (i, (gram, block)) in cert.grams.iter().zip(cone.blocks()).enumerate() {
        if gram.nrows() != block.size() || gram.ncols() != block.size() {
            return Err(Error::Dimension(format!("Gram matrix {i} does not match its block")));
        }
        let eig = SymmetricEigen::new(gram.clone());
        let mut order: Vec<usize> = (0..gram.nrows()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut terms = Vec::new();
        for j in order {
            let lambda = eig.eigenvalues[j];
            if lambda < EIGENVALUE_CLIP {
                return Err(Error::NotPsd {
                    block: i,
                    eigenvalue: lambda,
                });
            }
            if lambda > 0.0 {
                let root = lambda.sqrt();
                terms.push(eig.eigenvectors.column(j).iter().map(|v| v * root).collect());
            }
        }
        blocks.push(SosBlockTerms {
            block: i,
            weight: block.weight.clone(),
            terms,
        });
    }
    Ok(SosDecomposition { blocks })
}
