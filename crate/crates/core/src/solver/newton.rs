//! Newton directions of the homogeneous self-dual embedding.
//!
//! Unknowns `(Δx, Δτ, Δy, Δs, Δκ)` satisfy
//!
//! ```text
//!  AΔx − bΔτ            = r1p
//! −AᵀΔy + cΔτ − Δs      = r1d
//!  bᵀΔy − cᵀΔx − Δκ     = r1g
//!  Δs + μHΔx            = r2x
//!  Δκ + (μ/τ²)Δτ        = r2τ
//! ```
//!
//! `Δs` and `Δκ` are eliminated. Small systems are then factored whole in
//! `(Δx, Δy, Δτ)`, which never forms `H⁻¹`; near a degenerate optimum that is
//! the only route that keeps the residual decreasing to 1e-8. Larger ones use
//! `Δx = (μH)⁻¹(r1d + r2x + AᵀΔy − cΔτ)` and a `(k+1)`-dimensional system in
//! `(Δy, Δτ)`, touching the Hessian only through its per-factor factors.

use nalgebra::{DMatrix, DVector};

use crate::cone::ProductBarrier;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, cholesky_solve_vec};

use super::{ConicProblem, Iterate};

#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub x: DVector<f64>,
    pub tau: f64,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub kappa: f64,
}

impl Direction {
    pub fn norm(&self) -> f64 {
        (self.x.norm_squared()
            + self.tau * self.tau
            + self.y.norm_squared()
            + self.s.norm_squared()
            + self.kappa * self.kappa)
            .sqrt()
    }
}

/// Right-hand side of the Newton system.
#[derive(Debug, Clone)]
pub struct NewtonRhs {
    pub r1p: DVector<f64>,
    pub r1d: DVector<f64>,
    pub r1g: f64,
    pub r2x: DVector<f64>,
    pub r2tau: f64,
}

impl NewtonRhs {
    fn norm(&self) -> f64 {
        (self.r1p.norm_squared()
            + self.r1d.norm_squared()
            + self.r1g * self.r1g
            + self.r2x.norm_squared()
            + self.r2tau * self.r2tau)
            .sqrt()
    }
}

enum Reduced {
    /// `M = A(μH)⁻¹Aᵀ` is positive definite: `(Δy, Δx)` are split into a
    /// right-hand-side part and a part proportional to `Δτ`, which keeps the
    /// cancellation in the `Δτ` pivot at the scale of the data.
    TwoSolve {
        chol_m: DMatrix<f64>,
        dy_tau: DVector<f64>,
        dx_tau: DVector<f64>,
        pivot: f64,
    },
    /// `A` is (numerically) rank deficient; the bordered `(k+1)×(k+1)` system
    /// in `(Δy, Δτ)` is still nonsingular.
    Bordered(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    /// Small problems: LU of the whole eliminated system in `(Δx, Δy, Δτ)`,
    /// which never forms `H⁻¹`.
    Full(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Factored Newton system at one iterate.
pub struct NewtonSystem<'a> {
    problem: &'a ConicProblem,
    barrier: &'a ProductBarrier,
    mu: f64,
    tau: f64,
    reduced: Reduced,
}

impl<'a> NewtonSystem<'a> {
    /// `full` selects the unreduced `(Δx, Δy, Δτ)` factorization.
    pub fn new(problem: &'a ConicProblem, barrier: &'a ProductBarrier, mu: f64, tau: f64, full: bool) -> Result<Self> {
        let a = problem.a();
        let k = a.nrows();
        let c = problem.c();
        let b = problem.b();

        if full {
            let nx = c.len();
            let dim = nx + k + 1;
            let mut kk = DMatrix::zeros(dim, dim);
            kk.view_mut((0, 0), (nx, nx)).copy_from(&(barrier.hessian_dense() * mu));
            kk.view_mut((0, nx), (nx, k)).copy_from(&(-a.transpose()));
            kk.view_mut((nx, 0), (k, nx)).copy_from(a);
            for i in 0..nx {
                kk[(i, nx + k)] = c[i];
                kk[(nx + k, i)] = -c[i];
            }
            for i in 0..k {
                kk[(nx + i, nx + k)] = -b[i];
                kk[(nx + k, nx + i)] = b[i];
            }
            kk[(nx + k, nx + k)] = mu / (tau * tau);
            return Ok(Self {
                problem,
                barrier,
                mu,
                tau,
                reduced: Reduced::Full(kk.lu()),
            });
        }
        // A (μH)⁻¹ Aᵀ accumulated factor by factor through W = L⁻¹A_fᵀ
        let mut m = DMatrix::zeros(k, k);
        let mut ahc = DVector::zeros(k);
        let mut chc = 0.0;
        for (ev, &off) in barrier.factors().iter().zip(barrier.offsets()) {
            let n = ev.gradient.len();
            let l = ev.hess_chol();
            let mut w = a.columns(off, n).transpose();
            l.solve_lower_triangular_mut(&mut w);
            let mut wc = c.rows(off, n).into_owned();
            l.solve_lower_triangular_mut(&mut wc);
            m += w.tr_mul(&w);
            ahc += w.tr_mul(&wc);
            chc += wc.norm_squared();
        }
        m /= mu;
        ahc /= mu;
        chc /= mu;
        if m.iter().chain(ahc.iter()).any(|v| !v.is_finite()) || !chc.is_finite() {
            return Err(Error::Numerical("non-finite Newton system".into()));
        }
        let mut sys = Self {
            problem,
            barrier,
            mu,
            tau,
            reduced: Reduced::Bordered(DMatrix::<f64>::zeros(1, 1).lu()),
        };

        let tau_coef = mu / (tau * tau);
        let full_rank = cholesky_lower(&m).filter(|l| {
            let d = l.diagonal();
            let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
            lo > 1e-7 * hi
        });
        sys.reduced = match full_rank {
            Some(chol_m) => {
                let mut dy_tau = &ahc + b;
                cholesky_solve_vec(&chol_m, &mut dy_tau);
                let dx_tau = sys.hm_inv(&(a.tr_mul(&dy_tau) - c));
                let pivot = b.dot(&dy_tau) - c.dot(&dx_tau) + tau_coef;
                if !(pivot.is_finite() && pivot != 0.0) {
                    return Err(Error::Numerical("singular reduced Newton system".into()));
                }
                Reduced::TwoSolve {
                    chol_m,
                    dy_tau,
                    dx_tau,
                    pivot,
                }
            }
            None => {
                let mut schur = DMatrix::zeros(k + 1, k + 1);
                schur.view_mut((0, 0), (k, k)).copy_from(&m);
                for i in 0..k {
                    schur[(i, k)] = -(ahc[i] + b[i]);
                    schur[(k, i)] = b[i] - ahc[i];
                }
                schur[(k, k)] = chc + tau_coef;
                Reduced::Bordered(schur.lu())
            }
        };
        Ok(sys)
    }

    fn hm_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.barrier.hess_inv_apply(v) / self.mu
    }

    fn solve_once(&self, rhs: &NewtonRhs) -> Result<Direction> {
        let a = self.problem.a();
        let b = self.problem.b();
        let c = self.problem.c();
        let k = a.nrows();
        let rd = &rhs.r1d + &rhs.r2x;
        let hrd = self.hm_inv(&rd);
        let (dx, dtau, dy) = match &self.reduced {
            Reduced::TwoSolve {
                chol_m,
                dy_tau,
                dx_tau,
                pivot,
            } => {
                let mut dy = &rhs.r1p - a * &hrd;
                cholesky_solve_vec(chol_m, &mut dy);
                let dx = self.hm_inv(&(&rd + a.tr_mul(&dy)));
                let dtau = (rhs.r1g + rhs.r2tau - b.dot(&dy) + c.dot(&dx)) / pivot;
                (dx + dx_tau * dtau, dtau, dy + dy_tau * dtau)
            }
            Reduced::Bordered(lu) => {
                let mut red = DVector::zeros(k + 1);
                red.rows_mut(0, k).copy_from(&(&rhs.r1p - a * &hrd));
                red[k] = rhs.r1g + rhs.r2tau + c.dot(&hrd);
                let sol = lu
                    .solve(&red)
                    .ok_or_else(|| Error::Numerical("singular reduced Newton system".into()))?;
                let dy = sol.rows(0, k).into_owned();
                let dtau = sol[k];
                let dx = self.hm_inv(&(&rd + a.tr_mul(&dy) - c * dtau));
                (dx, dtau, dy)
            }
            Reduced::Full(lu) => {
                let nx = c.len();
                let mut red = DVector::zeros(nx + k + 1);
                red.rows_mut(0, nx).copy_from(&rd);
                red.rows_mut(nx, k).copy_from(&rhs.r1p);
                red[nx + k] = rhs.r1g + rhs.r2tau;
                let sol = lu
                    .solve(&red)
                    .ok_or_else(|| Error::Numerical("singular Newton system".into()))?;
                (sol.rows(0, nx).into_owned(), sol[nx + k], sol.rows(nx, k).into_owned())
            }
        };
        // Δs and Δκ from the linear rows, so that the embedding residual
        // shrinks by exactly (1 − α) along the step up to rounding; the
        // solve error lands in the centrality rows instead.
        let ds = c * dtau - a.tr_mul(&dy) - &rhs.r1d;
        let dkappa = b.dot(&dy) - c.dot(&dx) - rhs.r1g;
        let d = Direction {
            x: dx,
            tau: dtau,
            y: dy,
            s: ds,
            kappa: dkappa,
        };
        if d.norm().is_finite() {
            Ok(d)
        } else {
            Err(Error::Numerical("non-finite Newton direction".into()))
        }
    }

    /// Residual `rhs − K·d` of the full (unreduced) system.
    pub fn residual(&self, rhs: &NewtonRhs, d: &Direction) -> NewtonRhs {
        let a = self.problem.a();
        let b = self.problem.b();
        let c = self.problem.c();
        NewtonRhs {
            r1p: &rhs.r1p - (a * &d.x - b * d.tau),
            r1d: &rhs.r1d - (-a.tr_mul(&d.y) + c * d.tau - &d.s),
            r1g: rhs.r1g - (b.dot(&d.y) - c.dot(&d.x) - d.kappa),
            r2x: &rhs.r2x - (&d.s + self.barrier.hess_apply(&d.x) * self.mu),
            r2tau: rhs.r2tau - (d.kappa + self.mu / (self.tau * self.tau) * d.tau),
        }
    }

    /// Solves, then applies up to `passes` rounds of iterative refinement on
    /// the full system, stopping once a round no longer reduces the residual.
    pub fn solve(&self, rhs: &NewtonRhs, passes: usize) -> Result<Direction> {
        let mut d = self.solve_once(rhs)?;
        let mut res = self.residual(rhs, &d);
        let mut res_norm = res.norm();
        for _ in 0..passes {
            if res_norm == 0.0 {
                break;
            }
            let corr = self.solve_once(&res)?;
            let mut next = d.clone();
            next.x += corr.x;
            next.tau += corr.tau;
            next.y += corr.y;
            next.s += corr.s;
            next.kappa += corr.kappa;
            let next_res = self.residual(rhs, &next);
            let next_norm = next_res.norm();
            if !(next_norm < res_norm) {
                break;
            }
            d = next;
            res = next_res;
            res_norm = next_norm;
        }
        Ok(d)
    }

    /// Relative residual `‖rhs − K·d‖ / (1 + ‖rhs‖)` of a computed direction.
    pub fn relative_residual(&self, rhs: &NewtonRhs, d: &Direction) -> f64 {
        self.residual(rhs, d).norm() / (1.0 + rhs.norm())
    }
}

/// Predictor right-hand side: drive the embedding residual and `s̄` to zero.
pub fn predictor_rhs(problem: &ConicProblem, z: &Iterate) -> NewtonRhs {
    let r = super::embedding_residual(problem, z);
    NewtonRhs {
        r1p: -r.primal,
        r1d: -r.dual,
        r1g: -r.gap,
        r2x: -&z.s,
        r2tau: -z.kappa,
    }
}

/// Corrector right-hand side: `r1 = 0`, `r2 = −ψ(z)`.
pub fn corrector_rhs(problem: &ConicProblem, psi_x: &DVector<f64>, psi_tau: f64) -> NewtonRhs {
    NewtonRhs {
        r1p: DVector::zeros(problem.a().nrows()),
        r1d: DVector::zeros(problem.c().len()),
        r1g: 0.0,
        r2x: -psi_x,
        r2tau: -psi_tau,
    }
}
