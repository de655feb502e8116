//! Homogeneous self-dual predictor–corrector interior-point method.
//!
//! Solves `min cᵀx  s.t.  Ax = b, x ∈ K` together with its dual
//! `max bᵀy  s.t.  Aᵀy + s = c, s ∈ K*` for a product of dual WSOS cones `K`,
//! using only the barrier of `K`. Iterates `z = (x, τ, y, s, κ)` live in the
//! embedding
//!
//! ```text
//!  Ax − bτ = 0,  −Aᵀy + cτ − s = 0,  bᵀy − cᵀx − κ = 0,
//! ```
//!
//! and each iteration is one predictor step (line search inside `N(β)`)
//! followed by corrector steps back into `N(η)`.

pub mod newton;

pub use newton::{corrector_rhs, predictor_rhs, Direction, NewtonRhs, NewtonSystem};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{ProductBarrier, ProductCone};
use crate::error::{Error, Result};

/// `min cᵀx  s.t.  Ax = b,  x ∈ cone`.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    cone: ProductCone,
}

impl ConicProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, cone: ProductCone) -> Result<Self> {
        let (k, n) = a.shape();
        if k == 0 {
            return Err(Error::Dimension("the problem needs at least one equality constraint".into()));
        }
        if n != cone.dim() || c.len() != n || b.len() != k {
            return Err(Error::Dimension(format!(
                "A is {k}x{n}, b has {}, c has {}, cone has dimension {}",
                b.len(),
                c.len(),
                cone.dim()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("problem data must be finite".into()));
        }
        Ok(Self { a, b, c, cone })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn cone(&self) -> &ProductCone {
        &self.cone
    }

    /// Numerical full-row-rank test of `A`. The solver does not require it;
    /// duplicated rows are how infeasible test instances are made.
    pub fn is_full_row_rank(&self) -> bool {
        let sv = self.a.transpose().singular_values();
        let max = sv.max();
        sv.len() == self.a.nrows() && sv.min() > 1e-12 * max.max(1.0)
    }

    /// Barrier parameter of the embedding, `ν + 1`.
    pub fn nu_bar(&self) -> f64 {
        (self.cone.barrier_parameter() + 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Corrector target radius.
    pub eta: f64,
    /// Predictor radius.
    pub beta: f64,
    /// Corrector step length.
    pub alpha_c: f64,
    /// Maximum corrector steps per iteration.
    pub r_c: usize,
    pub tol_gap: f64,
    pub tol_infeas: f64,
    pub max_iters: usize,
    /// Growth factor of the predictor line search.
    pub expansion: f64,
    /// First trial step of the predictor line search.
    pub alpha_init: f64,
    pub alpha_max: f64,
    pub alpha_min: f64,
    /// Bisection steps between the last accepted and first rejected trial.
    pub bisections: usize,
    /// Iterative-refinement rounds per Newton solve.
    pub refinement_passes: usize,
    /// Fixed predictor step instead of the line search.
    pub fixed_alpha: Option<f64>,
    /// Consecutive failed predictors before giving up.
    pub stall_limit: usize,
    /// Largest `dim x + k + 1` for which the Newton system is factored
    /// whole rather than through `A H⁻¹ Aᵀ`.
    pub full_newton_limit: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            eta: 0.0305,
            beta: 0.2387,
            alpha_c: 1.0,
            r_c: 4,
            tol_gap: 1e-8,
            tol_infeas: 1e-8,
            max_iters: 500,
            expansion: 2.0,
            alpha_init: 0.01,
            alpha_max: 0.9999,
            alpha_min: 1e-8,
            bisections: 2,
            refinement_passes: 1,
            fixed_alpha: None,
            stall_limit: 3,
            full_newton_limit: 1000,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(0.0 < self.eta && self.eta < self.beta && self.beta < 1.0) {
            return bad("need 0 < eta < beta < 1");
        }
        if !(self.alpha_c > 0.0) || self.r_c == 0 {
            return bad("need alpha_c > 0 and r_c >= 1");
        }
        if !(self.tol_gap > 0.0 && self.tol_gap < 1.0 && self.tol_infeas > 0.0 && self.tol_infeas < 1.0) {
            return bad("tolerances must lie in (0, 1)");
        }
        if !(self.expansion > 1.0) || !(0.0 < self.alpha_min && self.alpha_min <= self.alpha_init) {
            return bad("need expansion > 1 and 0 < alpha_min <= alpha_init");
        }
        if !(self.alpha_init <= self.alpha_max && self.alpha_max < 1.0) {
            return bad("need alpha_init <= alpha_max < 1");
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > 0.0 && a < 1.0) {
                return bad("fixed predictor step must lie in (0, 1)");
            }
        }
        if self.stall_limit == 0 {
            return bad("stall_limit must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IllPosed,
    IterationLimit,
    NumericalFailure,
}

/// Point `z = (x, τ, y, s, κ)` of the embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: DVector<f64>,
    pub tau: f64,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub kappa: f64,
}

impl Iterate {
    pub fn step(&self, d: &Direction, alpha: f64) -> Iterate {
        Iterate {
            x: &self.x + &d.x * alpha,
            tau: self.tau + alpha * d.tau,
            y: &self.y + &d.y * alpha,
            s: &self.s + &d.s * alpha,
            kappa: self.kappa + alpha * d.kappa,
        }
    }
}

/// `(Ax − bτ, −Aᵀy + cτ − s, bᵀy − cᵀx − κ)`.
#[derive(Debug, Clone)]
pub struct EmbeddingResidual {
    pub primal: DVector<f64>,
    pub dual: DVector<f64>,
    pub gap: f64,
}

impl EmbeddingResidual {
    pub fn norm(&self) -> f64 {
        (self.primal.norm_squared() + self.dual.norm_squared() + self.gap * self.gap).sqrt()
    }

    /// `‖self − t·other‖`.
    pub fn distance_to_scaled(&self, other: &EmbeddingResidual, t: f64) -> f64 {
        ((&self.primal - &other.primal * t).norm_squared()
            + (&self.dual - &other.dual * t).norm_squared()
            + (self.gap - t * other.gap).powi(2))
        .sqrt()
    }
}

pub fn embedding_residual(problem: &ConicProblem, z: &Iterate) -> EmbeddingResidual {
    let (a, b, c) = (problem.a(), problem.b(), problem.c());
    EmbeddingResidual {
        primal: a * &z.x - b * z.tau,
        dual: -a.tr_mul(&z.y) + c * z.tau - &z.s,
        gap: b.dot(&z.y) - c.dot(&z.x) - z.kappa,
    }
}

/// `μ(z)`, `ψ(z) = s̄ + μḡ(x̄)` and the local norm `‖H̄^{-1/2}ψ‖`.
#[derive(Debug, Clone)]
pub struct CentralMetrics {
    pub mu: f64,
    pub psi_x: DVector<f64>,
    pub psi_tau: f64,
    pub norm: f64,
}

impl CentralMetrics {
    pub fn in_neighborhood(&self, theta: f64) -> bool {
        self.norm <= theta * self.mu
    }
}

/// An iterate together with its barrier evaluation and central-path metrics.
#[derive(Debug, Clone)]
pub struct EvaluatedIterate {
    pub z: Iterate,
    pub barrier: ProductBarrier,
    pub metrics: CentralMetrics,
}

pub fn central_metrics(problem: &ConicProblem, z: &Iterate, barrier: &ProductBarrier) -> CentralMetrics {
    let mu = (z.x.dot(&z.s) + z.tau * z.kappa) / problem.nu_bar();
    let psi_x = &z.s + barrier.gradient() * mu;
    let psi_tau = z.kappa - mu / z.tau;
    let quad = psi_x.dot(&barrier.hess_inv_apply(&psi_x)) + (z.tau * psi_tau).powi(2);
    CentralMetrics {
        mu,
        psi_x,
        psi_tau,
        norm: quad.max(0.0).sqrt(),
    }
}

/// Evaluates the barrier and metrics; fails when `z` is not strictly interior.
pub fn evaluate(problem: &ConicProblem, z: Iterate) -> Result<EvaluatedIterate> {
    if !(z.tau > 0.0 && z.kappa > 0.0) {
        return Err(Error::NotInterior);
    }
    let barrier = problem.cone().barrier(&z.x)?;
    let metrics = central_metrics(problem, &z, &barrier);
    if !(metrics.mu > 0.0 && metrics.norm.is_finite()) {
        return Err(Error::NotInterior);
    }
    Ok(EvaluatedIterate { z, barrier, metrics })
}

/// Starting point `x = δ𝟏`, `s = −g(x)`, `τ = κ = 1`, `y = 0` with
/// `δ = √(δ_P δ_D)`; it satisfies `μ = 1` and `ψ = 0`.
pub fn initial_point(problem: &ConicProblem) -> Result<Iterate> {
    let (a, b, c) = (problem.a(), problem.b(), problem.c());
    let n = c.len();
    let ones = DVector::from_element(n, 1.0);
    let g1 = problem.cone().barrier(&ones)?.gradient();
    let a1 = a * &ones;
    let delta_p = b
        .iter()
        .zip(a1.iter())
        .map(|(bi, ai)| (1.0 + bi.abs()) / (1.0 + ai.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    let delta_d = g1
        .iter()
        .zip(c.iter())
        .map(|(gi, ci)| (1.0 + gi.abs()) / (1.0 + ci.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    let delta = (delta_p * delta_d).sqrt();
    Ok(Iterate {
        x: ones * delta,
        tau: 1.0,
        y: DVector::zeros(b.len()),
        s: -g1 / delta,
        kappa: 1.0,
    })
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// `μ` after the corrector phase.
    pub mu: f64,
    pub alpha_p: f64,
    /// Neighborhood norm after the corrector phase.
    pub nbhd_norm: f64,
    pub corrector_steps: usize,
    /// Neighborhood norm over `μ` right after the predictor.
    pub predictor_ratio: f64,
    /// `‖R(z)‖` before the predictor.
    pub residual_norm: f64,
    /// `‖R(z + αΔz) − (1 − α)R(z)‖ / ‖R(z)‖`.
    pub residual_shrink_error: f64,
    /// Relative residual of the predictor Newton solve.
    pub newton_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    /// `x / τ`
    pub x: DVector<f64>,
    /// `y / τ`
    pub y: DVector<f64>,
    /// `s / τ`
    pub s: DVector<f64>,
    pub tau: f64,
    pub kappa: f64,
    pub mu: f64,
    /// `cᵀx / τ`
    pub primal_objective: f64,
    /// `bᵀy / τ`
    pub dual_objective: f64,
    /// `‖Ax − bτ‖ / (τ(1 + ‖b‖))`
    pub primal_residual: f64,
    /// `‖Aᵀy + s − cτ‖ / (τ(1 + ‖c‖))`
    pub dual_residual: f64,
    /// `|cᵀx − bᵀy| / (τ + |bᵀy|)`
    pub relative_gap: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// Unscaled final iterate (infeasibility certificates live here).
    pub iterate: Iterate,
    /// Diagnostic for numerical failures.
    pub message: Option<String>,
}

struct Measures {
    primal: f64,
    dual: f64,
    gap: f64,
}

fn measures(problem: &ConicProblem, z: &Iterate) -> Measures {
    let (a, b, c) = (problem.a(), problem.b(), problem.c());
    let bty = b.dot(&z.y);
    Measures {
        primal: (a * &z.x - b * z.tau).norm() / (z.tau * (1.0 + b.norm())),
        dual: (a.tr_mul(&z.y) + &z.s - c * z.tau).norm() / (z.tau * (1.0 + c.norm())),
        gap: (c.dot(&z.x) - bty).abs() / (z.tau + bty.abs()),
    }
}

/// Termination test at an iterate; `None` means keep iterating.
pub fn classify(problem: &ConicProblem, ev: &EvaluatedIterate, params: &SolverParams) -> Option<Status> {
    let z = &ev.z;
    let (a, b, c) = (problem.a(), problem.b(), problem.c());
    let m = measures(problem, z);
    if m.primal <= params.tol_infeas && m.dual <= params.tol_infeas && m.gap <= params.tol_gap {
        return Some(Status::Optimal);
    }
    let bty = b.dot(&z.y);
    if bty > 0.0 && (a.tr_mul(&z.y) + &z.s).norm() <= params.tol_infeas * bty {
        return Some(Status::PrimalInfeasible);
    }
    let ctx = c.dot(&z.x);
    if -ctx > 0.0 && (a * &z.x).norm() <= params.tol_infeas * (-ctx) {
        return Some(Status::DualInfeasible);
    }
    if ev.metrics.mu < 1e-12 && z.tau < 1e-12 {
        return Some(Status::IllPosed);
    }
    None
}

/// Outcome of one predictor step.
pub struct PredictorOutcome {
    pub alpha: f64,
    pub next: Option<EvaluatedIterate>,
    pub newton_residual: f64,
}

fn use_full(problem: &ConicProblem, params: &SolverParams) -> bool {
    problem.c().len() + problem.b().len() + 1 <= params.full_newton_limit
}

/// Predictor: Newton direction toward `R = 0, s̄ = 0`, then the largest step
/// found by the expanding line search that stays inside `N(β)`.
pub fn predictor_step(problem: &ConicProblem, cur: &EvaluatedIterate, params: &SolverParams) -> Result<PredictorOutcome> {
    let sys = NewtonSystem::new(problem, &cur.barrier, cur.metrics.mu, cur.z.tau, use_full(problem, params))?;
    let rhs = predictor_rhs(problem, &cur.z);
    let d = sys.solve(&rhs, params.refinement_passes)?;
    let newton_residual = sys.relative_residual(&rhs, &d);
    if d.norm() == 0.0 {
        return Ok(PredictorOutcome {
            alpha: 0.0,
            next: None,
            newton_residual,
        });
    }
    let trial = |alpha: f64| -> Option<EvaluatedIterate> {
        let ev = evaluate(problem, cur.z.step(&d, alpha)).ok()?;
        ev.metrics.in_neighborhood(params.beta).then_some(ev)
    };
    if let Some(alpha) = params.fixed_alpha {
        return Ok(PredictorOutcome {
            alpha,
            next: trial(alpha),
            newton_residual,
        });
    }

    let mut alpha = params.alpha_init;
    let mut best = trial(alpha);
    if best.is_some() {
        let mut rejected = None;
        while alpha < params.alpha_max {
            let next = (alpha * params.expansion).min(params.alpha_max);
            match trial(next) {
                Some(ev) => {
                    alpha = next;
                    best = Some(ev);
                }
                None => {
                    rejected = Some(next);
                    break;
                }
            }
        }
        if let Some(mut hi) = rejected {
            for _ in 0..params.bisections {
                let mid = 0.5 * (alpha + hi);
                match trial(mid) {
                    Some(ev) => {
                        alpha = mid;
                        best = Some(ev);
                    }
                    None => hi = mid,
                }
            }
        }
    } else {
        while best.is_none() {
            alpha /= params.expansion;
            if alpha < params.alpha_min {
                return Ok(PredictorOutcome {
                    alpha: 0.0,
                    next: None,
                    newton_residual,
                });
            }
            best = trial(alpha);
        }
    }
    Ok(PredictorOutcome {
        alpha,
        next: best,
        newton_residual,
    })
}

/// Corrector phase: up to `r_c` centering steps of length `α_c`, stopping as
/// soon as the iterate is back in `N(η)`. Returns the number of steps taken.
pub fn corrector_phase(
    problem: &ConicProblem,
    mut cur: EvaluatedIterate,
    params: &SolverParams,
) -> Result<(EvaluatedIterate, usize)> {
    for step in 0..params.r_c {
        if cur.metrics.in_neighborhood(params.eta) {
            return Ok((cur, step));
        }
        let sys = NewtonSystem::new(problem, &cur.barrier, cur.metrics.mu, cur.z.tau, use_full(problem, params))?;
        let rhs = corrector_rhs(problem, &cur.metrics.psi_x, cur.metrics.psi_tau);
        let d = sys.solve(&rhs, params.refinement_passes)?;
        // α_c is a full step in practice; shorten only if it would leave the cone
        let mut alpha = params.alpha_c;
        cur = loop {
            match evaluate(problem, cur.z.step(&d, alpha)) {
                Ok(ev) => break ev,
                Err(_) if alpha > 1e-4 => alpha *= 0.5,
                Err(_) => return Err(Error::Numerical("corrector step leaves the cone".into())),
            }
        };
    }
    if cur.metrics.in_neighborhood(params.eta) {
        Ok((cur, params.r_c))
    } else {
        Err(Error::Numerical(format!(
            "not back in the eta-neighborhood after {} corrector steps (norm/mu = {:.3e})",
            params.r_c,
            cur.metrics.norm / cur.metrics.mu
        )))
    }
}

fn finish(
    problem: &ConicProblem,
    ev: &EvaluatedIterate,
    status: Status,
    iterations: usize,
    trace: Vec<TraceRow>,
    message: Option<String>,
) -> SolveResult {
    let z = &ev.z;
    let m = measures(problem, z);
    let t = z.tau;
    SolveResult {
        status,
        x: &z.x / t,
        y: &z.y / t,
        s: &z.s / t,
        tau: t,
        kappa: z.kappa,
        mu: ev.metrics.mu,
        primal_objective: problem.c().dot(&z.x) / t,
        dual_objective: problem.b().dot(&z.y) / t,
        primal_residual: m.primal,
        dual_residual: m.dual,
        relative_gap: m.gap,
        iterations,
        trace,
        iterate: z.clone(),
        message,
    }
}

pub fn solve(problem: &ConicProblem, params: &SolverParams) -> Result<SolveResult> {
    solve_with(problem, params, |_| {})
}

/// Like [`solve`], calling `observer` on the starting point and on every
/// iterate accepted after a corrector phase.
pub fn solve_with(
    problem: &ConicProblem,
    params: &SolverParams,
    mut observer: impl FnMut(&EvaluatedIterate),
) -> Result<SolveResult> {
    params.validate()?;
    let mut cur = evaluate(problem, initial_point(problem)?)?;
    observer(&cur);
    let mut trace = Vec::new();
    let mut stalls = 0;
    for iter in 0.. {
        if let Some(status) = classify(problem, &cur, params) {
            return Ok(finish(problem, &cur, status, iter, trace, None));
        }
        if iter == params.max_iters {
            return Ok(finish(problem, &cur, Status::IterationLimit, iter, trace, None));
        }
        let failure = |cur: &EvaluatedIterate, trace: Vec<TraceRow>, e: Error| {
            Ok(finish(problem, cur, Status::NumericalFailure, iter, trace, Some(e.to_string())))
        };

        let before = embedding_residual(problem, &cur.z);
        let pred = match predictor_step(problem, &cur, params) {
            Ok(p) => p,
            Err(e) => return failure(&cur, trace, e),
        };
        let (alpha, predicted) = match pred.next {
            Some(ev) => {
                stalls = 0;
                (pred.alpha, ev)
            }
            None => {
                stalls += 1;
                if stalls >= params.stall_limit {
                    let e = Error::Numerical(format!("predictor stalled {stalls} times in a row"));
                    return failure(&cur, trace, e);
                }
                (0.0, cur.clone())
            }
        };
        let after = embedding_residual(problem, &predicted.z);
        let before_norm = before.norm();
        let shrink_error = if before_norm > 0.0 {
            after.distance_to_scaled(&before, 1.0 - alpha) / before_norm
        } else {
            0.0
        };
        let predictor_ratio = predicted.metrics.norm / predicted.metrics.mu;

        let (next, steps) = match corrector_phase(problem, predicted, params) {
            Ok(r) => r,
            Err(e) => return failure(&cur, trace, e),
        };
        cur = next;
        trace.push(TraceRow {
            iter: iter + 1,
            mu: cur.metrics.mu,
            alpha_p: alpha,
            nbhd_norm: cur.metrics.norm,
            corrector_steps: steps,
            predictor_ratio,
            residual_norm: before_norm,
            residual_shrink_error: shrink_error,
            newton_residual: pred.newton_residual,
        });
        observer(&cur);
    }
    unreachable!("the iteration loop only exits by returning")
}
