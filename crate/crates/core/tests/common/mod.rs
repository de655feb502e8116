#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use wsos::cone::{InterpWsosCone, ProductCone};
use wsos::interpolation::{standard_points, BoxDomain};
use wsos::problems::box_weights;
use wsos::solver::ConicProblem;

/// Random box of dimension `n` with sides in `[0.5, 3]`.
pub fn random_box(rng: &mut impl Rng, n: usize) -> BoxDomain {
    let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..0.0)).collect();
    let upper = lower.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
    BoxDomain::new(lower, upper).unwrap()
}

/// Box-weighted cone of degree `d` on `dom` at the standard points.
pub fn box_cone(dom: &BoxDomain, d: usize) -> InterpWsosCone {
    let pts = standard_points(dom.dim(), 2 * d, dom).unwrap();
    let (weights, degrees) = box_weights(dom, d);
    InterpWsosCone::build(&pts, &weights, &degrees).unwrap()
}

/// Random box cone with `n ∈ {1, 2, 3}` and `d ≤ 8`, capped so that `U`
/// stays below about 100.
pub fn random_cone(rng: &mut impl Rng) -> InterpWsosCone {
    let n = rng.random_range(1..=3);
    let dmax = [8, 5, 3][n - 1];
    let d = rng.random_range(1..=dmax);
    box_cone(&random_box(rng, n), d)
}

/// Positive point with entries spread over `e^{±2}`; always interior.
pub fn random_interior(rng: &mut impl Rng, u: usize) -> DVector<f64> {
    DVector::from_fn(u, |_, _| rng.random_range(-2.0f64..2.0).exp())
}

pub fn unit_direction(rng: &mut impl Rng, u: usize) -> DVector<f64> {
    let h = DVector::from_fn(u, |_, _| rng.random_range(-1.0..1.0));
    let norm = h.norm();
    h / norm
}

pub fn spectral_condition(m: &DMatrix<f64>) -> f64 {
    let ev = m.clone().symmetric_eigen().eigenvalues;
    ev.max() / ev.min()
}

/// `𝟏ᵀx = 1` and `𝟏ᵀx = 2` over a univariate cone of degree `d`.
pub fn contradictory_rows(d: usize) -> ConicProblem {
    let cone = box_cone(&BoxDomain::reference(1), d);
    let u = cone.dim();
    ConicProblem::new(
        DMatrix::from_element(2, u, 1.0),
        DVector::from_vec(vec![1.0, 2.0]),
        DVector::from_element(u, 1.0),
        ProductCone::single(cone),
    )
    .unwrap()
}
