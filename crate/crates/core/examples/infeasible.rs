//! Contradictory constraints: the solver returns a Farkas certificate.

use nalgebra::{DMatrix, DVector};
use wsos::cone::{InterpWsosCone, ProductCone};
use wsos::interpolation::{standard_points, BoxDomain};
use wsos::problems::box_weights;
use wsos::solver::{solve, ConicProblem, SolverParams};

fn main() -> wsos::Result<()> {
    let dom = BoxDomain::reference(1);
    let pts = standard_points(1, 4, &dom)?;
    let (weights, degrees) = box_weights(&dom, 2);
    let cone = InterpWsosCone::build(&pts, &weights, &degrees)?;
    let u = cone.dim();
    // 1'x = 1 and 1'x = 2
    let a = DMatrix::from_element(2, u, 1.0);
    let b = DVector::from_vec(vec![1.0, 2.0]);
    let c = DVector::from_element(u, 1.0);
    let problem = ConicProblem::new(a, b, c, ProductCone::single(cone))?;

    let r = solve(&problem, &SolverParams::default())?;
    let z = &r.iterate;
    let bty = problem.b().dot(&z.y);
    let res = (problem.a().tr_mul(&z.y) + &z.s).norm();
    println!("{:?} after {} iterations", r.status, r.iterations);
    println!("b'y = {bty:.3e}, |A'y + s| / b'y = {:.2e}", res / bty);
    Ok(())
}
