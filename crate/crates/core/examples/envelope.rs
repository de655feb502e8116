//! Polynomial lower envelope of two random polynomials on [-1, 1].

use wsos::interpolation::BoxDomain;
use wsos::problems::{build_envelope, random_envelope_inputs};
use wsos::solver::{solve, SolverParams};

fn main() -> wsos::Result<()> {
    let dom = BoxDomain::reference(1);
    let fs = random_envelope_inputs(1, 5, 2, 1, &dom)?;
    let built = build_envelope(1, 20, &dom, &fs)?;
    let r = solve(&built.problem, &SolverParams::default())?;
    println!(
        "{:?} after {} iterations; integral of the envelope = {:.10}",
        r.status, r.iterations, r.dual_objective
    );

    // the envelope y sits below both polynomials at every node
    let worst = built
        .points
        .points()
        .iter()
        .enumerate()
        .map(|(u, t)| fs.iter().map(|f| f.eval(t)).fold(f64::INFINITY, f64::min) - r.y[u])
        .fold(f64::INFINITY, f64::min);
    println!("min_u (min_j f_j - y)(t_u) = {worst:.3e}");
    Ok(())
}
