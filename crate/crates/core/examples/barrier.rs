//! Barrier of a dual WSOS cone: value, gradient, Hessian and the
//! logarithmic homogeneity identities.

use nalgebra::DVector;
use wsos::cone::InterpWsosCone;
use wsos::interpolation::{standard_points, BoxDomain};
use wsos::problems::box_weights;

fn main() -> wsos::Result<()> {
    let dom = BoxDomain::reference(2);
    let d = 3;
    let pts = standard_points(2, 2 * d, &dom)?;
    let (weights, degrees) = box_weights(&dom, d);
    let cone = InterpWsosCone::build(&pts, &weights, &degrees)?;
    let nu = cone.barrier_parameter() as f64;
    println!("U = {}, blocks = {}, nu = {nu}", cone.dim(), cone.blocks().len());

    let x = DVector::from_fn(cone.dim(), |i, _| 1.0 + 0.3 * ((i as f64) * 0.7).sin());
    let f = cone.barrier(&x)?;
    let f2 = cone.barrier(&(&x * 2.0))?;
    println!("F(x) = {:.10}", f.value);
    println!("F(2x) - F(x) + nu ln 2 = {:.2e}", f2.value - f.value + nu * 2f64.ln());
    println!("x'g + nu = {:.2e}", x.dot(&f.gradient) + nu);
    println!("|Hx + g| = {:.2e}", (&f.hessian * &x + &f.gradient).amax());
    Ok(())
}
