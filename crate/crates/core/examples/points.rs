//! Point sets for interpolation: sizes and conditioning.

use wsos::interpolation::{
    approx_fekete_points, box_quadrature_weights, cheb1_points, padua_points, poly_space_dim,
    vandermonde_inverse_condition, BoxDomain,
};

fn main() -> wsos::Result<()> {
    let cheb = cheb1_points(20);
    println!("cheb1(20): {} points, sigma_min/sigma_max {:.2}", cheb.len(), vandermonde_inverse_condition(&cheb, 20));

    let padua = padua_points(10)?;
    println!(
        "padua(10): {} points (dim P_10 = {}), sigma_min/sigma_max {:.2}",
        padua.len(),
        poly_space_dim(2, 10),
        vandermonde_inverse_condition(&padua, 10)
    );

    let dom = BoxDomain::reference(3);
    let fekete = approx_fekete_points(3, 6, &dom)?;
    println!("fekete(3, 6): {} points, sigma_min/sigma_max {:.2}", fekete.len(), vandermonde_inverse_condition(&fekete, 6));

    // weights integrate every polynomial of degree <= 6 exactly over [-1, 1]^3
    let w = box_quadrature_weights(&fekete, 6)?;
    println!("quadrature weights sum to {:.12} (volume {})", w.sum(), dom.volume());
    Ok(())
}
