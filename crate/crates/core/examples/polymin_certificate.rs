//! Lower bound for a benchmark polynomial with an SOS certificate.

use wsos::problems::{build_polymin, builtin_poly, default_polymin_degree, grid_lower_bound_oracle};
use wsos::recovery::{certificates_from_result, sos_terms, verify_certificate};
use wsos::solver::{solve, SolverParams};

fn main() -> wsos::Result<()> {
    let f = builtin_poly("butcher")?;
    let built = build_polymin(&f, default_polymin_degree(&f))?;
    let r = solve(&built.problem, &SolverParams::default())?;
    println!("{:?}: bound {:.10} in {} iterations", r.status, r.dual_objective, r.iterations);
    println!("grid oracle: {:.10}", grid_lower_bound_oracle(&f, 40));

    let cone = &built.problem.cone().factors()[0];
    let cert = &certificates_from_result(&built.problem, &r)?[0];
    let report = verify_certificate(cone, &r.s, cert, 1e-8);
    println!(
        "adjoint residual {:.2e}, min eigenvalues {:?}, verified {}",
        cert.adjoint_residual, cert.min_eigenvalues, report.passed
    );
    let sos = sos_terms(cert, cone)?;
    let terms: usize = sos.blocks.iter().map(|b| b.terms.len()).sum();
    let err = (sos.evaluate(cone) - &r.s).amax() / r.s.amax();
    println!("{terms} weighted squares reproduce f - bound to {err:.1e}");
    Ok(())
}
