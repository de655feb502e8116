//! Writes a problem to JSON, reads it back and solves it.

use wsos::interpolation::BoxDomain;
use wsos::problems::{build_envelope, random_envelope_inputs, ProblemFile};
use wsos::solver::{solve, SolverParams};

fn main() -> wsos::Result<()> {
    let dom = BoxDomain::reference(2);
    let built = build_envelope(2, 4, &dom, &random_envelope_inputs(2, 4, 2, 7, &dom)?)?;
    let text = serde_json::to_string(&ProblemFile::from_problem(&built.problem))?;
    println!("problem file: {} bytes", text.len());

    let problem = ProblemFile::parse(&text)?.into_problem()?;
    let params = SolverParams {
        tol_gap: 1e-7,
        tol_infeas: 1e-7,
        ..Default::default()
    };
    let r = solve(&problem, &params)?;
    println!(
        "{:?}: primal {:.8} dual {:.8} ({} iterations)",
        r.status, r.primal_objective, r.dual_objective, r.iterations
    );
    Ok(())
}
