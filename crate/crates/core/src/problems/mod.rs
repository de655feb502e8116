//! Problem builders: polynomial lower envelopes and box-constrained
//! polynomial minimization, plus the named test polynomials and a sampling
//! oracle for the minimum.

mod file;
mod oracle;
mod poly;

pub use file::{BlockFile, ConeFile, ProblemFile, WSOS_INTERP};
pub use oracle::grid_lower_bound_oracle;
pub use poly::{builtin_poly, PolySpec, PolySpecFile, BUILTIN_NAMES};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{InterpWsosCone, ProductCone, Weight};
use crate::error::{Error, Result};
use crate::interpolation::{box_quadrature_weights, poly_space_dim, standard_points, BoxDomain, PointSet};
use crate::solver::ConicProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub weights: Vec<Weight>,
    pub degrees: Vec<usize>,
}

/// A conic problem together with the interpolation points it was built on.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: ConicProblem,
    pub points: PointSet,
    pub meta: ProblemMeta,
}

impl BuiltProblem {
    pub fn cone(&self) -> &ProductCone {
        self.problem.cone()
    }
}

/// Box weights `(u_j − t_j)(t_j − ℓ_j)` for every coordinate, then `1`, with
/// degrees `d − 1` and `d`.
pub fn box_weights(domain: &BoxDomain, d: usize) -> (Vec<Weight>, Vec<usize>) {
    let n = domain.dim();
    let mut weights: Vec<Weight> = (0..n)
        .map(|j| Weight::Interval {
            dim: j,
            lower: domain.lower[j],
            upper: domain.upper[j],
        })
        .collect();
    weights.push(Weight::Unit);
    let mut degrees = vec![d - 1; n];
    degrees.push(d);
    (weights, degrees)
}

/// Largest polynomial lower approximation of `min_j f_j` on the box:
/// `max ∫y  s.t.  f_j − y ∈ Σ` for every `j`. In solver form `A = [I … I]`,
/// `b` the quadrature weights and `c` the stacked values `f_j(t_u)`.
pub fn build_envelope(n: usize, d: usize, domain: &BoxDomain, fs: &[PolySpec]) -> Result<BuiltProblem> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument("envelope needs at least one polynomial".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("envelope degree d must be >= 1".into()));
    }
    if domain.dim() != n {
        return Err(Error::Dimension(format!("box of dimension {} for n = {n}", domain.dim())));
    }
    for f in fs {
        if f.n() != n {
            return Err(Error::Dimension(format!("polynomial in {} variables for n = {n}", f.n())));
        }
        if f.degree() > 2 * d {
            return Err(Error::Degree {
                found: f.degree(),
                max: 2 * d,
            });
        }
    }
    let k = fs.len();
    let points = standard_points(n, 2 * d, domain)?;
    let u = points.len();
    let (weights, degrees) = box_weights(domain, d);
    let cone = InterpWsosCone::build(&points, &weights, &degrees)?;
    let product = ProductCone::new(vec![cone; k])?;

    let mut a = DMatrix::zeros(u, k * u);
    for j in 0..k {
        a.view_mut((0, j * u), (u, u)).fill_with_identity();
    }
    let b = box_quadrature_weights(&points, 2 * d)?;
    let mut c = DVector::zeros(k * u);
    for (j, f) in fs.iter().enumerate() {
        c.rows_mut(j * u, u).copy_from(&f.eval_points(&points));
    }
    Ok(BuiltProblem {
        problem: ConicProblem::new(a, b, c, product)?,
        points,
        meta: ProblemMeta {
            n,
            d,
            k,
            weights,
            degrees,
        },
    })
}

/// Default relaxation degree for minimizing `f`: `⌈deg f / 2⌉`, at least 1.
pub fn default_polymin_degree(f: &PolySpec) -> usize {
    f.degree().div_ceil(2).max(1)
}

/// Lower bound for `min f` on its box: `max y  s.t.  f − y ∈ Σ`, i.e. in
/// solver form `A = 𝟏ᵀ`, `b = 1`, `c = (f(t_u))`.
pub fn build_polymin(f: &PolySpec, d: usize) -> Result<BuiltProblem> {
    if d == 0 {
        return Err(Error::InvalidArgument("relaxation degree d must be >= 1".into()));
    }
    if f.degree() > 2 * d {
        return Err(Error::Degree {
            found: f.degree(),
            max: 2 * d,
        });
    }
    let n = f.n();
    let domain = f.domain().clone();
    let points = standard_points(n, 2 * d, &domain)?;
    let u = points.len();
    let (weights, degrees) = box_weights(&domain, d);
    let cone = InterpWsosCone::build(&points, &weights, &degrees)?;
    let a = DMatrix::from_element(1, u, 1.0);
    let b = DVector::from_element(1, 1.0);
    let c = f.eval_points(&points);
    Ok(BuiltProblem {
        problem: ConicProblem::new(a, b, c, ProductCone::single(cone))?,
        points,
        meta: ProblemMeta {
            n,
            d,
            k: 1,
            weights,
            degrees,
        },
    })
}

/// `k` polynomials of degree `deg` with independent Chebyshev coefficients
/// uniform on `[−1, 1]`, deterministic in `seed`.
pub fn random_envelope_inputs(n: usize, deg: usize, k: usize, seed: u64, domain: &BoxDomain) -> Result<Vec<PolySpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = poly_space_dim(n, deg);
    (0..k)
        .map(|_| {
            let coeffs = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
            PolySpec::chebyshev(n, deg, coeffs, domain.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_sizes() {
        let dom = BoxDomain::reference(1);
        let fs = random_envelope_inputs(1, 5, 2, 1, &dom).unwrap();
        let built = build_envelope(1, 100, &dom, &fs).unwrap();
        assert_eq!(built.points.len(), 201);
        assert_eq!(built.cone().dim(), 402);
        assert_eq!(built.problem.nu_bar(), 403.0);
        let dom2 = BoxDomain::reference(2);
        let fs = random_envelope_inputs(2, 5, 2, 1, &dom2).unwrap();
        assert_eq!(build_envelope(2, 10, &dom2, &fs).unwrap().points.len(), 231);
    }

    #[test]
    fn envelope_rejects_bad_input() {
        let dom = BoxDomain::reference(1);
        let fs = random_envelope_inputs(1, 5, 1, 1, &dom).unwrap();
        assert!(matches!(build_envelope(1, 2, &dom, &fs), Err(Error::Degree { .. })));
        assert!(build_envelope(1, 3, &dom, &[]).is_err());
    }

    #[test]
    fn random_inputs_are_deterministic() {
        let dom = BoxDomain::reference(1);
        let a = random_envelope_inputs(1, 5, 2, 1, &dom).unwrap();
        let b = random_envelope_inputs(1, 5, 2, 1, &dom).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert_eq!(a[0].chebyshev_coefficients().unwrap().len(), 6);
    }

    #[test]
    fn polymin_sizes() {
        let sizes: Vec<usize> = ["butcher", "caprasse", "magnetism"]
            .iter()
            .map(|name| {
                let f = builtin_poly(name).unwrap();
                build_polymin(&f, default_polymin_degree(&f)).unwrap().points.len()
            })
            .collect();
        assert_eq!(sizes, vec![210, 70, 36]);
    }

    #[test]
    fn builtin_chebyshev_matches_monomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in BUILTIN_NAMES {
            let f = builtin_poly(name).unwrap();
            let cheb = PolySpec::chebyshev(
                f.n(),
                f.degree(),
                f.chebyshev_coefficients().unwrap(),
                f.domain().clone(),
            )
            .unwrap();
            for _ in 0..100 {
                let t: Vec<f64> = (0..f.n())
                    .map(|j| rng.random_range(f.domain().lower[j]..=f.domain().upper[j]))
                    .collect();
                let (a, b) = (f.eval(&t), cheb.eval(&t));
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{name}: {a} vs {b}");
            }
        }
    }
}
