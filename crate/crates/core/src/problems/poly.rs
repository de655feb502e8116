//! Polynomials over boxes: Chebyshev-coefficient, monomial (builtin test
//! problems) and point-value representations.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpolation::{
    cheb_vandermonde, chebyshev_values, multi_indices, poly_space_dim, solve_square, standard_points,
    BoxDomain, PointSet,
};

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Coefficients of `T_α` in the box's reference coordinates, graded-lex.
    Chebyshev(Vec<f64>),
    /// `(exponents, coefficient)` pairs in the box's own coordinates.
    Monomial(Vec<(Vec<usize>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolySpec {
    n: usize,
    deg: usize,
    repr: Repr,
    domain: BoxDomain,
    name: Option<String>,
}

impl PolySpec {
    /// Polynomial `Σ coeffs[j] T_{α_j}` with `α_j` in graded-lex order over
    /// the reference coordinates of `domain`.
    pub fn chebyshev(n: usize, deg: usize, coeffs: Vec<f64>, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != n || n == 0 {
            return Err(Error::Dimension(format!("box of dimension {} for n = {n}", domain.dim())));
        }
        let want = poly_space_dim(n, deg);
        if coeffs.len() != want {
            return Err(Error::Dimension(format!(
                "{} coefficients for n = {n}, deg = {deg} (expected {want})",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self {
            n,
            deg,
            repr: Repr::Chebyshev(coeffs),
            domain,
            name: None,
        })
    }

    /// Polynomial from `(exponents, coefficient)` terms in box coordinates.
    pub fn monomial(n: usize, terms: Vec<(Vec<usize>, f64)>, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != n || terms.iter().any(|(e, _)| e.len() != n) {
            return Err(Error::Dimension("monomial exponents do not match the box".into()));
        }
        let deg = terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0);
        Ok(Self {
            n,
            deg,
            repr: Repr::Monomial(terms),
            domain,
            name: None,
        })
    }

    /// The polynomial of degree `≤ deg` taking `values` at `pts`.
    pub fn from_values(pts: &PointSet, deg: usize, values: &[f64]) -> Result<Self> {
        let v = cheb_vandermonde(pts, deg).values;
        if v.nrows() != v.ncols() {
            return Err(Error::NotUnisolvent(format!(
                "{} values for a polynomial space of dimension {}",
                v.nrows(),
                v.ncols()
            )));
        }
        if values.len() != pts.len() {
            return Err(Error::Dimension(format!("{} values for {} points", values.len(), pts.len())));
        }
        let coeffs = solve_square(&v, &DVector::from_column_slice(values))
            .ok_or_else(|| Error::NotUnisolvent("value points are not unisolvent".into()))?;
        Self::chebyshev(pts.n(), deg, coeffs.iter().copied().collect(), pts.domain().clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total degree (an upper bound for Chebyshev coefficient vectors).
    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.repr {
            Repr::Chebyshev(coeffs) => {
                let r = self.domain.to_reference(t);
                let tables: Vec<Vec<f64>> = r.iter().map(|&x| chebyshev_values(x, self.deg)).collect();
                multi_indices(self.n, self.deg)
                    .iter()
                    .zip(coeffs)
                    .map(|(alpha, c)| {
                        c * alpha.iter().enumerate().map(|(k, &a)| tables[k][a]).product::<f64>()
                    })
                    .sum()
            }
            Repr::Monomial(terms) => terms
                .iter()
                .map(|(e, c)| c * e.iter().zip(t).map(|(&p, &x)| x.powi(p as i32)).product::<f64>())
                .sum(),
        }
    }

    pub fn eval_points(&self, pts: &PointSet) -> DVector<f64> {
        DVector::from_iterator(pts.len(), pts.points().iter().map(|p| self.eval(p)))
    }

    /// Chebyshev coefficients, computed by interpolation at the standard
    /// point set when the polynomial is stored another way.
    pub fn chebyshev_coefficients(&self) -> Result<Vec<f64>> {
        match &self.repr {
            Repr::Chebyshev(c) => Ok(c.clone()),
            Repr::Monomial(_) => {
                let pts = standard_points(self.n, self.deg, &self.domain)?;
                let values: Vec<f64> = pts.points().iter().map(|p| self.eval(p)).collect();
                let spec = Self::from_values(&pts, self.deg, &values)?;
                spec.chebyshev_coefficients()
            }
        }
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }
}

/// Names accepted by [`builtin_poly`].
pub const BUILTIN_NAMES: [&str; 3] = ["butcher", "caprasse", "magnetism"];

fn term(e: &[usize], c: f64) -> (Vec<usize>, f64) {
    (e.to_vec(), c)
}

/// Standard test polynomials with their usual boxes.
pub fn builtin_poly(name: &str) -> Result<PolySpec> {
    let spec = match name.to_ascii_lowercase().as_str() {
        "butcher" => {
            let domain = BoxDomain::new(
                vec![-1.0, -0.1, -0.1, -1.0, -0.1, -0.1],
                vec![0.0, 0.9, 0.5, -0.1, -0.05, -0.03],
            )?;
            PolySpec::monomial(
                6,
                vec![
                    term(&[0, 2, 0, 0, 0, 1], 1.0),
                    term(&[0, 0, 2, 0, 1, 0], 1.0),
                    term(&[1, 0, 0, 2, 0, 0], -1.0),
                    term(&[0, 0, 0, 3, 0, 0], 1.0),
                    term(&[0, 0, 0, 2, 0, 0], 1.0),
                    term(&[1, 0, 0, 0, 0, 0], -1.0 / 3.0),
                    term(&[0, 0, 0, 1, 0, 0], 4.0 / 3.0),
                ],
                domain,
            )?
        }
        "caprasse" => PolySpec::monomial(
            4,
            vec![
                term(&[1, 0, 3, 0], -1.0),
                term(&[0, 1, 2, 1], 4.0),
                term(&[1, 0, 1, 2], 4.0),
                term(&[0, 1, 0, 3], 2.0),
                term(&[1, 0, 1, 0], 4.0),
                term(&[0, 0, 2, 0], 4.0),
                term(&[0, 1, 0, 1], -10.0),
                term(&[0, 0, 0, 2], -10.0),
                term(&[0, 0, 0, 0], 2.0),
            ],
            BoxDomain::new(vec![-0.5; 4], vec![0.5; 4])?,
        )?,
        "magnetism" => {
            let mut terms = vec![term(&[2, 0, 0, 0, 0, 0, 0], 1.0), term(&[1, 0, 0, 0, 0, 0, 0], -1.0)];
            for j in 1..7 {
                let mut e = vec![0; 7];
                e[j] = 2;
                terms.push((e, 2.0));
            }
            PolySpec::monomial(7, terms, BoxDomain::reference(7))?
        }
        _ => return Err(Error::UnknownPolynomial(name.to_string())),
    };
    Ok(spec.named(&name.to_ascii_lowercase()))
}

/// On-disk form of a [`PolySpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpecFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deg: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Points for `values`; the standard point set of degree `deg` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxDomain>,
}

impl PolySpecFile {
    pub fn into_spec(self) -> Result<PolySpec> {
        let need = |v: Option<usize>, field: &str| {
            v.ok_or_else(|| Error::Schema(format!("kind '{}' requires field '{field}'", self.kind)))
        };
        let domain_for = |n: usize| -> Result<BoxDomain> {
            match &self.domain {
                Some(b) => BoxDomain::new(b.lower.clone(), b.upper.clone())
                    .map_err(|e| Error::Schema(format!("box: {e}"))),
                None => Ok(BoxDomain::reference(n)),
            }
        };
        match self.kind.as_str() {
            "builtin" => {
                let name = self
                    .name
                    .clone()
                    .ok_or_else(|| Error::Schema("kind 'builtin' requires field 'name'".into()))?;
                builtin_poly(&name)
            }
            "chebyshev" => {
                let n = need(self.n, "n")?;
                let deg = need(self.deg, "deg")?;
                let coeffs = self
                    .coeffs
                    .clone()
                    .ok_or_else(|| Error::Schema("kind 'chebyshev' requires field 'coeffs'".into()))?;
                PolySpec::chebyshev(n, deg, coeffs, domain_for(n)?).map_err(|e| Error::Schema(e.to_string()))
            }
            "values" => {
                let n = need(self.n, "n")?;
                let deg = need(self.deg, "deg")?;
                let values = self
                    .values
                    .clone()
                    .ok_or_else(|| Error::Schema("kind 'values' requires field 'values'".into()))?;
                let domain = domain_for(n)?;
                let pts = match &self.points {
                    Some(p) => PointSet::new(p.clone(), domain)?,
                    None => standard_points(n, deg, &domain)?,
                };
                PolySpec::from_values(&pts, deg, &values).map_err(|e| Error::Schema(e.to_string()))
            }
            other => Err(Error::Schema(format!(
                "unknown kind '{other}' (expected chebyshev, builtin or values)"
            ))),
        }
    }

    pub fn from_spec(spec: &PolySpec) -> Result<Self> {
        if let Some(name) = spec.name() {
            return Ok(Self {
                kind: "builtin".into(),
                n: Some(spec.n),
                deg: Some(spec.deg),
                coeffs: None,
                name: Some(name.to_string()),
                values: None,
                points: None,
                domain: Some(spec.domain.clone()),
            });
        }
        Ok(Self {
            kind: "chebyshev".into(),
            n: Some(spec.n),
            deg: Some(spec.deg),
            coeffs: Some(spec.chebyshev_coefficients()?),
            name: None,
            values: None,
            points: None,
            domain: Some(spec.domain.clone()),
        })
    }
}
