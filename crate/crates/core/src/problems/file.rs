//! JSON problem files:
//!
//! ```text
//! {"A": [[...], ...], "b": [...], "c": [...],
//!  "cones": [{"type": "wsos_interp", "U": 5,
//!             "blocks": [{"L": 3, "P_scaled": [row-major U×L]}]}]}
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone::{InterpWsosCone, ProductCone};
use crate::error::{Error, Result};
use crate::solver::ConicProblem;

pub const WSOS_INTERP: &str = "wsos_interp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cones: Vec<ConeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFile {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "U")]
    pub u: usize,
    pub blocks: Vec<BlockFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    #[serde(rename = "L")]
    pub l: usize,
    /// Row-major `U × L`.
    #[serde(rename = "P_scaled")]
    pub p_scaled: Vec<f64>,
}

impl ProblemFile {
    /// Parses and validates; JSON syntax and type errors carry line and
    /// column, structural errors name the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn from_problem(problem: &ConicProblem) -> Self {
        let a = problem.a();
        Self {
            a: a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: problem.b().iter().copied().collect(),
            c: problem.c().iter().copied().collect(),
            cones: problem
                .cone()
                .factors()
                .iter()
                .map(|f| ConeFile {
                    kind: WSOS_INTERP.into(),
                    u: f.dim(),
                    blocks: f
                        .blocks()
                        .iter()
                        .map(|b| {
                            let p = b.p_scaled();
                            BlockFile {
                                l: p.ncols(),
                                p_scaled: p.transpose().iter().copied().collect(),
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let schema = |msg: String| Err(Error::Schema(msg));
        if self.a.is_empty() {
            return schema("A: at least one constraint row is required".into());
        }
        if self.cones.is_empty() {
            return schema("cones: at least one cone is required".into());
        }
        let n: usize = self.cones.iter().map(|c| c.u).sum();
        if self.c.len() != n {
            return schema(format!("c: expected {n} entries (sum of cone U), found {}", self.c.len()));
        }
        if self.b.len() != self.a.len() {
            return schema(format!("b: expected {} entries (rows of A), found {}", self.a.len(), self.b.len()));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != n {
                return schema(format!("A[{i}]: expected {n} entries, found {}", row.len()));
            }
        }
        for (k, cone) in self.cones.iter().enumerate() {
            if cone.kind != WSOS_INTERP {
                return schema(format!("cones[{k}].type: unknown cone type '{}'", cone.kind));
            }
            if cone.u == 0 {
                return schema(format!("cones[{k}].U: must be positive"));
            }
            if cone.blocks.is_empty() {
                return schema(format!("cones[{k}].blocks: at least one block is required"));
            }
            for (j, block) in cone.blocks.iter().enumerate() {
                if block.l == 0 || block.l > cone.u {
                    return schema(format!("cones[{k}].blocks[{j}].L: must be in 1..={}", cone.u));
                }
                if block.p_scaled.len() != cone.u * block.l {
                    return schema(format!(
                        "cones[{k}].blocks[{j}].P_scaled: expected {} entries (U*L), found {}",
                        cone.u * block.l,
                        block.p_scaled.len()
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn into_problem(self) -> Result<ConicProblem> {
        self.validate()?;
        let n = self.c.len();
        let k = self.a.len();
        let a = DMatrix::from_row_iterator(k, n, self.a.into_iter().flatten());
        let cones = self
            .cones
            .into_iter()
            .map(|cone| {
                let u = cone.u;
                let blocks = cone
                    .blocks
                    .into_iter()
                    .map(|b| DMatrix::from_row_slice(u, b.l, &b.p_scaled))
                    .collect();
                InterpWsosCone::from_scaled_blocks(u, blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        ConicProblem::new(a, DVector::from_vec(self.b), DVector::from_vec(self.c), ProductCone::new(cones)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::BoxDomain;
    use crate::problems::{build_envelope, random_envelope_inputs};

    #[test]
    fn round_trip_is_exact() {
        let dom = BoxDomain::reference(1);
        let built = build_envelope(1, 3, &dom, &random_envelope_inputs(1, 5, 2, 3, &dom).unwrap()).unwrap();
        let file = ProblemFile::from_problem(&built.problem);
        let text = serde_json::to_string(&file).unwrap();
        let back = ProblemFile::parse(&text).unwrap().into_problem().unwrap();
        assert_eq!(back.a(), built.problem.a());
        assert_eq!(back.b(), built.problem.b());
        assert_eq!(back.c(), built.problem.c());
        for (f, g) in back.cone().factors().iter().zip(built.problem.cone().factors()) {
            for (p, q) in f.blocks().iter().zip(g.blocks()) {
                assert_eq!(p.p_scaled(), q.p_scaled());
            }
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = r#"{"A": [], "b": [], "c": [1.0], "cones": [{"type": "wsos_interp", "U": 1, "blocks": [{"L": 1, "P_scaled": [1.0]}]}]}"#;
        let e = ProblemFile::parse(bad).unwrap_err().to_string();
        assert!(e.contains("A:"), "{e}");

        let short = r#"{"A": [[1.0, 1.0]], "b": [1.0], "c": [1.0, 2.0], "cones": [{"type": "wsos_interp", "U": 2, "blocks": [{"L": 1, "P_scaled": [1.0]}]}]}"#;
        let e = ProblemFile::parse(short).unwrap_err().to_string();
        assert!(e.contains("cones[0].blocks[0].P_scaled"), "{e}");

        let unknown = r#"{"A": [[1.0]], "b": [1.0], "c": [1.0], "cones": [], "extra": 1}"#;
        let e = ProblemFile::parse(unknown).unwrap_err().to_string();
        assert!(e.contains("extra") && e.contains("line"), "{e}");

        let kind = r#"{"A": [[1.0]], "b": [1.0], "c": [1.0], "cones": [{"type": "psd", "U": 1, "blocks": [{"L": 1, "P_scaled": [1.0]}]}]}"#;
        assert!(ProblemFile::parse(kind).unwrap_err().to_string().contains("cones[0].type"));
    }
}
