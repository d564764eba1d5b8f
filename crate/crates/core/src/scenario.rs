//! Scenario file for trajectory runs.
//!
//! ```json
//! { "structure": [2, 2, 1, 1],
//!   "h0": "zero",
//!   "v": "exchange(1.0)",
//!   "f": { "dim": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]] },
//!   "rho0": "ground-excited",
//!   "grid": { "t0": 0.0, "t1": 3.14159, "steps": 1000 } }
//! ```

use serde::{Deserialize, Serialize};

use crate::dynamics::{exchange_interaction, ground_excited_state, HamiltonianSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::literal::MatrixLiteral;
use crate::operator::{DensityMatrix, HermitianOperator};
use crate::structure::TensorStructure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixOrName {
    Name(String),
    Literal(MatrixLiteral),
}

impl Default for MatrixOrName {
    fn default() -> Self {
        MatrixOrName::Name("zero".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub structure: [usize; 4],
    #[serde(default)]
    pub h0: MatrixOrName,
    pub v: MatrixOrName,
    pub f: MatrixLiteral,
    pub rho0: MatrixOrName,
    pub grid: TimeGrid,
}

/// A scenario with every field validated and built.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub hamiltonian: HamiltonianSpec,
    pub f: HermitianOperator,
    pub rho0: DensityMatrix,
    pub grid: Vec<f64>,
}

fn field_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("scenario field `{field}`: {e}"))
}

/// Parses `exchange(g)`.
fn parse_exchange(name: &str) -> Option<f64> {
    name.trim()
        .strip_prefix("exchange(")?
        .strip_suffix(')')?
        .trim()
        .parse()
        .ok()
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("scenario: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let s = TensorStructure::try_from(self.structure).map_err(|e| field_err("structure", e))?;
        let d = s.total_dim();

        let operator = |field: &str, spec: &MatrixOrName| -> Result<HermitianOperator> {
            let op = match spec {
                MatrixOrName::Name(n) if n == "zero" => HermitianOperator::zeros(d),
                MatrixOrName::Name(n) => match parse_exchange(n) {
                    Some(g) => exchange_interaction(g, &s).map_err(|e| field_err(field, e))?,
                    None => return Err(field_err(field, format!("unknown model {n:?}"))),
                },
                MatrixOrName::Literal(l) => l.to_operator().map_err(|e| field_err(field, e))?,
            };
            if op.dim() != d {
                return Err(field_err(field, format!("dimension {} != {d}", op.dim())));
            }
            Ok(op)
        };
        let h0 = operator("h0", &self.h0)?;
        let v = operator("v", &self.v)?;

        let f = self.f.to_operator().map_err(|e| field_err("f", e))?;
        if f.dim() != s.d_w() {
            return Err(field_err(
                "f",
                format!("dimension {} != d_W = {}", f.dim(), s.d_w()),
            ));
        }

        let rho0 = match &self.rho0 {
            MatrixOrName::Name(n) if n == "ground-excited" => {
                ground_excited_state(&s).map_err(|e| field_err("rho0", e))?
            }
            MatrixOrName::Name(n) => return Err(field_err("rho0", format!("unknown state {n:?}"))),
            MatrixOrName::Literal(l) => l.to_density().map_err(|e| field_err("rho0", e))?,
        };
        if rho0.dim() != d {
            return Err(field_err(
                "rho0",
                format!("dimension {} != {d}", rho0.dim()),
            ));
        }

        let grid = self.grid.points().map_err(|e| field_err("grid", e))?;
        Ok(ResolvedScenario {
            hamiltonian: HamiltonianSpec::new(h0, v, s)?,
            f,
            rho0,
            grid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;

    const EXCHANGE: &str = r#"{
        "structure": [2, 2, 1, 1],
        "h0": "zero",
        "v": "exchange(1)",
        "f": {"dim": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]},
        "rho0": "ground-excited",
        "grid": {"t0": 0.0, "t1": 1.0, "steps": 10}
    }"#;

    #[test]
    fn exchange_scenario_resolves() {
        let r = Scenario::from_json(EXCHANGE).unwrap().resolve().unwrap();
        assert_eq!(r.f, pauli::z());
        assert_eq!(r.grid.len(), 11);
        assert_eq!(r.hamiltonian.v().dim(), 4);
    }

    #[test]
    fn h0_defaults_to_zero() {
        let text = EXCHANGE.replace(r#""h0": "zero","#, "");
        let r = Scenario::from_json(&text).unwrap().resolve().unwrap();
        assert_eq!(r.hamiltonian.h0(), &HermitianOperator::zeros(4));
    }

    #[test]
    fn field_level_messages() {
        let cases = [
            (EXCHANGE.replace("exchange(1)", "swap(1)"), "`v`"),
            (EXCHANGE.replace("ground-excited", "thermal"), "`rho0`"),
            (
                EXCHANGE.replace("[2, 2, 1, 1]", "[2, 0, 1, 1]"),
                "`structure`",
            ),
            (EXCHANGE.replace("[2, 2, 1, 1]", "[3, 2, 1, 1]"), "`v`"),
            (
                EXCHANGE.replace(r#""steps": 10"#, r#""steps": 1"#),
                "`grid`",
            ),
            (
                EXCHANGE.replace("[[1, 0], [0, -1]]", "[[1, 2], [0, -1]]"),
                "`f`",
            ),
        ];
        for (text, field) in cases {
            let err = Scenario::from_json(&text).unwrap().resolve().unwrap_err();
            assert!(
                err.to_string().contains(field),
                "{err} should mention {field}"
            );
        }
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(Scenario::from_json("{").is_err());
        assert!(Scenario::from_json(r#"{"structure": [2,2,1,1]}"#).is_err());
        let extra = EXCHANGE.replacen('{', r#"{"bogus": 1, "#, 1);
        assert!(Scenario::from_json(&extra).is_err());
    }

    #[test]
    fn exchange_name_parsing() {
        assert_eq!(parse_exchange("exchange(0.5)"), Some(0.5));
        assert_eq!(parse_exchange(" exchange( 2 ) "), Some(2.0));
        assert_eq!(parse_exchange("exchange"), None);
        assert_eq!(parse_exchange("exchange(x)"), None);
    }
}
