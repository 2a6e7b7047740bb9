//! Scenario files: one JSON document holding either a suite
//! (`{"schema": 1, "scenarios": [...]}`) or a single bare scenario
//! object. The same schema serves hand-written and generated suites.

use crate::error::{Error, Result};
use bbl_core::geom::{v, Vec2};
use bbl_core::pconcave::{AffinePiece, PConcaveFn};
use bbl_core::polygon::ConvexPolygon;
use bbl_core::torsion::BetaExp;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Bm,
    Bbl,
    Stability,
    BmTau,
    Urysohn,
    PoissonBbl,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Bm,
        Kind::Bbl,
        Kind::Stability,
        Kind::BmTau,
        Kind::Urysohn,
        Kind::PoissonBbl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Bm => "bm",
            Kind::Bbl => "bbl",
            Kind::Stability => "stability",
            Kind::BmTau => "bm_tau",
            Kind::Urysohn => "urysohn",
            Kind::PoissonBbl => "poisson_bbl",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// Polygon literal: CCW list of [x, y] pairs (normalized on load).
pub type PolygonLit = Vec<[f64; 2]>;

/// Affine piece literal [a1, a2, b] for x ↦ a·x + b.
pub type PieceLit = [f64; 3];

/// Function literal: a power-concave cap over a polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionLit {
    pub domain: PolygonLit,
    pub p: f64,
    pub pieces: Vec<PieceLit>,
}

/// Concavity exponent of a Poisson forcing term: a number ≥ 1 or the
/// string "inf" for the constant-f limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaExpLit(pub BetaExp);

impl Serialize for BetaExpLit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            BetaExp::Finite(b) => s.serialize_f64(b),
            BetaExp::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BetaExpLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(BetaExpLit(BetaExp::Finite(b))),
            Raw::Text(s) if s == "inf" => Ok(BetaExpLit(BetaExp::Infinite)),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "beta_exp must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bodies: Option<Vec<PolygonLit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<FunctionLit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_pieces: Option<Vec<PieceLit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_exp: Option<BetaExpLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub schema: u32,
    pub scenarios: Vec<Scenario>,
}

/// Validated, fully constructed inputs for one scenario run.
pub enum Inputs {
    Bm {
        k0: ConvexPolygon,
        k1: ConvexPolygon,
        lambda: f64,
    },
    Bbl {
        u0: PConcaveFn,
        u1: PConcaveFn,
        p: f64,
        lambda: f64,
        quad_tol: f64,
    },
    Stability {
        u0: PConcaveFn,
        u1: PConcaveFn,
        p: f64,
        lambda: f64,
        quad_tol: f64,
    },
    BmTau {
        k0: ConvexPolygon,
        k1: ConvexPolygon,
        lambda: f64,
        mesh_h: f64,
    },
    Urysohn {
        k: ConvexPolygon,
        mesh_h: f64,
        angle_count: usize,
    },
    PoissonBbl {
        k0: ConvexPolygon,
        k1: ConvexPolygon,
        lambda: f64,
        f_pieces: Vec<AffinePiece>,
        beta_exp: BetaExp,
        mesh_h: f64,
    },
}

pub fn polygon_from_lit(lit: &PolygonLit) -> bbl_core::Result<ConvexPolygon> {
    let pts: Vec<Vec2> = lit.iter().map(|&[x, y]| v(x, y)).collect();
    ConvexPolygon::from_points(&pts)
}

pub fn pieces_from_lit(lit: &[PieceLit]) -> Vec<AffinePiece> {
    lit.iter()
        .map(|&[a1, a2, b]| AffinePiece { a: v(a1, a2), b })
        .collect()
}

pub fn function_from_lit(lit: &FunctionLit) -> bbl_core::Result<PConcaveFn> {
    PConcaveFn::make(
        polygon_from_lit(&lit.domain)?,
        lit.p,
        pieces_from_lit(&lit.pieces),
    )
}

impl Scenario {
    /// Checks the kind-specific required fields and parameter ranges,
    /// and constructs the typed inputs. `index` only feeds diagnostics.
    pub fn validate(&self, index: usize) -> Result<Inputs> {
        let fail = |field: &'static str, message: String| Error::Field {
            index,
            name: self.name.clone(),
            field,
            message,
        };
        let range = |field: &'static str, value: Option<f64>, lo: f64, hi: f64| {
            let x = value.ok_or_else(|| fail(field, "missing".to_string()))?;
            if x.is_finite() && x > lo && x < hi {
                Ok(x)
            } else {
                Err(fail(
                    field,
                    format!("{x} outside the open interval ({lo}, {hi})"),
                ))
            }
        };
        let lambda = || range("lambda", self.lambda, 0.0, 1.0);
        let mesh_h = || range("mesh_h", self.mesh_h, 0.0, f64::INFINITY);
        let quad_tol = || range("quad_tol", self.quad_tol, 0.0, f64::INFINITY);
        let exponent = || range("p", self.p, 0.0, f64::INFINITY);
        let two_bodies = || -> Result<(ConvexPolygon, ConvexPolygon)> {
            let lits = self
                .bodies
                .as_ref()
                .ok_or_else(|| fail("bodies", "missing".to_string()))?;
            if lits.len() != 2 {
                return Err(fail(
                    "bodies",
                    format!("need exactly 2 polygons, got {}", lits.len()),
                ));
            }
            let k0 = polygon_from_lit(&lits[0]).map_err(|e| fail("bodies", format!("[0]: {e}")))?;
            let k1 = polygon_from_lit(&lits[1]).map_err(|e| fail("bodies", format!("[1]: {e}")))?;
            Ok((k0, k1))
        };
        let two_functions = || -> Result<(PConcaveFn, PConcaveFn, f64)> {
            let lits = self
                .functions
                .as_ref()
                .ok_or_else(|| fail("functions", "missing".to_string()))?;
            if lits.len() != 2 {
                return Err(fail(
                    "functions",
                    format!("need exactly 2 functions, got {}", lits.len()),
                ));
            }
            let p = exponent()?;
            for (i, lit) in lits.iter().enumerate() {
                if lit.p != p {
                    return Err(fail(
                        "functions",
                        format!("[{i}]: exponent {} does not match scenario p = {p}", lit.p),
                    ));
                }
            }
            let u0 =
                function_from_lit(&lits[0]).map_err(|e| fail("functions", format!("[0]: {e}")))?;
            let u1 =
                function_from_lit(&lits[1]).map_err(|e| fail("functions", format!("[1]: {e}")))?;
            Ok((u0, u1, p))
        };

        match self.kind {
            Kind::Bm => {
                let (k0, k1) = two_bodies()?;
                Ok(Inputs::Bm {
                    k0,
                    k1,
                    lambda: lambda()?,
                })
            }
            Kind::Bbl => {
                let (u0, u1, p) = two_functions()?;
                Ok(Inputs::Bbl {
                    u0,
                    u1,
                    p,
                    lambda: lambda()?,
                    quad_tol: quad_tol()?,
                })
            }
            Kind::Stability => {
                let (u0, u1, p) = two_functions()?;
                Ok(Inputs::Stability {
                    u0,
                    u1,
                    p,
                    lambda: lambda()?,
                    quad_tol: quad_tol()?,
                })
            }
            Kind::BmTau => {
                let (k0, k1) = two_bodies()?;
                Ok(Inputs::BmTau {
                    k0,
                    k1,
                    lambda: lambda()?,
                    mesh_h: mesh_h()?,
                })
            }
            Kind::Urysohn => {
                let lits = self
                    .bodies
                    .as_ref()
                    .ok_or_else(|| fail("bodies", "missing".to_string()))?;
                if lits.len() != 1 {
                    return Err(fail(
                        "bodies",
                        format!("need exactly 1 polygon, got {}", lits.len()),
                    ));
                }
                let k =
                    polygon_from_lit(&lits[0]).map_err(|e| fail("bodies", format!("[0]: {e}")))?;
                let angle_count = self
                    .angle_count
                    .ok_or_else(|| fail("angle_count", "missing".to_string()))?;
                Ok(Inputs::Urysohn {
                    k,
                    mesh_h: mesh_h()?,
                    angle_count,
                })
            }
            Kind::PoissonBbl => {
                let (k0, k1) = two_bodies()?;
                let pieces = self
                    .f_pieces
                    .as_ref()
                    .ok_or_else(|| fail("f_pieces", "missing".to_string()))?;
                if pieces.is_empty() {
                    return Err(fail("f_pieces", "must be nonempty".to_string()));
                }
                let beta_exp = self
                    .beta_exp
                    .ok_or_else(|| fail("beta_exp", "missing".to_string()))?;
                if let BetaExp::Finite(b) = beta_exp.0 {
                    if !(b.is_finite() && b >= 1.0) {
                        return Err(fail("beta_exp", format!("{b} must be >= 1 or \"inf\"")));
                    }
                }
                Ok(Inputs::PoissonBbl {
                    k0,
                    k1,
                    lambda: lambda()?,
                    f_pieces: pieces_from_lit(pieces),
                    beta_exp: beta_exp.0,
                    mesh_h: mesh_h()?,
                })
            }
        }
    }
}

fn json_error(path: &Path, err: &serde_json::Error) -> Error {
    Error::Json {
        path: path.to_path_buf(),
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Reads a suite file, or a bare single-scenario file, and validates
/// every scenario. Diagnostics carry the file position for syntax
/// errors and the scenario index and field for semantic ones.
pub fn parse_suite(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
    let scenarios = if value.get("scenarios").is_some() {
        let suite: SuiteFile =
            serde_json::from_value(value).map_err(|e| json_error(path, &e))?;
        if suite.schema != SCHEMA_VERSION {
            return Err(Error::Schema(suite.schema));
        }
        suite.scenarios
    } else {
        let single: Scenario = serde_json::from_value(value).map_err(|e| json_error(path, &e))?;
        vec![single]
    };
    for (index, sc) in scenarios.iter().enumerate() {
        sc.validate(index)?;
    }
    Ok(scenarios)
}

/// Single-scenario convenience wrapper over `parse_suite`.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let mut scenarios = parse_suite(path)?;
    if scenarios.len() != 1 {
        return Err(Error::Field {
            index: 0,
            name: String::new(),
            field: "scenarios",
            message: format!("expected exactly one scenario, found {}", scenarios.len()),
        });
    }
    Ok(scenarios.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_lit(half: f64) -> PolygonLit {
        vec![
            [-half, -half],
            [half, -half],
            [half, half],
            [-half, half],
        ]
    }

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("bbl-lab-scenario-{name}-{}.json", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn minimal_bm_scenario_parses() {
        let sc = Scenario {
            name: "squares".to_string(),
            kind: Kind::Bm,
            bodies: Some(vec![square_lit(1.0), square_lit(0.5)]),
            functions: None,
            f_pieces: None,
            beta_exp: None,
            p: None,
            lambda: Some(0.5),
            mesh_h: None,
            quad_tol: None,
            seed: 7,
            angle_count: None,
        };
        let path = write_temp("minimal", &serde_json::to_string(&sc).unwrap());
        let parsed = parse_scenario(&path).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(parsed, sc);
        assert!(parsed.validate(0).is_ok());
    }

    #[test]
    fn lambda_out_of_range_is_a_field_error() {
        let text = serde_json::json!({
            "name": "bad", "kind": "bm",
            "bodies": [square_lit(1.0), square_lit(1.0)],
            "lambda": 1.5
        })
        .to_string();
        let path = write_temp("lambda", &text);
        let err = parse_suite(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        let msg = err.to_string();
        assert!(msg.contains("lambda") && msg.contains("1.5"), "{msg}");
    }

    #[test]
    fn degenerate_polygon_is_reported_with_its_field() {
        let text = serde_json::json!({
            "name": "twopoint", "kind": "bm",
            "bodies": [[[0.0, 0.0], [1.0, 0.0]], square_lit(1.0)],
            "lambda": 0.5
        })
        .to_string();
        let path = write_temp("degenerate", &text);
        let err = parse_suite(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        let msg = err.to_string();
        assert!(msg.contains("bodies") && msg.contains("[0]"), "{msg}");
    }

    #[test]
    fn beta_exp_accepts_number_and_inf() {
        let fin: BetaExpLit = serde_json::from_str("2.0").unwrap();
        assert_eq!(fin.0, BetaExp::Finite(2.0));
        let inf: BetaExpLit = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(inf.0, BetaExp::Infinite);
        assert_eq!(serde_json::to_string(&inf).unwrap(), "\"inf\"");
        assert!(serde_json::from_str::<BetaExpLit>("\"huge\"").is_err());
    }

    #[test]
    fn suite_schema_version_is_enforced() {
        let text = serde_json::json!({ "schema": 2, "scenarios": [] }).to_string();
        let path = write_temp("schema", &text);
        let err = parse_suite(&path).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, Error::Schema(2)));
    }
}
