//! JSON file formats.
//!
//! Every top-level file may carry `"schema": 1`; any other value is refused.

use std::fs;
use std::path::{Path, PathBuf};

use picardlab_core::implicit::sp::Membership;
use picardlab_core::rational::{self, Rational};
use picardlab_core::scalar::Extrapolate;
use picardlab_core::{
    Certificate, FiniteSpace, ImplicitF, IntervalSpace, OrderKind, Point, ScalarFn, Selfmap, SpCertificate, SpaceModel,
    TheoremTag,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {msg}")]
    Json { path: PathBuf, line: usize, column: usize, msg: String },
    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("{0}")]
    Arg(String),
}

impl InputError {
    fn schema(path: &Path, msg: impl Into<String>) -> Self {
        InputError::Schema { path: path.to_path_buf(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, InputError>;

/// Reads and decodes a JSON file, reporting syntax and shape errors with
/// line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_path_buf(), source })?;
    parse_json(path, &text)
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| InputError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    if let Some(v) = value.get("schema") {
        if v.as_u64() != Some(SCHEMA as u64) {
            return Err(InputError::schema(path, format!("unsupported schema {v}, expected {SCHEMA}")));
        }
    }
    // decode again from text so shape errors keep their position
    serde_json::from_str(text).map_err(|e| InputError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// A number given as `"p/q"`, a decimal string, an integer or a float.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Num {
    pub fn exact(&self) -> std::result::Result<Rational, String> {
        match self {
            Num::Int(i) => Ok(rational::int(*i)),
            Num::Float(x) => rational::from_f64_shortest(*x).ok_or_else(|| format!("{x} is not finite")),
            Num::Str(s) => rational::parse(s).map_err(|e| e.to_string()),
        }
    }

    pub fn f64(&self) -> std::result::Result<f64, String> {
        match self {
            Num::Float(x) => Ok(*x),
            _ => self.exact().map(|r| rational::to_f64(&r)),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Flag {
    Bool(bool),
    Int(u8),
}

impl Flag {
    fn get(&self) -> std::result::Result<bool, String> {
        match self {
            Flag::Bool(b) => Ok(*b),
            Flag::Int(0) => Ok(false),
            Flag::Int(1) => Ok(true),
            Flag::Int(k) => Err(format!("order entry {k} is not 0 or 1")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpaceDesc {
    Finite { points: usize, dist: Vec<Vec<Num>>, leq: Vec<Vec<Flag>> },
    Interval { interval: [f64; 2], #[serde(default)] order: Order },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    #[default]
    Usual,
    Amorphous,
}

impl SpaceDesc {
    /// Builds the space. Metric and order axioms are not checked here; that
    /// is the job of `validate`.
    pub fn build(&self, path: &Path) -> Result<SpaceModel> {
        let err = |m: String| InputError::schema(path, m);
        match self {
            SpaceDesc::Finite { points, dist, leq } => {
                if dist.len() != *points || leq.len() != *points {
                    return Err(err(format!("\"points\" is {points} but the tables have {} and {} rows", dist.len(), leq.len())));
                }
                let dist = dist
                    .iter()
                    .map(|row| row.iter().map(|v| v.exact()).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(err)?;
                let leq = leq
                    .iter()
                    .map(|row| row.iter().map(Flag::get).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(err)?;
                FiniteSpace::new(dist, leq).map(SpaceModel::Finite).map_err(|e| err(e.to_string()))
            }
            SpaceDesc::Interval { interval: [a, b], order } => {
                let order = match order {
                    Order::Usual => OrderKind::Usual,
                    Order::Amorphous => OrderKind::Amorphous,
                };
                IntervalSpace::new(*a, *b, order)
                    .map(SpaceModel::Interval)
                    .map_err(|e| err(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SpaceFile {
    #[serde(default)]
    pub schema: Option<u32>,
    #[serde(flatten)]
    pub space: SpaceDesc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FnDesc {
    Linear { alpha: Num },
    Expr { body: String },
    Table {
        knots: Vec<(Num, Num)>,
        #[serde(default)]
        extrapolate: Extrap,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrap {
    #[default]
    Last,
    Linear,
}

impl FnDesc {
    pub fn build(&self, path: &Path) -> Result<ScalarFn> {
        let err = |m: String| InputError::schema(path, m);
        match self {
            FnDesc::Linear { alpha } => Ok(ScalarFn::linear(alpha.exact().map_err(err)?)),
            FnDesc::Expr { body } => ScalarFn::expr(body).map_err(|e| err(e.to_string())),
            FnDesc::Table { knots, extrapolate } => {
                let knots = knots
                    .iter()
                    .map(|(t, v)| Ok((t.exact()?, v.exact()?)))
                    .collect::<std::result::Result<Vec<_>, String>>()
                    .map_err(err)?;
                let ex = match extrapolate {
                    Extrap::Last => Extrapolate::Last,
                    Extrap::Linear => Extrapolate::Linear,
                };
                ScalarFn::table(knots, ex).map_err(|e| err(e.to_string()))
            }
        }
    }
}

/// The `F` of an `sp` certificate: an expression in `t1..t6`, or
/// `{"psi": fn}` for `psi(t2) - t1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpF {
    Body(String),
    Standard { psi: FnDesc },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PDesc {
    Nonneg,
    Positive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertDesc {
    FromPsi { psi: FnDesc },
    Expr6 { body: String },
    Sp {
        #[serde(rename = "P")]
        p: PDesc,
        #[serde(rename = "F")]
        f: SpF,
        a: FnDesc,
    },
    Phi { phi: FnDesc },
    Psi { psi: FnDesc },
}

impl CertDesc {
    pub fn build(&self, path: &Path) -> Result<Certificate> {
        let err = |m: String| InputError::schema(path, m);
        Ok(match self {
            CertDesc::FromPsi { psi } => {
                Certificate::Implicit(picardlab_core::implicit::f_from_psi(&psi.build(path)?).map_err(|e| err(e.to_string()))?)
            }
            CertDesc::Expr6 { body } => Certificate::Implicit(ImplicitF::expr(body).map_err(|e| err(e.to_string()))?),
            CertDesc::Sp { p, f, a } => {
                let radius = a.build(path)?;
                let p = match p {
                    PDesc::Nonneg => Membership::NonNeg,
                    PDesc::Positive => Membership::Positive,
                };
                let c = match f {
                    SpF::Standard { psi } => {
                        let psi = psi.build(path)?;
                        match p {
                            Membership::NonNeg => SpCertificate::standard(psi, radius),
                            other => SpCertificate::new(
                                "standard",
                                picardlab_core::implicit::sp::SpKind::Standard(psi),
                                other,
                                radius,
                            ),
                        }
                    }
                    SpF::Body(body) => SpCertificate::expr(body, p, radius),
                }
                .map_err(|e| err(e.to_string()))?;
                Certificate::GeneralizedSp(c)
            }
            CertDesc::Phi { phi } => Certificate::Phi(phi.build(path)?),
            CertDesc::Psi { psi } => Certificate::PsiExplicit(psi.build(path)?),
        })
    }

    /// `alpha` of a `from_psi` certificate with a linear `psi`.
    pub fn linear_factor(&self) -> Option<Rational> {
        match self {
            CertDesc::FromPsi { psi: FnDesc::Linear { alpha } } => alpha.exact().ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct CertFile {
    #[serde(default)]
    pub schema: Option<u32>,
    #[serde(flatten)]
    pub cert: CertDesc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MapDesc {
    Table(Vec<usize>),
    Fn(FnDesc),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineDesc {
    pub theorem: Option<String>,
    pub x0: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct InstanceFile {
    #[serde(default)]
    pub schema: Option<u32>,
    pub space: SpaceDesc,
    pub map: MapDesc,
    pub certificate: CertDesc,
    #[serde(default)]
    pub pipeline: PipelineDesc,
}

/// A decoded instance.
pub struct Instance {
    pub space: SpaceModel,
    pub map: Selfmap,
    pub certificate: Certificate,
    pub linear_factor: Option<Rational>,
    pub pipeline: PipelineDesc,
}

impl Instance {
    pub fn load(path: &Path) -> Result<Instance> {
        let file: InstanceFile = read_json(path)?;
        let space = file.space.build(path)?;
        let map = match (&file.map, &space) {
            (MapDesc::Table(t), SpaceModel::Finite(s)) => {
                if t.len() != s.len() || t.iter().any(|&i| i >= s.len()) {
                    return Err(InputError::schema(path, "map table does not map the space into itself"));
                }
                Selfmap::Finite(t.clone())
            }
            (MapDesc::Fn(f), SpaceModel::Interval(_)) => Selfmap::Interval(f.build(path)?),
            _ => return Err(InputError::schema(path, "map kind does not match the space")),
        };
        Ok(Instance {
            space,
            map,
            certificate: file.certificate.build(path)?,
            linear_factor: file.certificate.linear_factor(),
            pipeline: file.pipeline,
        })
    }

    pub fn theorem(&self, path: &Path, override_tag: Option<TheoremTag>) -> Result<TheoremTag> {
        if let Some(t) = override_tag {
            return Ok(t);
        }
        match &self.pipeline.theorem {
            Some(s) => TheoremTag::parse(s).ok_or_else(|| InputError::schema(path, format!("unknown theorem {s:?}"))),
            None => Ok(TheoremTag::T2),
        }
    }

    /// `x0` from the pipeline block: an index on finite spaces, a real on
    /// intervals; defaults to index 0 / the lower end.
    pub fn x0(&self, path: &Path) -> Result<Point> {
        match (&self.space, self.pipeline.x0) {
            (SpaceModel::Finite(_), None) => Ok(Point::Index(0)),
            (SpaceModel::Finite(s), Some(x)) => {
                if x >= 0.0 && x.fract() == 0.0 && (x as usize) < s.len() {
                    Ok(Point::Index(x as usize))
                } else {
                    Err(InputError::schema(path, format!("x0 = {x} is not a point index")))
                }
            }
            (SpaceModel::Interval(i), x) => Ok(Point::Real(x.unwrap_or(i.lower))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeqDesc {
    Walk01 {
        #[serde(rename = "N")]
        n: usize,
    },
    Explicit {
        points: Vec<f64>,
        #[serde(rename = "N", default)]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct SeqFile {
    #[serde(default)]
    pub schema: Option<u32>,
    #[serde(flatten)]
    pub seq: SeqDesc,
}

impl SeqDesc {
    /// Points and analysis length.
    pub fn build(&self) -> (Vec<f64>, usize) {
        match self {
            SeqDesc::Walk01 { n } => (picardlab_core::gap::walk01(*n), *n),
            SeqDesc::Explicit { points, n } => (points.clone(), n.unwrap_or(points.len()).min(points.len())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("t.json")
    }

    #[test]
    fn finite_space_round() {
        let f: SpaceFile = parse_json(
            p(),
            r#"{"schema": 1, "points": 2, "dist": [["0", "1/2"], ["1/2", 0]], "leq": [[1, 1], [0, true]]}"#,
        )
        .unwrap();
        let s = f.space.build(p()).unwrap();
        assert!(s.is_finite());
        assert_eq!(s.dist(&Point::Index(0), &Point::Index(1)), 0.5);
    }

    #[test]
    fn interval_space() {
        let f: SpaceFile = parse_json(p(), r#"{"interval": [0, 1], "order": "amorphous"}"#).unwrap();
        let s = f.space.build(p()).unwrap();
        assert!(s.leq(&Point::Real(0.7), &Point::Real(0.2)));
    }

    #[test]
    fn malformed_json_has_position() {
        let e = parse_json::<SpaceFile>(p(), "{\n  \"points\": 2,\n  \"dist\": [\n}").unwrap_err();
        match e {
            InputError::Json { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_version_checked() {
        assert!(matches!(
            parse_json::<SpaceFile>(p(), r#"{"schema": 2, "interval": [0, 1]}"#),
            Err(InputError::Schema { .. })
        ));
    }

    #[test]
    fn certificate_kinds() {
        for text in [
            r#"{"kind": "from_psi", "psi": {"kind": "linear", "alpha": 0.6}}"#,
            r#"{"kind": "expr6", "body": "t1 - 0.5*t2"}"#,
            r#"{"kind": "sp", "P": "nonneg", "F": {"psi": {"kind": "linear", "alpha": "1/2"}}, "a": {"kind": "linear", "alpha": 0.25}}"#,
            r#"{"kind": "phi", "phi": {"kind": "expr", "body": "t/(1+t)"}}"#,
            r#"{"kind": "psi", "psi": {"kind": "table", "knots": [[0, 0], [1, 0.5]], "extrapolate": "linear"}}"#,
        ] {
            let c: CertFile = parse_json(p(), text).unwrap();
            c.cert.build(p()).unwrap();
        }
        let c: CertFile = parse_json(p(), r#"{"kind": "from_psi", "psi": {"kind": "linear", "alpha": 0.6}}"#).unwrap();
        assert_eq!(c.cert.linear_factor(), Some(rational::ratio(3, 5)));
    }

    #[test]
    fn sequences() {
        let s: SeqFile = parse_json(p(), r#"{"kind": "walk01", "N": 50}"#).unwrap();
        assert_eq!(s.seq.build().0.len(), 50);
        let s: SeqFile = parse_json(p(), r#"{"kind": "explicit", "points": [0, 0.5, 0.75]}"#).unwrap();
        assert_eq!(s.seq.build(), (vec![0.0, 0.5, 0.75], 3));
    }
}
