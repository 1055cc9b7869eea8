//! Experiment configuration: TOML text, resolved against documented defaults.
//!
//! Every field is optional except `ids`. Omitted fields take the defaults
//! below and are listed in `defaulted`, which is echoed into the report header.
//!
//! | field       | default          | meaning                                           |
//! |-------------|------------------|---------------------------------------------------|
//! | `shape`     | per id           | `{ name = "...", <param> = <value>, ... }`        |
//! | `ids`       | (required)       | inequality ids; `Wm_P`, `Wm_P0`, `Wm_F` take `m`  |
//! | `regions`   | per id           | `[[regions]]` with `name`, `predicate`, `kind`, `tol` |
//! | `p`         | 2                | exponent; `inf` allowed                           |
//! | `m`         | 1                | order for bare `Wm_*` ids                         |
//! | `levels`    | 3                | refinement levels, mesh size halved per level     |
//! | `seed`      | 24301            | suite seed                                        |
//! | `out`       | `guenterlab-out` | output directory                                  |
//! | `samples`   | 100              | suite size                                        |
//! | `family`    | `mixed:3:3:4`    | sample family                                     |
//! | `layers`    | 4                | layers of cylinder carriers                       |
//! | `constants` | none             | `{ <id> = C }` used by `verify` instead of estimates |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;

use guenterlab::geometry::{RegionKind, ShapeSpec};
use guenterlab::norms::Exponent;
use guenterlab::spectra::{InequalityId, DEFAULT_LAYERS};
use guenterlab::verify::{Family, DEFAULT_SAMPLES};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::ConfigError;

pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_OUT: &str = "guenterlab-out";
pub const DEFAULT_P: f64 = 2.0;
pub const DEFAULT_M: usize = 1;
pub const DEFAULT_REGION_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    shape: Option<Spanned<toml::Table>>,
    ids: Option<Spanned<Vec<Spanned<String>>>>,
    regions: Option<Vec<Spanned<RawRegion>>>,
    p: Option<Spanned<f64>>,
    m: Option<Spanned<usize>>,
    levels: Option<Spanned<usize>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    samples: Option<Spanned<usize>>,
    family: Option<Spanned<String>>,
    layers: Option<Spanned<usize>>,
    constants: Option<Spanned<BTreeMap<String, f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    name: String,
    predicate: Spanned<String>,
    kind: Option<RegionKind>,
    tol: Option<f64>,
}

/// A named region selected by a conjunction of coordinate bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub name: String,
    pub predicate: Predicate,
    pub kind: RegionKind,
    pub tol: f64,
    #[serde(skip)]
    pub line: Option<usize>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `None`: each id's default shape.
    pub shape: Option<ShapeSpec>,
    pub ids: Vec<InequalityId>,
    /// Empty: each id's default regions. Otherwise the first is `M0`.
    pub regions: Vec<RegionSpec>,
    #[serde(with = "guenterlab::num::extended")]
    pub p: f64,
    pub m: usize,
    pub levels: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub samples: usize,
    pub family: Family,
    pub layers: usize,
    pub constants: BTreeMap<String, f64>,
    /// Fields that took their documented default.
    pub defaulted: Vec<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub levels: Option<usize>,
    pub out: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn err<T>(text: &str, span: std::ops::Range<usize>, field: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        file: None,
        line: Some(line_of(text, span.start)),
        field: Some(field.into()),
        message: message.into(),
    })
}

/// Resolves an id name; bare `Wm_P`, `Wm_P0`, `Wm_F` (optionally `_surf`) take order `m`.
pub fn parse_id(name: &str, m: usize) -> Result<InequalityId, String> {
    let (body, surf) = match name.strip_suffix("_surf") {
        Some(b) => (b, "_surf"),
        None => (name, ""),
    };
    let full = match body {
        "Wm_P" => format!("Wm_P{m}{surf}"),
        "Wm_P0" => format!("Wm_P0_{m}{surf}"),
        "Wm_F" => format!("Wm_F{m}{surf}"),
        _ => name.to_string(),
    };
    full.parse::<InequalityId>().map_err(|e| e.to_string())
}

impl ExperimentConfig {
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            file: None,
            line: e.span().map(|s| line_of(text, s.start)),
            field: None,
            message: e.message().trim().to_string(),
        })?;
        let mut defaulted = Vec::new();
        let mut default = |name: &str| defaulted.push(name.to_string());

        let m = match &raw.m {
            Some(m) if *m.get_ref() == 0 => return err(text, m.span(), "m", "order must be at least 1"),
            Some(m) => *m.get_ref(),
            None => {
                default("m");
                DEFAULT_M
            }
        };

        let Some(ids_raw) = &raw.ids else {
            return Err(ConfigError {
                file: None,
                line: None,
                field: Some("ids".into()),
                message: "missing; list at least one inequality id".into(),
            });
        };
        if ids_raw.get_ref().is_empty() {
            return err(text, ids_raw.span(), "ids", "must list at least one inequality id");
        }
        let mut ids = Vec::new();
        for name in ids_raw.get_ref() {
            let id = parse_id(name.get_ref(), m).or_else(|e| err(text, name.span(), "ids", e))?;
            if ids.contains(&id) {
                return err(text, name.span(), "ids", format!("`{id}` listed twice"));
            }
            ids.push(id);
        }

        let shape = match &raw.shape {
            None => {
                default("shape");
                None
            }
            Some(table) => Some(parse_shape(text, table)?),
        };

        let mut regions = Vec::new();
        match &raw.regions {
            None => default("regions"),
            Some(list) => {
                for r in list {
                    let line = line_of(text, r.span().start);
                    let r = r.get_ref();
                    let predicate = r
                        .predicate
                        .get_ref()
                        .parse::<Predicate>()
                        .or_else(|e| err(text, r.predicate.span(), &format!("regions.{}.predicate", r.name), e))?;
                    let tol = r.tol.unwrap_or(DEFAULT_REGION_TOL);
                    if !(tol >= 0.0) {
                        return err(
                            text,
                            r.predicate.span(),
                            &format!("regions.{}.tol", r.name),
                            "must be non-negative",
                        );
                    }
                    regions.push(RegionSpec {
                        name: r.name.clone(),
                        predicate,
                        kind: r.kind.unwrap_or(RegionKind::BoundaryPart),
                        tol,
                        line: Some(line),
                    });
                }
            }
        }

        let p = match &raw.p {
            Some(p) => {
                Exponent::new(*p.get_ref()).or_else(|e| err(text, p.span(), "p", e.to_string()))?;
                *p.get_ref()
            }
            None => {
                default("p");
                DEFAULT_P
            }
        };

        let positive = |v: &Option<Spanned<usize>>, name: &str, fallback: usize, defaulted: &mut Vec<String>| match v {
            Some(s) if *s.get_ref() == 0 => err(text, s.span(), name, "must be at least 1"),
            Some(s) => Ok(*s.get_ref()),
            None => {
                defaulted.push(name.to_string());
                Ok(fallback)
            }
        };
        let levels = match overrides.levels {
            Some(0) => {
                return Err(ConfigError {
                    file: None,
                    line: None,
                    field: Some("--levels".into()),
                    message: "must be at least 1".into(),
                })
            }
            Some(l) => l,
            None => positive(&raw.levels, "levels", DEFAULT_LEVELS, &mut defaulted)?,
        };
        let samples = positive(&raw.samples, "samples", DEFAULT_SAMPLES, &mut defaulted)?;
        let layers = positive(&raw.layers, "layers", DEFAULT_LAYERS, &mut defaulted)?;

        let seed = overrides.seed.or(raw.seed).unwrap_or_else(|| {
            defaulted.push("seed".into());
            DEFAULT_SEED
        });
        let out = overrides.out.clone().or(raw.out).unwrap_or_else(|| {
            defaulted.push("out".into());
            PathBuf::from(DEFAULT_OUT)
        });

        let family = match &raw.family {
            Some(f) => f.get_ref().parse::<Family>().or_else(|e| err(text, f.span(), "family", e.to_string()))?,
            None => {
                defaulted.push("family".into());
                Family::default()
            }
        };

        let mut constants = BTreeMap::new();
        match &raw.constants {
            None => defaulted.push("constants".into()),
            Some(table) => {
                for (name, &c) in table.get_ref() {
                    let id = parse_id(name, m).or_else(|e| err(text, table.span(), "constants", e))?;
                    if !(c > 0.0) {
                        return err(text, table.span(), "constants", format!("constant for `{name}` must be positive"));
                    }
                    constants.insert(id.name(), c);
                }
            }
        }

        Ok(ExperimentConfig {
            shape,
            ids,
            regions,
            p,
            m,
            levels,
            seed,
            out,
            samples,
            family,
            layers,
            constants,
            defaulted,
        })
    }
}

fn parse_shape(text: &str, table: &Spanned<toml::Table>) -> Result<ShapeSpec, ConfigError> {
    let t = table.get_ref();
    let Some(name) = t.get("name").and_then(|v| v.as_str()) else {
        return err(text, table.span(), "shape.name", "missing shape name");
    };
    let spec = ShapeSpec::by_name(name).or_else(|e| err(text, table.span(), "shape.name", e.to_string()))?;
    let mut params = HashMap::new();
    for (key, value) in t.iter().filter(|(k, _)| k.as_str() != "name") {
        let v = match value {
            toml::Value::Integer(i) => *i as f64,
            toml::Value::Float(f) => *f,
            other => {
                return err(
                    text,
                    table.span(),
                    &format!("shape.{key}"),
                    format!("expected a number, found {}", other.type_str()),
                )
            }
        };
        params.insert(key.clone(), v);
    }
    spec.with_params(&params).or_else(|e| err(text, table.span(), "shape", e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    /// Zero-based coordinate index.
    pub axis: usize,
    pub op: Comparison,
    pub value: f64,
}

/// `x1 <= 0.5 and x2 == 0`; `all` selects every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Predicate(pub Vec<Bound>);

impl Predicate {
    pub fn max_axis(&self) -> Option<usize> {
        self.0.iter().map(|b| b.axis).max()
    }

    pub fn eval(&self, x: &[f64], tol: f64) -> bool {
        self.0.iter().all(|b| {
            let Some(&v) = x.get(b.axis) else { return false };
            let t = tol * b.value.abs().max(1.0);
            match b.op {
                Comparison::Lt => v < b.value - t,
                Comparison::Le => v <= b.value + t,
                Comparison::Eq => (v - b.value).abs() <= t,
                Comparison::Ge => v >= b.value - t,
                Comparison::Gt => v > b.value + t,
            }
        })
    }
}

impl std::str::FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "all" {
            return Ok(Predicate(Vec::new()));
        }
        let mut bounds = Vec::new();
        for clause in s.split(" and ") {
            let clause = clause.trim();
            let (lhs, op, rhs) = ["<=", ">=", "==", "<", ">"]
                .iter()
                .find_map(|op| clause.split_once(op).map(|(l, r)| (l.trim(), *op, r.trim())))
                .ok_or_else(|| format!("`{clause}` is not of the form `x<k> <op> <value>`"))?;
            let axis = lhs
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| format!("`{lhs}` is not a coordinate (x1, x2, ...)"))?;
            let value = rhs.parse::<f64>().map_err(|_| format!("`{rhs}` is not a number"))?;
            let op = match op {
                "<" => Comparison::Lt,
                "<=" => Comparison::Le,
                "==" => Comparison::Eq,
                ">=" => Comparison::Ge,
                _ => Comparison::Gt,
            };
            bounds.push(Bound { axis: axis - 1, op, value });
        }
        Ok(Predicate(bounds))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("all");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|b| {
                let op = match b.op {
                    Comparison::Lt => "<",
                    Comparison::Le => "<=",
                    Comparison::Eq => "==",
                    Comparison::Ge => ">=",
                    Comparison::Gt => ">",
                };
                format!("x{} {op} {}", b.axis + 1, b.value)
            })
            .collect();
        f.write_str(&parts.join(" and "))
    }
}

impl TryFrom<String> for Predicate {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Predicate> for String {
    fn from(p: Predicate) -> String {
        p.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, &Overrides::default())
    }

    #[test]
    fn defaults_are_recorded() {
        let c = parse("ids = [\"P_domain\"]\n").unwrap();
        assert_eq!(c.levels, DEFAULT_LEVELS);
        assert_eq!(c.seed, DEFAULT_SEED);
        for f in ["shape", "regions", "p", "m", "levels", "seed", "out", "samples", "family", "layers", "constants"] {
            assert!(c.defaulted.iter().any(|d| d == f), "{f} not recorded");
        }
    }

    #[test]
    fn empty_ids_name_line_and_field() {
        let e = parse("seed = 3\nids = []\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert_eq!(e.field.as_deref(), Some("ids"));
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let e = parse("ids = [\"P_domain\"]\nlevles = 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("levles"), "{}", e.message);
    }

    #[test]
    fn bare_order_families_take_m() {
        let c = parse("m = 2\nids = [\"Wm_P0\", \"Wm_F_surf\"]\n").unwrap();
        assert_eq!(c.ids, vec![InequalityId::WmP0 { m: 2, surface: false }, InequalityId::WmF { m: 2, surface: true }]);
        let e = parse("ids = [\"P_domain\",\n  \"Q_domain\"]\n").unwrap_err();
        assert_eq!((e.line, e.field.as_deref()), (Some(2), Some("ids")));
    }

    #[test]
    fn shape_params_are_applied() {
        let c = parse("ids = [\"P_domain\"]\nshape = { name = \"interval\", nodes = 129 }\n").unwrap();
        assert_eq!(c.shape, Some(ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 129 }));
        let e = parse("ids = [\"P_domain\"]\nshape = { name = \"interval\", radius = 2 }\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn predicates_round_trip() {
        let p: Predicate = "x1 == 0 and x2 <= 0.5".parse().unwrap();
        assert_eq!(p.to_string().parse::<Predicate>().unwrap(), p);
        assert!(p.eval(&[0.0, 0.25], 1e-9));
        assert!(!p.eval(&[0.0, 0.75], 1e-9));
        assert!(!p.eval(&[0.1, 0.25], 1e-9));
        assert!("y1 < 2".parse::<Predicate>().is_err());
        assert!("all".parse::<Predicate>().unwrap().eval(&[3.0], 0.0));
    }
}
