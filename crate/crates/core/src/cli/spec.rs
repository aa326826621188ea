//! TOML curve specifications.
//!
//! ```toml
//! family = "latitude"
//! colatitude = 0.7853981633974483
//! seed = 42
//!
//! [phase]
//! kind = "linear"
//! omega = 1.0
//! phi = 0.0
//!
//! [window]
//! t_min = 0.0
//! t_max = 6.283185307179586
//! samples = 4001
//!
//! [aux]
//! kind = "chordal"
//! center = "chebyshev"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::auxfun::AuxFunction;
use crate::curves::{read_sampled_csv, Curve, Phase, RotatingFrame, ScalarFunction, Term, TimeWindow};
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, Manifold, SurfacePoint};
use crate::inequality::DEFAULT_SEED;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    colatitude: Option<f64>,
    a: Option<[f64; 3]>,
    b: Option<[f64; 3]>,
    phase: Option<Phase>,
    base: Option<[f64; 3]>,
    frames: Option<Vec<RotatingFrame>>,
    components: Option<Vec<ScalarFunction>>,
    terms: Option<Vec<Term>>,
    path: Option<PathBuf>,
    window: Option<RawWindow>,
    aux: Option<RawAux>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    t_min: Option<f64>,
    t_max: Option<f64>,
    samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAux {
    kind: AuxKind,
    center: Option<toml::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    Chordal,
    Intrinsic,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    Chebyshev,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxChoice {
    pub kind: AuxKind,
    pub center: Center,
}

impl AuxChoice {
    /// The auxiliary function for an explicit centre; `None` for the
    /// Chebyshev centre, which depends on the curve samples.
    pub fn explicit(&self) -> Result<Option<AuxFunction>> {
        let Center::Point(c) = &self.center else { return Ok(None) };
        let v = AmbientVector::from_column_slice(c);
        Ok(Some(match self.kind {
            AuxKind::Chordal => AuxFunction::chordal(SurfacePoint::normalize(&v)?),
            AuxKind::Intrinsic => AuxFunction::intrinsic(SurfacePoint::normalize(&v)?),
            AuxKind::Euclidean => AuxFunction::euclidean(v)?,
        }))
    }

    pub fn with_center(&self, e: SurfacePoint) -> AuxFunction {
        match self.kind {
            AuxKind::Intrinsic => AuxFunction::intrinsic(e),
            _ => AuxFunction::chordal(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub family: String,
    pub curve: Curve,
    pub window: TimeWindow,
    pub aux: AuxChoice,
    pub seed: u64,
}

fn bad(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("key `{key}`: {reason}"))
}

fn require<T: Clone>(value: &Option<T>, key: &str, family: &str) -> Result<T> {
    value.clone().ok_or_else(|| bad(key, format!("required for family `{family}`")))
}

fn vector(v: [f64; 3]) -> AmbientVector {
    AmbientVector::from_column_slice(&v)
}

impl RawSpec {
    fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |on: bool, key| {
            if on {
                keys.push(key)
            }
        };
        mark(self.colatitude.is_some(), "colatitude");
        mark(self.a.is_some(), "a");
        mark(self.b.is_some(), "b");
        mark(self.phase.is_some(), "phase");
        mark(self.base.is_some(), "base");
        mark(self.frames.is_some(), "frames");
        mark(self.components.is_some(), "components");
        mark(self.terms.is_some(), "terms");
        mark(self.path.is_some(), "path");
        keys
    }

    fn curve(&self, base_dir: &Path) -> Result<Curve> {
        let family = self.family.as_str();
        let allowed: &[&str] = match family {
            "latitude" => &["colatitude", "phase"],
            "great_circle" => &["a", "b", "phase"],
            "compound" => &["base", "frames"],
            "euclidean" => &["components"],
            "scalar" => &["terms"],
            "sampled" => &["path"],
            other => {
                return Err(bad(
                    "family",
                    format!(
                        "unknown family `{other}`; expected latitude, great_circle, compound, \
                         euclidean, scalar or sampled"
                    ),
                ))
            }
        };
        if let Some(extra) = self.present().into_iter().find(|k| !allowed.contains(k)) {
            return Err(bad(extra, format!("not valid for family `{family}`")));
        }
        let wrap = |key: &str, r: Result<Curve>| r.map_err(|e| bad(key, e));
        match family {
            "latitude" => wrap(
                "colatitude",
                Curve::latitude(require(&self.colatitude, "colatitude", family)?, require(&self.phase, "phase", family)?),
            ),
            "great_circle" => wrap(
                "a",
                Curve::great_circle(
                    vector(require(&self.a, "a", family)?),
                    vector(require(&self.b, "b", family)?),
                    require(&self.phase, "phase", family)?,
                ),
            ),
            "compound" => wrap(
                "frames",
                Curve::compound(vector(require(&self.base, "base", family)?), require(&self.frames, "frames", family)?),
            ),
            "euclidean" => wrap("components", Curve::euclidean(require(&self.components, "components", family)?)),
            "scalar" => wrap("terms", Curve::scalar(ScalarFunction::new(require(&self.terms, "terms", family)?))),
            _ => {
                let rel = require(&self.path, "path", family)?;
                let path = base_dir.join(rel);
                let file = fs::File::open(&path).map_err(|e| bad("path", format!("{}: {e}", path.display())))?;
                Ok(Curve::Sampled(read_sampled_csv(file)?))
            }
        }
    }
}

fn aux_choice(raw: Option<&RawAux>, manifold: Manifold) -> Result<AuxChoice> {
    let euclidean = matches!(manifold, Manifold::Euclidean(_));
    let Some(raw) = raw else {
        return Ok(if let Manifold::Euclidean(d) = manifold {
            AuxChoice { kind: AuxKind::Euclidean, center: Center::Point(vec![0.0; d]) }
        } else {
            AuxChoice { kind: AuxKind::Chordal, center: Center::Chebyshev }
        });
    };
    if euclidean != (raw.kind == AuxKind::Euclidean) {
        return Err(bad("aux.kind", format!("{:?} does not match a curve on {manifold:?}", raw.kind)));
    }
    let center = match &raw.center {
        None if euclidean => Center::Point(vec![0.0; manifold.ambient_dim()]),
        None => Center::Chebyshev,
        Some(toml::Value::String(s)) if s == "chebyshev" && !euclidean => Center::Chebyshev,
        Some(toml::Value::Array(items)) => {
            let coords = items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Ok(*f),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(bad("aux.center", "entries must be numbers")),
                })
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != manifold.ambient_dim() {
                return Err(bad(
                    "aux.center",
                    format!("needs {} coordinates, got {}", manifold.ambient_dim(), coords.len()),
                ));
            }
            Center::Point(coords)
        }
        Some(_) => return Err(bad("aux.center", "expected a coordinate array or \"chebyshev\"")),
    };
    let choice = AuxChoice { kind: raw.kind, center };
    choice.explicit().map_err(|e| bad("aux.center", e))?;
    Ok(choice)
}

/// Parses a specification; relative sample paths resolve against
/// `base_dir`.
pub fn parse_spec(text: &str, base_dir: &Path) -> Result<CurveSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| Error::InvalidInput(e.message().to_string()))?;
    let curve = raw.curve(base_dir)?;
    let mut window = curve.default_window();
    if let Some(w) = &raw.window {
        window.t_min = w.t_min.unwrap_or(window.t_min);
        window.t_max = w.t_max.unwrap_or(window.t_max);
        window.samples = w.samples.unwrap_or(window.samples);
    }
    window.validate().map_err(|e| bad("window", e))?;
    let aux = aux_choice(raw.aux.as_ref(), curve.manifold())?;
    Ok(CurveSpec { family: raw.family, curve, window, aux, seed: raw.seed.unwrap_or(DEFAULT_SEED) })
}

pub fn load_spec(path: &Path) -> Result<CurveSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text, path.parent().unwrap_or(Path::new(".")))
}
