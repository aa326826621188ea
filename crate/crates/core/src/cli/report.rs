//! Machine-readable reports and the time-series CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::spec::AuxKind;
use crate::auxfun::AuxFunction;
use crate::chebyshev::CapCenter;
use crate::curves::{Curve, TimeWindow};
use crate::error::Result;
use crate::inequality::{BoundReport, ClassicalReport, LandauConstant, ProbeReport, ProofDiagnostics};

pub const TOOL: &str = "manifold-landau";
pub const TIME_SERIES_COLUMNS: [&str; 5] = ["t", "speed", "cov_accel_norm", "v", "u"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSummary {
    pub kind: AuxKind,
    pub center: Vec<f64>,
    /// The centre was computed as the Chebyshev centre of the samples.
    pub chebyshev: bool,
}

impl AuxSummary {
    pub fn new(u: &AuxFunction, chebyshev: bool) -> Self {
        let (kind, center) = match u {
            AuxFunction::ChordalHalfSquare { e } => (AuxKind::Chordal, e.coords().as_slice().to_vec()),
            AuxFunction::IntrinsicHalfSquare { e } => (AuxKind::Intrinsic, e.coords().as_slice().to_vec()),
            AuxFunction::EuclideanQuadratic { center } => (AuxKind::Euclidean, center.as_slice().to_vec()),
        };
        Self { kind, center, chebyshev }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub window: Option<TimeWindow>,
    pub samples: Option<usize>,
    pub aux: Option<AuxSummary>,
    pub constant: Option<LandauConstant>,
    pub bound: Option<BoundReport>,
    pub center: Option<CapCenter>,
    pub relaxed_rhs: Option<f64>,
    pub relaxed_slack_ratio: Option<f64>,
    pub diagnostics: Option<ProofDiagnostics>,
    pub classical: Option<ClassicalReport>,
    pub probe: Option<ProbeReport>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: None,
            family: None,
            window: None,
            samples: None,
            aux: None,
            constant: None,
            bound: None,
            center: None,
            relaxed_rhs: None,
            relaxed_slack_ratio: None,
            diagnostics: None,
            classical: None,
            probe: None,
            notes: Vec::new(),
        }
    }

    pub fn with_window(mut self, window: &TimeWindow) -> Self {
        self.window = Some(*window);
        self.samples = Some(window.samples);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub speed: f64,
    pub cov_accel_norm: f64,
    /// `⟨∇U(x), ẋ⟩`
    pub v: f64,
    /// `U(x)`
    pub u: f64,
}

pub fn time_series(curve: &Curve, u: &AuxFunction, window: &TimeWindow) -> Result<Vec<TimeSeriesRow>> {
    window
        .times()
        .map(|t| {
            let e = curve.eval(t)?;
            let acc = curve.manifold().covariant_accel(&e.x, &e.xdot, &e.xddot)?;
            Ok(TimeSeriesRow {
                t,
                speed: e.speed(),
                cov_accel_norm: acc.norm(),
                v: u.gradient(&e.x)?.dot(&e.xdot),
                u: u.value(&e.x)?,
            })
        })
        .collect()
}

pub fn write_time_series<W: Write>(out: W, rows: &[TimeSeriesRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIME_SERIES_COLUMNS)?;
    for r in rows {
        w.write_record([r.t, r.speed, r.cov_accel_norm, r.v, r.u].map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `key,value` CSV for reports without a time axis.
pub fn write_key_values<W: Write>(out: W, pairs: &[(String, String)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"])?;
    for (k, v) in pairs {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}
