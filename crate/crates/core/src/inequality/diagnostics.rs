//! Intermediate inequalities of the bound's derivation, checked sample by
//! sample. They are consequences of the hypotheses; a failing flag points to
//! a window that misses the suprema or to a numerical problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{theorem1_report, BoundReport};
use crate::auxfun::AuxFunction;
use crate::curves::{Curve, TimeWindow};
use crate::error::{Error, Result};

/// Relative tolerance of each per-sample check.
pub const DIAGNOSTIC_REL_TOL: f64 = 1e-6;
/// `|v| ≤ 1e-8` passes when the bound on `v²` is zero.
const V_SQUARED_ABS_TOL: f64 = 1e-16;
/// Rounding floor of the speed-derivative check, relative to `max(1, ‖ẋ‖)`.
const SPEED_DERIVATIVE_ABS_TOL: f64 = 1e-9;
const CHAIN_ABS_TOL: f64 = 1e-12;
/// Speeds at or below this are skipped by the speed-derivative check.
const MIN_SPEED: f64 = 1e-8;
const SPEED_DERIVATIVE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub ok: bool,
    /// First failing sample, otherwise the one with the largest
    /// `observed/bound` ratio.
    pub worst_t: Option<f64>,
    /// Absent when the bound at `worst_t` is zero.
    pub worst_ratio: Option<f64>,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofDiagnostics {
    pub v_bound_ok: bool,
    pub speed_lipschitz_ok: bool,
    pub chain_ok: bool,
    /// `v² ≤ r0³·r2/λ` with `v = ⟨∇U(x), ẋ⟩`.
    pub v_bound: CheckOutcome,
    /// `|d‖ẋ‖/dt| ≤ r2`
    pub speed_lipschitz: CheckOutcome,
    /// `z³/3 − z0²z + 2z0³/3 ≤ z0³` where `z = ‖ẋ‖ ≥ z0 = √(r0·r2/λ)`.
    pub chain: CheckOutcome,
    pub z0: f64,
    pub sup_abs_v: f64,
}

impl ProofDiagnostics {
    pub fn all_ok(&self) -> bool {
        self.v_bound_ok && self.speed_lipschitz_ok && self.chain_ok
    }
}

struct Sample {
    t: f64,
    v: (f64, f64, bool),
    dz: Option<(f64, f64, bool)>,
    chain: Option<(f64, f64, bool)>,
    abs_v: f64,
}

fn fold(samples: &[Sample], pick: impl Fn(&Sample) -> Option<(f64, f64, bool)>) -> CheckOutcome {
    let mut out = CheckOutcome { ok: true, worst_t: None, worst_ratio: None, checked: 0 };
    // Failing samples rank above passing ones, then by ratio.
    let mut worst = (false, f64::NEG_INFINITY);
    for s in samples {
        let Some((observed, bound, ok)) = pick(s) else { continue };
        out.checked += 1;
        out.ok &= ok;
        let ratio = (bound > 0.0).then(|| observed / bound);
        let key = (!ok, ratio.unwrap_or(f64::NEG_INFINITY));
        if out.worst_t.is_none() || key > worst {
            worst = key;
            out.worst_t = Some(s.t);
            out.worst_ratio = ratio;
        }
    }
    out
}

/// Runs the checks for a curve whose report is already available.
pub fn proof_diagnostics_for(
    report: &BoundReport,
    curve: &Curve,
    u: &AuxFunction,
) -> Result<ProofDiagnostics> {
    if !report.hypotheses_ok {
        return Err(Error::HypothesisViolation(format!(
            "r0 = {}, λ = {}, sup U = {}",
            report.r0.value, report.lambda.value, report.sup_u
        )));
    }
    let (r0, r2, lam) = (report.r0.value, report.r2.value, report.lambda.value);
    let v_bound = r0.powi(3) * r2 / lam;
    let z0 = (r0 * r2 / lam).sqrt();
    let window = &report.window;
    let h = match curve {
        Curve::Sampled(s) => s.step(),
        _ => SPEED_DERIVATIVE_STEP,
    };
    let domain = match curve {
        Curve::Sampled(s) => (s.t_min(), s.t_max()),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };

    let samples: Vec<Sample> = (0..window.samples)
        .into_par_iter()
        .map(|i| {
            let t = window.time(i);
            let e = curve.eval(t)?;
            let v = u.gradient(&e.x)?.dot(&e.xdot);
            let v_check = {
                let obs = v * v;
                (obs, v_bound, obs <= v_bound * (1.0 + DIAGNOSTIC_REL_TOL) + V_SQUARED_ABS_TOL)
            };
            let z = e.speed();
            let dz = if z > MIN_SPEED && t - h >= domain.0 && t + h <= domain.1 {
                let ahead = curve.eval(t + h)?.speed();
                let behind = curve.eval(t - h)?.speed();
                let d = ((ahead - behind) / (2.0 * h)).abs();
                let ok = d <= r2 * (1.0 + DIAGNOSTIC_REL_TOL) + SPEED_DERIVATIVE_ABS_TOL * z.max(1.0);
                Some((d, r2, ok))
            } else {
                None
            };
            let chain = (z >= z0).then(|| {
                let lhs = z.powi(3) / 3.0 - z0 * z0 * z + 2.0 * z0.powi(3) / 3.0;
                let rhs = z0.powi(3);
                (lhs, rhs, lhs <= rhs * (1.0 + DIAGNOSTIC_REL_TOL) + CHAIN_ABS_TOL)
            });
            if !v.is_finite() || !z.is_finite() {
                return Err(Error::NumericFailure { t });
            }
            Ok(Sample { t, v: v_check, dz, chain, abs_v: v.abs() })
        })
        .collect::<Result<_>>()?;

    let v_bound = fold(&samples, |s| Some(s.v));
    let speed_lipschitz = fold(&samples, |s| s.dz);
    let chain = fold(&samples, |s| s.chain);
    Ok(ProofDiagnostics {
        v_bound_ok: v_bound.ok,
        speed_lipschitz_ok: speed_lipschitz.ok,
        chain_ok: chain.ok,
        v_bound,
        speed_lipschitz,
        chain,
        z0,
        sup_abs_v: samples.iter().map(|s| s.abs_v).fold(0.0, f64::max),
    })
}

/// Evaluates the bound and then the per-sample checks.
pub fn proof_diagnostics(curve: &Curve, u: &AuxFunction, window: &TimeWindow) -> Result<ProofDiagnostics> {
    let report = theorem1_report(curve, u, window)?;
    proof_diagnostics_for(&report, curve, u)
}
