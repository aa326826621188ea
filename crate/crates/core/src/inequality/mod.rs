//! Evaluation of `‖ẋ‖∞² ≤ C²/λ · ‖∇U∘x‖∞ · ‖∇_ẋ ẋ‖∞` along a curve, its sphere
//! specialization with the Chebyshev centre, and the scalar inequality
//! `‖f′‖∞² ≤ 2‖f‖∞‖f″‖∞`.

mod diagnostics;
mod probe;

pub use diagnostics::{proof_diagnostics, proof_diagnostics_for, CheckOutcome, ProofDiagnostics};
pub use probe::{
    nelder_mead, sharpness_probe, NamedParameter, ProbeFamily, ProbeReport, DEFAULT_SEED, PROBE_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::auxfun::{lambda_min, AuxFunction, LambdaEstimate};
use crate::chebyshev::{chebyshev_center, CapCenter};
use crate::curves::{maximize, sup_norm, Curve, Phase, PhaseRegularity, Quantity, SupEstimate, TimeWindow};
use crate::error::{Error, Result};
use crate::geometry::{vec3, Manifold, SurfacePoint};

/// Relative slack allowed in `satisfied`.
pub const SATISFIED_TOL: f64 = 1e-9;
/// `λ` at or below this counts as non-positive.
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// `‖∇U∘x‖∞` at or below this counts as zero.
pub const GRADIENT_FLOOR: f64 = 1e-12;
/// Constant of the scalar inequality on ℝ.
pub const CLASSICAL_CONSTANT: f64 = 2.0;
/// Constant of the same inequality for Banach-space-valued functions.
pub const BANACH_CONSTANT: f64 = 4.0;

pub const EXPONENT_NOTE: &str = "the sphere bound is evaluated in squared form, \
‖ẋ‖² ≤ C²·r0·r2/λ, matching the general inequality";
pub const WINDOW_NOTE: &str = "the curve is not periodic, so the window suprema may \
underestimate the suprema over the whole real line";

/// Positive root `C` of `ζ³ − 3ζ − 1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauConstant {
    pub c: f64,
    /// `C³ − 3C − 1`
    pub residual: f64,
}

fn cubic(z: f64) -> f64 {
    z * z * z - 3.0 * z - 1.0
}

/// Safeguarded Newton iteration on `[1, 2]`, started at 2.
pub fn landau_constant() -> LandauConstant {
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    let mut z = 2.0;
    for _ in 0..100 {
        let f = cubic(z);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let step = f / (3.0 * z * z - 3.0);
        let next = z - step;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (next - z).abs() <= f64::EPSILON * z {
            z = next;
            break;
        }
        z = next;
    }
    LandauConstant { c: z, residual: cubic(z) }
}

/// Estimates and verdict for one curve and auxiliary function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖ẋ‖∞`
    pub speed: SupEstimate,
    /// `‖∇U∘x‖∞`
    pub r0: SupEstimate,
    /// `‖∇_ẋ ẋ‖∞`
    pub r2: SupEstimate,
    pub lambda: LambdaEstimate,
    /// `sup U∘x`
    pub sup_u: f64,
    /// `‖ẋ‖∞²`
    pub lhs: f64,
    /// `C²·r0·r2/λ`, absent when `λ ≤ 0`.
    pub rhs: Option<f64>,
    /// `lhs/rhs`, absent when `rhs` is absent or zero.
    pub slack_ratio: Option<f64>,
    pub hypotheses_ok: bool,
    pub satisfied: bool,
    /// Whether the inequality makes a claim about this curve at all.
    pub binding: bool,
    pub window: TimeWindow,
    pub notes: Vec<String>,
}

impl BoundReport {
    /// `λ·lhs/(r0·r2)`; the inequality reads `Q ≤ C²`.
    pub fn q(&self) -> Option<f64> {
        let denom = self.r0.value * self.r2.value;
        (self.hypotheses_ok && denom > 0.0).then(|| self.lambda.value * self.lhs / denom)
    }
}

fn check_manifolds(curve: &Curve, u: &AuxFunction) -> Result<()> {
    if curve.manifold() != u.manifold() {
        return Err(Error::ManifoldMismatch(format!(
            "curve on {:?}, auxiliary function on {:?}",
            curve.manifold(),
            u.manifold()
        )));
    }
    Ok(())
}

fn window_notes(curve: &Curve) -> Vec<String> {
    match (curve, curve.regularity()) {
        (Curve::Sampled(_), _) | (_, PhaseRegularity::Aperiodic) => vec![WINDOW_NOTE.to_string()],
        _ => Vec::new(),
    }
}

/// Evaluates the general inequality for `curve` and `u` over `window`.
///
/// Failed hypotheses are reported through `hypotheses_ok` and `binding`,
/// never as an error.
pub fn theorem1_report(curve: &Curve, u: &AuxFunction, window: &TimeWindow) -> Result<BoundReport> {
    check_manifolds(curve, u)?;
    window.validate()?;
    let speed = sup_norm(curve, window, Quantity::Speed)?;
    let r0 = sup_norm(curve, window, Quantity::AuxGradientNorm(u))?;
    let r2 = sup_norm(curve, window, Quantity::CovariantAccelNorm)?;
    let lambda = lambda_min(u, curve, window)?;
    let sup_u = maximize(window, |t| u.value(&curve.eval(t)?.x))?.value;

    let c2 = landau_constant().c.powi(2);
    let lhs = speed.value * speed.value;
    let lam = lambda.value;
    let hypotheses_ok =
        sup_u.is_finite() && r0.value > GRADIENT_FLOOR && r0.value.is_finite() && lam > LAMBDA_FLOOR;
    let rhs = (lam > 0.0).then(|| c2 * r0.value * r2.value / lam).filter(|r| r.is_finite());
    let slack_ratio = rhs.filter(|&r| r > 0.0).map(|r| lhs / r);
    let satisfied = rhs.is_some_and(|r| lhs <= r * (1.0 + SATISFIED_TOL));

    let mut notes = window_notes(curve);
    if !hypotheses_ok {
        notes.push(format!(
            "hypotheses fail (sup U = {sup_u}, r0 = {}, λ = {lam}); the bound makes no claim",
            r0.value
        ));
    }
    Ok(BoundReport {
        speed,
        r0,
        r2,
        lambda,
        sup_u,
        lhs,
        rhs,
        slack_ratio,
        hypotheses_ok,
        satisfied,
        binding: hypotheses_ok,
        window: *window,
        notes,
    })
}

/// Sphere specialization: `U = ‖x − e‖²/2` with `e` the Chebyshev centre of
/// the sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub bound: BoundReport,
    pub center: CapCenter,
    /// `C²·√(1 − λ²)·r2/λ`
    pub relaxed_rhs: Option<f64>,
    pub relaxed_slack_ratio: Option<f64>,
}

pub fn theorem2_report(curve: &Curve, window: &TimeWindow) -> Result<Theorem2Report> {
    if curve.manifold() != Manifold::Sphere2 {
        return Err(Error::ManifoldMismatch(format!(
            "the sphere bound needs a curve on S², got {:?}",
            curve.manifold()
        )));
    }
    let points = curve
        .sample_points(window)?
        .into_iter()
        .map(SurfacePoint::new)
        .collect::<Result<Vec<_>>>()?;
    let center = chebyshev_center(&points)?;
    let u = AuxFunction::chordal(center.center());
    let mut bound = theorem1_report(curve, &u, window)?;
    bound.notes.push(EXPONENT_NOTE.to_string());
    if let Some(w) = &center.warning {
        bound.notes.push(w.clone());
    }
    let lam = bound.lambda.value;
    let relaxed_rhs = (lam > 0.0)
        .then(|| landau_constant().c.powi(2) * (1.0 - lam * lam).max(0.0).sqrt() * bound.r2.value / lam);
    let relaxed_slack_ratio = relaxed_rhs.filter(|&r| r > 0.0).map(|r| bound.lhs / r);
    Ok(Theorem2Report { bound, center, relaxed_rhs, relaxed_slack_ratio })
}

/// `‖f′‖∞² ≤ 2‖f‖∞‖f″‖∞` for a scalar curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub sup_f: SupEstimate,
    pub sup_df: SupEstimate,
    pub sup_ddf: SupEstimate,
    pub lhs: f64,
    pub rhs: f64,
    pub slack_ratio: Option<f64>,
    pub satisfied: bool,
    pub constant: f64,
    /// Recorded only; not checked.
    pub banach_constant: f64,
    pub window: TimeWindow,
    pub notes: Vec<String>,
}

pub fn classical_landau_check(curve: &Curve, window: &TimeWindow) -> Result<ClassicalReport> {
    if curve.manifold() != Manifold::Euclidean(1) {
        return Err(Error::InvalidInput(format!(
            "the scalar inequality needs a curve in ℝ¹, got {:?}",
            curve.manifold()
        )));
    }
    let f = |e: &crate::curves::CurveEvaluation| Ok(e.x[0].abs());
    let df = |e: &crate::curves::CurveEvaluation| Ok(e.xdot[0].abs());
    let ddf = |e: &crate::curves::CurveEvaluation| Ok(e.xddot[0].abs());
    let sup_f = sup_norm(curve, window, Quantity::Custom(&f))?;
    let sup_df = sup_norm(curve, window, Quantity::Custom(&df))?;
    let sup_ddf = sup_norm(curve, window, Quantity::Custom(&ddf))?;
    let lhs = sup_df.value * sup_df.value;
    let rhs = CLASSICAL_CONSTANT * sup_f.value * sup_ddf.value;
    Ok(ClassicalReport {
        sup_f,
        sup_df,
        sup_ddf,
        lhs,
        rhs,
        slack_ratio: (rhs > 0.0).then(|| lhs / rhs),
        satisfied: lhs <= rhs * (1.0 + SATISFIED_TOL),
        constant: CLASSICAL_CONSTANT,
        banach_constant: BANACH_CONSTANT,
        window: *window,
        notes: window_notes(curve),
    })
}

/// Great circle with phase `t²/2`: bounded covariant acceleration, unbounded
/// speed.
pub fn counterexample_curve() -> Curve {
    Curve::great_circle(vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0), Phase::Quadratic { alpha: 1.0, omega: 0.0 })
        .expect("fixed orthonormal axes")
}

pub fn counterexample_window(t_end: f64, samples: usize) -> Result<TimeWindow> {
    TimeWindow::new(0.0, t_end, samples)
}

/// Sphere bound along the counterexample on `[0, t_end]`.
pub fn counterexample(t_end: f64, samples: usize) -> Result<Theorem2Report> {
    theorem2_report(&counterexample_curve(), &counterexample_window(t_end, samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{ScalarFunction, Term};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI, TAU};

    fn c2() -> f64 {
        let c = 2.0 * (PI / 9.0).cos();
        c * c
    }

    fn pole() -> SurfacePoint {
        SurfacePoint::from_xyz(0.0, 0.0, 1.0).unwrap()
    }

    fn one_period(samples: usize) -> TimeWindow {
        TimeWindow::new(0.0, TAU, samples).unwrap()
    }

    #[test]
    fn constant_matches_trigonometric_root() {
        let k = landau_constant();
        assert!((k.c - 1.87939).abs() <= 1e-5);
        assert!(k.residual.abs() <= 1e-12);
        assert!((k.c - 2.0 * (PI / 9.0).cos()).abs() <= 1e-12);
    }

    #[test]
    fn latitude_closed_forms() {
        let th = FRAC_PI_4;
        let curve = Curve::latitude(th, Phase::linear(1.0)).unwrap();
        let r = theorem1_report(&curve, &AuxFunction::chordal(pole()), &one_period(4001)).unwrap();
        assert!((r.r0.value - th.sin()).abs() < 1e-10);
        assert!((r.r2.value - th.sin() * th.cos()).abs() < 1e-10);
        assert!((r.lambda.value - th.cos()).abs() < 1e-10);
        assert!((r.lhs - th.sin().powi(2)).abs() < 1e-10);
        assert!((r.slack_ratio.unwrap() - 1.0 / c2()).abs() < 1e-9);
        assert!(r.hypotheses_ok && r.satisfied && r.binding);
        assert!((r.q().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_curve_is_trivially_satisfied() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let curve = Curve::latitude(FRAC_PI_4, Phase::linear(0.0)).unwrap();
        let at = curve.eval(0.0).unwrap().x;
        assert!((at[0] - r).abs() < 1e-15 && (at[2] - r).abs() < 1e-15);
        let rep = theorem1_report(&curve, &AuxFunction::chordal(pole()), &TimeWindow::new(0.0, 1.0, 11).unwrap())
            .unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.hypotheses_ok && rep.satisfied);
    }

    #[test]
    fn polar_great_circle_fails_hypotheses() {
        let curve = Curve::great_circle(vec3(0.0, 0.0, 1.0), vec3(1.0, 0.0, 0.0), Phase::linear(1.0)).unwrap();
        let r = theorem1_report(&curve, &AuxFunction::chordal(pole()), &one_period(2001)).unwrap();
        assert!((r.lambda.value + 1.0).abs() < 1e-9);
        assert!(!r.hypotheses_ok && !r.binding);
        assert!(r.rhs.is_none());
    }

    #[test]
    fn manifold_mismatch() {
        let curve = Curve::scalar(ScalarFunction::new(vec![Term::Sine { amplitude: 1.0, omega: 1.0, phase: 0.0 }]))
            .unwrap();
        let err = theorem1_report(&curve, &AuxFunction::chordal(pole()), &one_period(11)).unwrap_err();
        assert!(matches!(err, Error::ManifoldMismatch(_)));
        assert!(matches!(theorem2_report(&curve, &one_period(11)), Err(Error::ManifoldMismatch(_))));
    }

    #[test]
    fn sphere_bound_on_latitudes() {
        for th in [FRAC_PI_4, FRAC_PI_3] {
            let curve = Curve::latitude(th, Phase::linear(1.0)).unwrap();
            let r = theorem2_report(&curve, &one_period(2001)).unwrap();
            let e = r.center.e;
            assert!(e[0].abs() < 1e-9 && e[1].abs() < 1e-9 && (e[2] - 1.0).abs() < 1e-9);
            assert!((r.bound.lambda.value - th.cos()).abs() < 1e-9);
            assert!((r.bound.slack_ratio.unwrap() - 1.0 / c2()).abs() < 1e-6);
            assert!((r.relaxed_slack_ratio.unwrap() - 1.0 / c2()).abs() < 1e-6);
            assert!(r.bound.notes.iter().any(|n| n == EXPONENT_NOTE));
        }
        let r = theorem2_report(&Curve::latitude(FRAC_PI_3, Phase::linear(1.0)).unwrap(), &one_period(2001))
            .unwrap();
        assert!((r.bound.r2.value - 3f64.sqrt() / 4.0).abs() < 1e-9);
        assert!((r.relaxed_rhs.unwrap() - c2() * 0.75).abs() < 1e-8);
    }

    #[test]
    fn counterexample_scaling() {
        for t_end in [10.0, 50.0] {
            let r = counterexample(t_end, 20_001).unwrap();
            assert!((r.bound.speed.value - t_end).abs() <= 1e-6);
            assert!((r.bound.r2.value - 1.0).abs() <= 1e-9);
            assert!(r.bound.lambda.value <= 0.0);
            assert!(!r.bound.hypotheses_ok);
        }
    }

    #[test]
    fn classical_examples() {
        let sine = |a: f64, w: f64| Term::Sine { amplitude: a, omega: w, phase: 0.0 };
        let f = Curve::scalar(ScalarFunction::new(vec![sine(1.0, 1.0)])).unwrap();
        let r = classical_landau_check(&f, &one_period(4001)).unwrap();
        assert!((r.slack_ratio.unwrap() - 0.5).abs() < 1e-9);
        assert!(r.satisfied);
        assert_eq!(r.banach_constant, 4.0);

        let c = Curve::scalar(ScalarFunction::new(vec![Term::Constant { value: 3.0 }])).unwrap();
        let r = classical_landau_check(&c, &one_period(101)).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.satisfied && r.slack_ratio.is_none());

        let g = Curve::scalar(ScalarFunction::new(vec![sine(1.0, 1.0), sine(0.25, 2.0)])).unwrap();
        let r = classical_landau_check(&g, &one_period(4001)).unwrap();
        assert!(r.satisfied);
        // Oracle: plain dense scan without refinement.
        let dense = |k: usize| {
            (0..=200_000)
                .map(|i| {
                    let t = TAU * i as f64 / 200_000.0;
                    let e = g.eval(t).unwrap();
                    [e.x[0], e.xdot[0], e.xddot[0]][k].abs()
                })
                .fold(0.0, f64::max)
        };
        assert!((r.sup_f.value - dense(0)).abs() < 1e-9);
        assert!((r.sup_df.value - dense(1)).abs() < 1e-9);
        assert!((r.sup_ddf.value - dense(2)).abs() < 1e-9);

        let sphere = Curve::latitude(1.0, Phase::linear(1.0)).unwrap();
        assert!(classical_landau_check(&sphere, &one_period(11)).is_err());
    }
}
