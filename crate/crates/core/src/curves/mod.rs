//! Curve families on S² and ℝᵈ with their first and second derivatives,
//! plus sup-norm estimation of derived scalar quantities over a window.

mod phase;
mod sampled;
mod scan;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::auxfun::AuxFunction;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, Manifold, SurfacePoint, UNIT_TOL};

pub use phase::{Phase, PhaseRegularity};
pub use sampled::{load_sampled, read_sampled_csv, SampledCurve, GRID_JITTER_TOL, MIN_SAMPLED_POINTS};
pub use scan::{maximize, SupEstimate, TimeWindow, DEFAULT_SAMPLES, DEFAULT_T_MAX, DEFAULT_T_MIN};
pub(crate) use scan::golden_max;

/// Position, velocity and ambient acceleration at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEvaluation {
    pub t: f64,
    pub x: AmbientVector,
    pub xdot: AmbientVector,
    pub xddot: AmbientVector,
}

impl CurveEvaluation {
    pub fn speed(&self) -> f64 {
        self.xdot.norm()
    }
}

/// `x(t) = cos θ(t)·a + sin θ(t)·b` with orthonormal `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreatCircle {
    a: SurfacePoint,
    b: SurfacePoint,
    phase: Phase,
}

/// `x(t) = (sin θ₀ cos θ(t), sin θ₀ sin θ(t), cos θ₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Latitude {
    colatitude: f64,
    phase: Phase,
}

/// One factor `exp(ψ(t)·[n]ₓ)` of a [`SphericalCompound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotatingFrame {
    pub axis: [f64; 3],
    pub phase: Phase,
}

/// Nested rotating frames acting on a base point:
/// `x(t) = R₁(ψ₁(t)) R₂(ψ₂(t)) ⋯ R_M(ψ_M(t)) p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCompound {
    base: SurfacePoint,
    frames: Vec<RotatingFrame>,
}

/// Building blocks of a Euclidean component function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Term {
    Constant { value: f64 },
    Linear { slope: f64 },
    /// `c·t²`
    Quadratic { coefficient: f64 },
    /// `A·sin(ω t + φ)`
    Sine { amplitude: f64, omega: f64, phase: f64 },
}

impl Term {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Term::Constant { value } => (value, 0.0, 0.0),
            Term::Linear { slope } => (slope * t, slope, 0.0),
            Term::Quadratic { coefficient } => {
                (coefficient * t * t, 2.0 * coefficient * t, 2.0 * coefficient)
            }
            Term::Sine { amplitude, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                (amplitude * s, amplitude * omega * c, -amplitude * omega * omega * s)
            }
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Term::Constant { value } => value.is_finite(),
            Term::Linear { slope } => slope.is_finite(),
            Term::Quadratic { coefficient } => coefficient.is_finite(),
            Term::Sine { amplitude, omega, phase } => {
                amplitude.is_finite() && omega.is_finite() && phase.is_finite()
            }
        }
    }

    fn regularity(&self) -> PhaseRegularity {
        match *self {
            Term::Constant { .. } => PhaseRegularity::Constant,
            Term::Linear { slope: c } | Term::Quadratic { coefficient: c } => {
                if c == 0.0 {
                    PhaseRegularity::Constant
                } else {
                    PhaseRegularity::Aperiodic
                }
            }
            Term::Sine { amplitude, omega, .. } => {
                if amplitude == 0.0 || omega == 0.0 {
                    PhaseRegularity::Constant
                } else {
                    PhaseRegularity::Periodic(std::f64::consts::TAU / omega.abs())
                }
            }
        }
    }
}

/// Sum of [`Term`]s; one coordinate of a [`EuclideanAnalytic`] curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarFunction {
    pub terms: Vec<Term>,
}

impl ScalarFunction {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    /// `(f, f′, f″)` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        self.terms.iter().fold((0.0, 0.0, 0.0), |acc, term| {
            let (v, d1, d2) = term.eval(t);
            (acc.0 + v, acc.1 + d1, acc.2 + d2)
        })
    }
}

/// A curve in ℝᵈ given coordinate-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanAnalytic {
    components: Vec<ScalarFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    GreatCircle(GreatCircle),
    Latitude(Latitude),
    SphericalCompound(SphericalCompound),
    EuclideanAnalytic(EuclideanAnalytic),
    Sampled(SampledCurve),
}

fn check_phase(phase: &Phase) -> Result<()> {
    if phase.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCurve(format!("phase {phase:?} has non-finite parameters")))
    }
}

impl Curve {
    pub fn great_circle(a: AmbientVector, b: AmbientVector, phase: Phase) -> Result<Self> {
        check_phase(&phase)?;
        let a = SurfacePoint::new(a)?;
        let b = SurfacePoint::new(b)?;
        let overlap = a.dot(b.coords());
        if overlap.abs() > UNIT_TOL {
            return Err(Error::InvalidCurve(format!(
                "great-circle axes must be orthogonal, ⟨a,b⟩ = {overlap}"
            )));
        }
        Ok(Curve::GreatCircle(GreatCircle { a, b, phase }))
    }

    pub fn latitude(colatitude: f64, phase: Phase) -> Result<Self> {
        check_phase(&phase)?;
        if !(colatitude > 0.0 && colatitude < std::f64::consts::PI) {
            return Err(Error::InvalidCurve(format!(
                "colatitude must lie in (0, π), got {colatitude}"
            )));
        }
        Ok(Curve::Latitude(Latitude { colatitude, phase }))
    }

    pub fn compound(base: AmbientVector, frames: Vec<RotatingFrame>) -> Result<Self> {
        let base = SurfacePoint::new(base)?;
        for frame in &frames {
            check_phase(&frame.phase)?;
            let n = Vector3::from(frame.axis).norm();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidCurve(format!(
                    "rotation axis {:?} must be a unit vector",
                    frame.axis
                )));
            }
        }
        Ok(Curve::SphericalCompound(SphericalCompound { base, frames }))
    }

    pub fn euclidean(components: Vec<ScalarFunction>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidCurve("a Euclidean curve needs at least one component".into()));
        }
        if components.iter().flat_map(|c| &c.terms).any(|t| !t.is_finite()) {
            return Err(Error::InvalidCurve("non-finite term parameter".into()));
        }
        Ok(Curve::EuclideanAnalytic(EuclideanAnalytic { components }))
    }

    /// Scalar curve `f: ℝ → ℝ` as a one-dimensional Euclidean curve.
    pub fn scalar(f: ScalarFunction) -> Result<Self> {
        Self::euclidean(vec![f])
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            Curve::EuclideanAnalytic(e) => Manifold::Euclidean(e.components.len()),
            Curve::Sampled(s) => s.manifold(),
            _ => Manifold::Sphere2,
        }
    }

    pub fn eval(&self, t: f64) -> Result<CurveEvaluation> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("evaluation time {t} is not finite")));
        }
        let (x, xdot, xddot) = match self {
            Curve::GreatCircle(g) => {
                let (th, d1, d2) = g.phase.eval(t);
                let (s, c) = th.sin_cos();
                let radial = g.a.coords() * c + g.b.coords() * s;
                let tangent = g.b.coords() * c - g.a.coords() * s;
                let xddot = &tangent * d2 - &radial * (d1 * d1);
                (radial, tangent * d1, xddot)
            }
            Curve::Latitude(l) => {
                let (phi, d1, d2) = l.phase.eval(t);
                let (s, c) = phi.sin_cos();
                let (st, ct) = l.colatitude.sin_cos();
                let x = AmbientVector::from_column_slice(&[st * c, st * s, ct]);
                let tangent = AmbientVector::from_column_slice(&[-st * s, st * c, 0.0]);
                let inward = AmbientVector::from_column_slice(&[st * c, st * s, 0.0]);
                let xddot = &tangent * d2 - inward * (d1 * d1);
                (x, tangent * d1, xddot)
            }
            Curve::SphericalCompound(c) => c.eval(t),
            Curve::EuclideanAnalytic(e) => {
                let d = e.components.len();
                let mut x = AmbientVector::zeros(d);
                let mut v = AmbientVector::zeros(d);
                let mut a = AmbientVector::zeros(d);
                for (k, f) in e.components.iter().enumerate() {
                    (x[k], v[k], a[k]) = f.eval(t);
                }
                (x, v, a)
            }
            Curve::Sampled(s) => s.eval(t)?,
        };
        Ok(CurveEvaluation { t, x, xdot, xddot })
    }

    /// Periodicity of the curve in `t`, when it can be read off the family
    /// parameters.
    pub fn regularity(&self) -> PhaseRegularity {
        match self {
            Curve::GreatCircle(g) => g.phase.regularity(),
            Curve::Latitude(l) => l.phase.regularity(),
            Curve::SphericalCompound(c) => {
                phase::common_period(c.frames.iter().map(|f| f.phase.regularity()))
            }
            Curve::EuclideanAnalytic(e) => phase::common_period(
                e.components.iter().flat_map(|c| &c.terms).map(Term::regularity),
            ),
            Curve::Sampled(_) => PhaseRegularity::Aperiodic,
        }
    }

    /// Window used when none is given: one period for periodic curves, the
    /// sample grid itself for sampled curves, otherwise the default window.
    pub fn default_window(&self) -> TimeWindow {
        match (self, self.regularity()) {
            (Curve::Sampled(s), _) => {
                TimeWindow { t_min: s.t_min(), t_max: s.t_max(), samples: s.len() }
            }
            (_, PhaseRegularity::Periodic(period)) => {
                TimeWindow { t_min: 0.0, t_max: period, samples: DEFAULT_SAMPLES }
            }
            _ => TimeWindow::default(),
        }
    }

    /// Curve positions at the window's grid nodes.
    pub fn sample_points(&self, window: &TimeWindow) -> Result<Vec<AmbientVector>> {
        window.validate()?;
        window.times().map(|t| self.eval(t).map(|e| e.x)).collect()
    }

    /// Covariant acceleration `∇_ẋ ẋ` at `t`.
    pub fn covariant_accel(&self, t: f64) -> Result<AmbientVector> {
        let e = self.eval(t)?;
        self.manifold().covariant_accel(&e.x, &e.xdot, &e.xddot)
    }
}

impl SphericalCompound {
    fn eval(&self, t: f64) -> (AmbientVector, AmbientVector, AmbientVector) {
        let mut y = Vector3::new(self.base.coords()[0], self.base.coords()[1], self.base.coords()[2]);
        let mut dy = Vector3::zeros();
        let mut ddy = Vector3::zeros();
        for frame in self.frames.iter().rev() {
            let axis = Unit::new_normalize(Vector3::from(frame.axis));
            let (psi, d1, d2) = frame.phase.eval(t);
            let r = Rotation3::from_axis_angle(&axis, psi).into_inner();
            let k = axis.cross_matrix();
            let dr: Matrix3<f64> = k * r * d1;
            let ddr: Matrix3<f64> = (k * d2 + k * k * (d1 * d1)) * r;
            let ny = r * y;
            let ndy = dr * y + r * dy;
            let nddy = ddr * y + dr * dy * 2.0 + r * ddy;
            (y, dy, ddy) = (ny, ndy, nddy);
        }
        let to_dyn = |v: Vector3<f64>| AmbientVector::from_column_slice(v.as_slice());
        (to_dyn(y), to_dyn(dy), to_dyn(ddy))
    }
}

/// Scalar quantities whose supremum along a curve can be estimated.
pub enum Quantity<'a> {
    Speed,
    CovariantAccelNorm,
    AuxGradientNorm(&'a AuxFunction),
    Custom(&'a (dyn Fn(&CurveEvaluation) -> Result<f64> + Sync)),
}

impl Quantity<'_> {
    pub fn evaluate(&self, curve: &Curve, t: f64) -> Result<f64> {
        let e = curve.eval(t)?;
        match self {
            Quantity::Speed => Ok(e.speed()),
            Quantity::CovariantAccelNorm => {
                Ok(curve.manifold().covariant_accel(&e.x, &e.xdot, &e.xddot)?.norm())
            }
            Quantity::AuxGradientNorm(u) => Ok(u.gradient(&e.x)?.norm()),
            Quantity::Custom(f) => f(&e),
        }
    }
}

/// Supremum of `quantity` along `curve` over `window`.
pub fn sup_norm(curve: &Curve, window: &TimeWindow, quantity: Quantity<'_>) -> Result<SupEstimate> {
    maximize(window, |t| quantity.evaluate(curve, t))
}
