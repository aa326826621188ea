//! Auxiliary functions `U` with value, Riemannian gradient and Hessian
//! quadratic form, and the convexity constant `λ` of `U` along a curve.

use serde::{Deserialize, Serialize};

use crate::curves::{golden_max, maximize, Curve, TimeWindow};
use crate::error::{Error, Result};
use crate::geometry::{self, AmbientVector, Manifold, SurfacePoint, RENORMALIZE_TOL};

/// Step of the symmetric second difference along a geodesic.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Step of the central first difference used for numeric gradients.
pub const GRADIENT_STEP: f64 = 1e-3;
/// Unit tangent directions scanned per sample when no closed form exists.
pub const DIRECTION_SCAN: usize = 64;
/// `⟨e, x⟩` at or below `−1 + ANTIPODE_GUARD` is rejected for the intrinsic
/// function.
pub const ANTIPODE_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum AuxFunction {
    /// `‖x − e‖²/2` restricted to S².
    ChordalHalfSquare { e: SurfacePoint },
    /// `‖x − c‖²/2` on ℝᵈ.
    EuclideanQuadratic { center: AmbientVector },
    /// `ρ(e, x)²/2` with the great-circle distance `ρ`.
    IntrinsicHalfSquare { e: SurfacePoint },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMethod {
    ClosedForm,
    DirectionalScan,
}

/// Smallest Hessian quadratic form on unit tangents along a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub argmin_t: f64,
    pub argmin_direction: Vec<f64>,
    pub method: LambdaMethod,
    /// Smallest value seen on the time grid, before refinement.
    pub grid_value: f64,
}

fn great_circle_distance(e: &SurfacePoint, x: &AmbientVector) -> f64 {
    e.coords().cross(x).norm().atan2(e.dot(x))
}

impl AuxFunction {
    pub fn chordal(e: SurfacePoint) -> Self {
        AuxFunction::ChordalHalfSquare { e }
    }

    pub fn intrinsic(e: SurfacePoint) -> Self {
        AuxFunction::IntrinsicHalfSquare { e }
    }

    pub fn euclidean(center: AmbientVector) -> Result<Self> {
        geometry::ensure_finite(&center, "center")?;
        Manifold::euclidean(center.len())?;
        Ok(AuxFunction::EuclideanQuadratic { center })
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            AuxFunction::EuclideanQuadratic { center } => Manifold::Euclidean(center.len()),
            _ => Manifold::Sphere2,
        }
    }

    fn check_point(&self, x: &AmbientVector) -> Result<()> {
        let dim = self.manifold().ambient_dim();
        if x.len() != dim {
            return Err(Error::ManifoldMismatch(format!(
                "point of dimension {} for a function on dimension {dim}",
                x.len()
            )));
        }
        if self.manifold() == Manifold::Sphere2 && (x.norm() - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::InvalidInput(format!("point {:?} is off the sphere", x.as_slice())));
        }
        Ok(())
    }

    fn guard_antipode(&self, x: &AmbientVector) -> Result<()> {
        if let AuxFunction::IntrinsicHalfSquare { e } = self {
            if e.dot(x) <= -1.0 + ANTIPODE_GUARD {
                return Err(Error::Singularity(format!(
                    "{:?} is antipodal to the centre {:?}",
                    x.as_slice(),
                    e.coords().as_slice()
                )));
            }
        }
        Ok(())
    }

    /// `U(x)`.
    pub fn value(&self, x: &AmbientVector) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value_unchecked(x))
    }

    fn value_unchecked(&self, x: &AmbientVector) -> f64 {
        match self {
            AuxFunction::ChordalHalfSquare { e } => (x - e.coords()).norm_squared() / 2.0,
            AuxFunction::EuclideanQuadratic { center } => (x - center).norm_squared() / 2.0,
            AuxFunction::IntrinsicHalfSquare { e } => {
                let rho = great_circle_distance(e, x);
                rho * rho / 2.0
            }
        }
    }

    /// Riemannian gradient `∇U(x)`. The chordal form is `⟨e, x⟩x − e`; the
    /// intrinsic one is differentiated numerically along two orthogonal
    /// geodesics.
    pub fn gradient(&self, x: &AmbientVector) -> Result<AmbientVector> {
        self.check_point(x)?;
        match self {
            AuxFunction::ChordalHalfSquare { e } => Ok(x * e.dot(x) - e.coords()),
            AuxFunction::EuclideanQuadratic { center } => Ok(x - center),
            AuxFunction::IntrinsicHalfSquare { e } => {
                self.guard_antipode(x)?;
                let p = SurfacePoint::new(x.clone())?;
                // Stay clear of the antipode, where ρ² stops being smooth.
                let to_antipode = std::f64::consts::PI - great_circle_distance(e, x);
                let h = GRADIENT_STEP.min(0.25 * to_antipode);
                let (u1, u2) = p.tangent_basis();
                let d1 = self.directional_derivative(&p, &u1, h)?;
                let d2 = self.directional_derivative(&p, &u2, h)?;
                Ok(u1 * d1 + u2 * d2)
            }
        }
    }

    /// Richardson-extrapolated central difference of `U` along a geodesic.
    fn directional_derivative(&self, x: &SurfacePoint, w: &AmbientVector, h: f64) -> Result<f64> {
        let diff = |h: f64| -> Result<f64> {
            let fwd = geometry::geodesic(x, w, h)?;
            let bwd = geometry::geodesic(x, w, -h)?;
            Ok((self.value_unchecked(fwd.coords()) - self.value_unchecked(bwd.coords())) / (2.0 * h))
        };
        let coarse = diff(h)?;
        let fine = diff(h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Hessian quadratic form `⟨∇_y ∇U(x), y⟩`.
    ///
    /// Uses the closed form `⟨e, x⟩‖y‖²` (chordal) or `‖y‖²` (Euclidean)
    /// where available and [`AuxFunction::hessian_second_difference`]
    /// otherwise.
    pub fn hessian_quadratic(&self, x: &AmbientVector, y: &AmbientVector) -> Result<f64> {
        self.check_point(x)?;
        self.check_tangent(x, y)?;
        match self {
            AuxFunction::ChordalHalfSquare { e } => Ok(e.dot(x) * y.norm_squared()),
            AuxFunction::EuclideanQuadratic { .. } => Ok(y.norm_squared()),
            AuxFunction::IntrinsicHalfSquare { .. } => self.hessian_second_difference(x, y),
        }
    }

    fn check_tangent(&self, x: &AmbientVector, y: &AmbientVector) -> Result<()> {
        if y.len() != x.len() {
            return Err(Error::InvalidInput("direction and point dimensions differ".into()));
        }
        if self.manifold() == Manifold::Sphere2 {
            geometry::TangentVector::new(SurfacePoint::new(x.clone())?, y.clone())?;
        }
        Ok(())
    }

    /// `d²/dt² U(g(t))` at `t = 0` for the geodesic `g` with `g(0) = x`,
    /// `ġ(0) = y`: symmetric second difference at [`HESSIAN_STEP`] with one
    /// Richardson step.
    pub fn hessian_second_difference(&self, x: &AmbientVector, y: &AmbientVector) -> Result<f64> {
        self.check_point(x)?;
        self.guard_antipode(x)?;
        let manifold = self.manifold();
        let mut h = HESSIAN_STEP;
        if let AuxFunction::IntrinsicHalfSquare { e } = self {
            let speed = y.norm();
            if speed > 0.0 {
                let to_antipode = std::f64::consts::PI - great_circle_distance(e, x);
                h = h.min(0.25 * to_antipode / speed);
            }
        }
        let center = self.value_unchecked(x);
        let second = |h: f64| -> Result<f64> {
            let fwd = manifold.geodesic(x, y, h)?;
            let bwd = manifold.geodesic(x, y, -h)?;
            Ok((self.value_unchecked(&fwd) - 2.0 * center + self.value_unchecked(&bwd)) / (h * h))
        };
        let coarse = second(h)?;
        let fine = second(h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Smallest Hessian form over unit tangents at `x`, with its direction.
    fn min_unit_hessian(&self, x: &AmbientVector) -> Result<(f64, AmbientVector)> {
        match self {
            AuxFunction::ChordalHalfSquare { e } => {
                let p = SurfacePoint::new(x.clone())?;
                Ok((e.dot(x), p.tangent_basis().0))
            }
            AuxFunction::EuclideanQuadratic { .. } => {
                let mut dir = AmbientVector::zeros(x.len());
                dir[0] = 1.0;
                Ok((1.0, dir))
            }
            AuxFunction::IntrinsicHalfSquare { .. } => {
                let p = SurfacePoint::new(x.clone())?;
                let (u1, u2) = p.tangent_basis();
                let direction = |angle: f64| &u1 * angle.cos() + &u2 * angle.sin();
                // q(ξ) = q(−ξ), so half a turn covers every direction.
                let step = std::f64::consts::PI / DIRECTION_SCAN as f64;
                let mut best = (f64::INFINITY, 0.0);
                for k in 0..DIRECTION_SCAN {
                    let angle = k as f64 * step;
                    let q = self.hessian_second_difference(x, &direction(angle))?;
                    if q < best.0 {
                        best = (q, angle);
                    }
                }
                let neg = |angle: f64| self.hessian_second_difference(x, &direction(angle)).map(|q| -q);
                let (angle, neg_q, _) = golden_max(&neg, best.1 - step, best.1 + step)?;
                if -neg_q < best.0 {
                    best = (-neg_q, angle);
                }
                Ok((best.0, direction(best.1)))
            }
        }
    }
}

/// `λ = inf_t min_{‖ξ‖=1} ⟨∇_ξ ∇U(x(t)), ξ⟩` estimated over `window`.
///
/// For the chordal function the inner minimum is `⟨e, x(t)⟩` in every
/// direction; the intrinsic function scans [`DIRECTION_SCAN`] directions per
/// sample and polishes the worst angle. Negative values are returned as is.
pub fn lambda_min(u: &AuxFunction, curve: &Curve, window: &TimeWindow) -> Result<LambdaEstimate> {
    if u.manifold() != curve.manifold() {
        return Err(Error::ManifoldMismatch(format!(
            "curve on {:?}, auxiliary function on {:?}",
            curve.manifold(),
            u.manifold()
        )));
    }
    let method = match u {
        AuxFunction::IntrinsicHalfSquare { .. } => LambdaMethod::DirectionalScan,
        _ => LambdaMethod::ClosedForm,
    };
    if let AuxFunction::EuclideanQuadratic { center } = u {
        window.validate()?;
        let mut dir = vec![0.0; center.len()];
        dir[0] = 1.0;
        return Ok(LambdaEstimate {
            value: 1.0,
            argmin_t: window.t_min,
            argmin_direction: dir,
            method,
            grid_value: 1.0,
        });
    }
    let est = maximize(window, |t| {
        let e = curve.eval(t)?;
        u.min_unit_hessian(&e.x).map(|(q, _)| -q)
    })?;
    let at = curve.eval(est.argmax_t)?;
    let (_, direction) = u.min_unit_hessian(&at.x)?;
    Ok(LambdaEstimate {
        value: -est.value,
        argmin_t: est.argmax_t,
        argmin_direction: direction.as_slice().to_vec(),
        method,
        grid_value: -est.grid_value,
    })
}
