//! Embedded-manifold primitives for the unit 2-sphere and Euclidean space.
//!
//! Points and vectors are carried in ambient coordinates. On the sphere the
//! tangent space at `x` is the plane orthogonal to `x`, the covariant
//! derivative along a curve is the tangential part of the ambient
//! derivative, and geodesics are great circles traversed at constant speed.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedding-space coordinates of a point or a vector.
pub type AmbientVector = DVector<f64>;

/// Accepted deviation of `‖x‖` from one without any correction.
pub const UNIT_TOL: f64 = 1e-9;
/// Points within this distance of the sphere are renormalized, beyond it rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;
/// Tangency tolerance for [`TangentVector`], relative to `max(1, ‖v‖)`.
pub const TANGENT_TOL: f64 = 1e-9;
/// Tangency tolerance for the velocity fed to [`covariant_accel`].
pub const VELOCITY_TANGENT_TOL: f64 = 1e-6;

/// Shorthand for a 3-component ambient vector.
pub fn vec3(x: f64, y: f64, z: f64) -> AmbientVector {
    DVector::from_column_slice(&[x, y, z])
}

pub(crate) fn ensure_finite(v: &AmbientVector, what: &str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries: {:?}", v.as_slice())))
    }
}

fn ensure_dim(v: &AmbientVector, dim: usize, what: &str) -> Result<()> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has dimension {}, expected {dim}", v.len())))
    }
}

/// A point of the unit sphere S² ⊂ ℝ³.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    coords: AmbientVector,
}

impl SurfacePoint {
    /// Validates `coords` as a point of S², renormalizing small drift.
    pub fn new(coords: AmbientVector) -> Result<Self> {
        Self::new_flagged(coords).map(|(p, _)| p)
    }

    /// Like [`SurfacePoint::new`], also reporting whether the input had to be
    /// renormalized (its norm was off by more than [`UNIT_TOL`]).
    pub fn new_flagged(coords: AmbientVector) -> Result<(Self, bool)> {
        ensure_dim(&coords, 3, "surface point")?;
        ensure_finite(&coords, "surface point")?;
        let norm = coords.norm();
        let drift = (norm - 1.0).abs();
        if drift <= UNIT_TOL {
            Ok((Self { coords }, false))
        } else if drift <= RENORMALIZE_TOL {
            Ok((Self { coords: coords / norm }, true))
        } else {
            Err(Error::InvalidInput(format!(
                "point {:?} is off the unit sphere (norm {norm})",
                coords.as_slice()
            )))
        }
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(vec3(x, y, z))
    }

    /// Radial projection of an arbitrary nonzero vector onto the sphere.
    pub fn normalize(v: &AmbientVector) -> Result<Self> {
        ensure_dim(v, 3, "vector")?;
        ensure_finite(v, "vector")?;
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        Ok(Self { coords: v / n })
    }

    pub(crate) fn from_unit_unchecked(coords: AmbientVector) -> Self {
        debug_assert!((coords.norm() - 1.0).abs() <= 1e-8);
        Self { coords }
    }

    pub fn coords(&self) -> &AmbientVector {
        &self.coords
    }

    pub fn into_coords(self) -> AmbientVector {
        self.coords
    }

    pub fn dot(&self, v: &AmbientVector) -> f64 {
        self.coords.dot(v)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.coords[0], self.coords[1], self.coords[2]]
    }

    /// Orthonormal basis `(u1, u2)` of the tangent plane, with `u1 × u2 = x`.
    pub fn tangent_basis(&self) -> (AmbientVector, AmbientVector) {
        let x = &self.coords;
        // Axis least aligned with x.
        let k = (0..3)
            .min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
            .unwrap_or(0);
        let mut axis = DVector::zeros(3);
        axis[k] = 1.0;
        let u1 = &axis - x * x.dot(&axis);
        let u1 = &u1 / u1.norm();
        let u2 = x.cross(&u1);
        (u1, u2)
    }
}

/// A vector tangent to S² at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: SurfacePoint,
    pub vec: AmbientVector,
}

impl TangentVector {
    pub fn new(base: SurfacePoint, vec: AmbientVector) -> Result<Self> {
        ensure_dim(&vec, 3, "tangent vector")?;
        ensure_finite(&vec, "tangent vector")?;
        let radial = base.dot(&vec);
        if radial.abs() > TANGENT_TOL * vec.norm().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "vector {:?} is not tangent at {:?} (radial component {radial})",
                vec.as_slice(),
                base.coords().as_slice()
            )));
        }
        Ok(Self { base, vec })
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// The two manifolds with computable content: S² and ℝᵈ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Sphere2,
    Euclidean(usize),
}

impl Manifold {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("Euclidean dimension must be at least 1".into()));
        }
        Ok(Manifold::Euclidean(dim))
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Sphere2 => 3,
            Manifold::Euclidean(d) => d,
        }
    }

    /// Orthogonal projection of `v` onto the tangent space at `x`.
    pub fn project_tangent(&self, x: &AmbientVector, v: &AmbientVector) -> AmbientVector {
        match self {
            Manifold::Sphere2 => v - x * x.dot(v),
            Manifold::Euclidean(_) => v.clone(),
        }
    }

    /// Covariant acceleration `∇_ẋ ẋ` from ambient position, velocity and
    /// second derivative.
    pub fn covariant_accel(
        &self,
        x: &AmbientVector,
        xdot: &AmbientVector,
        xddot: &AmbientVector,
    ) -> Result<AmbientVector> {
        match self {
            Manifold::Sphere2 => {
                let p = SurfacePoint::new(x.clone())?;
                covariant_accel(&p, xdot, xddot).map(|t| t.vec)
            }
            Manifold::Euclidean(d) => {
                ensure_dim(xddot, *d, "acceleration")?;
                ensure_finite(xddot, "acceleration")?;
                Ok(xddot.clone())
            }
        }
    }

    /// Geodesic through `x0` with initial velocity `y`, evaluated at `t`.
    pub fn geodesic(&self, x0: &AmbientVector, y: &AmbientVector, t: f64) -> Result<AmbientVector> {
        match self {
            Manifold::Sphere2 => {
                let p = SurfacePoint::new(x0.clone())?;
                geodesic(&p, y, t).map(SurfacePoint::into_coords)
            }
            Manifold::Euclidean(d) => {
                ensure_dim(x0, *d, "point")?;
                ensure_dim(y, *d, "direction")?;
                Ok(x0 + y * t)
            }
        }
    }
}

/// Orthogonal projection of `v` onto `T_x S²`: `v − ⟨v, x⟩ x`.
pub fn project_tangent(x: &SurfacePoint, v: &AmbientVector) -> Result<TangentVector> {
    ensure_dim(v, 3, "vector")?;
    ensure_finite(v, "vector")?;
    let vec = v - x.coords() * x.dot(v);
    Ok(TangentVector { base: x.clone(), vec })
}

/// Covariant acceleration along a sphere curve, computed as the tangential
/// part of the ambient second derivative.
///
/// `xdot` must be tangent at `x` to within [`VELOCITY_TANGENT_TOL`] (relative
/// to `max(1, ‖ẋ‖)`).
pub fn covariant_accel(
    x: &SurfacePoint,
    xdot: &AmbientVector,
    xddot: &AmbientVector,
) -> Result<TangentVector> {
    ensure_dim(xdot, 3, "velocity")?;
    ensure_finite(xdot, "velocity")?;
    let radial = x.dot(xdot);
    if radial.abs() > VELOCITY_TANGENT_TOL * xdot.norm().max(1.0) {
        return Err(Error::InvalidCurve(format!(
            "velocity {:?} is not tangent at {:?} (radial component {radial})",
            xdot.as_slice(),
            x.coords().as_slice()
        )));
    }
    project_tangent(x, xddot)
}

/// The geodesic-equation form `ẍ + ‖ẋ‖² x` of the covariant acceleration.
///
/// Agrees with [`covariant_accel`] exactly when `⟨ẍ, x⟩ = −‖ẋ‖²`, which holds
/// for the derivatives of any curve lying on the sphere; the difference is a
/// consistency check on the input.
pub fn covariant_accel_geodesic_form(
    x: &SurfacePoint,
    xdot: &AmbientVector,
    xddot: &AmbientVector,
) -> AmbientVector {
    xddot + x.coords() * xdot.norm_squared()
}

/// Point at time `t` on the constant-speed great circle leaving `x0` with
/// velocity `y`: `cos(‖y‖t)·x0 + sin(‖y‖t)·y/‖y‖`.
pub fn geodesic(x0: &SurfacePoint, y: &AmbientVector, t: f64) -> Result<SurfacePoint> {
    ensure_dim(y, 3, "direction")?;
    ensure_finite(y, "direction")?;
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("geodesic time {t} is not finite")));
    }
    let radial = x0.dot(y);
    if radial.abs() > VELOCITY_TANGENT_TOL * y.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "geodesic direction {:?} is not tangent at {:?}",
            y.as_slice(),
            x0.coords().as_slice()
        )));
    }
    // Strip the residual radial part so that the result stays on the sphere.
    let y = y - x0.coords() * radial;
    let speed = y.norm();
    if speed == 0.0 {
        return Ok(x0.clone());
    }
    let angle = speed * t;
    let g = x0.coords() * angle.cos() + &y * (angle.sin() / speed);
    let n = g.norm();
    Ok(SurfacePoint::from_unit_unchecked(g / n))
}
