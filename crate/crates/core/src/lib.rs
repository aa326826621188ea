//! Numerical instantiation of a Landau–Hadamard type inequality for curves
//! on Riemannian manifolds, specialised to the unit sphere S² and ℝᵈ.
//!
//! For a curve `x: ℝ → M` and an auxiliary function `U` whose Hessian is
//! bounded below by `λ > 0` along the curve,
//!
//! ```text
//! ‖ẋ‖∞² ≤ C²/λ · ‖∇U∘x‖∞ · ‖∇_ẋ ẋ‖∞,     C³ − 3C − 1 = 0, C = 2cos(π/9).
//! ```
//!
//! The crate evaluates every quantity in this bound over a finite time
//! window, chooses the auxiliary centre on S² as the Chebyshev centre of the
//! curve, and checks the intermediate estimates the bound rests on.

pub mod auxfun;
pub mod cli;
pub mod chebyshev;
pub mod curves;
pub mod error;
pub mod geometry;
pub mod inequality;

pub use error::{Error, Result};
