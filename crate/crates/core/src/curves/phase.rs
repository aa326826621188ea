use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Angle-valued time reparametrization driving the analytic families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Phase {
    /// `ω t + φ`
    Linear { omega: f64, phi: f64 },
    /// `α t²/2 + ω t`
    Quadratic { alpha: f64, omega: f64 },
    /// `A sin(ω t) + β t`
    Sinusoidal { amplitude: f64, omega: f64, beta: f64 },
}

/// How a phase behaves modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseRegularity {
    Constant,
    Periodic(f64),
    Aperiodic,
}

/// Largest multiplier tried when searching for a common period.
const MAX_PERIOD_MULTIPLE: u32 = 64;
const PERIOD_RATIO_TOL: f64 = 1e-9;

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= PERIOD_RATIO_TOL * x.abs().max(1.0)
}

impl Phase {
    pub fn linear(omega: f64) -> Self {
        Phase::Linear { omega, phi: 0.0 }
    }

    /// `(θ, θ̇, θ̈)` at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Phase::Linear { omega, phi } => (omega * t + phi, omega, 0.0),
            Phase::Quadratic { alpha, omega } => {
                (0.5 * alpha * t * t + omega * t, alpha * t + omega, alpha)
            }
            Phase::Sinusoidal { amplitude, omega, beta } => {
                let (s, c) = (omega * t).sin_cos();
                (
                    amplitude * s + beta * t,
                    amplitude * omega * c + beta,
                    -amplitude * omega * omega * s,
                )
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Phase::Linear { omega, phi } => omega.is_finite() && phi.is_finite(),
            Phase::Quadratic { alpha, omega } => alpha.is_finite() && omega.is_finite(),
            Phase::Sinusoidal { amplitude, omega, beta } => {
                amplitude.is_finite() && omega.is_finite() && beta.is_finite()
            }
        }
    }

    /// Period of `t ↦ θ(t) mod 2π`, when one exists.
    pub fn regularity(&self) -> PhaseRegularity {
        let drift = |rate: f64| {
            if rate == 0.0 {
                PhaseRegularity::Constant
            } else {
                PhaseRegularity::Periodic(TAU / rate.abs())
            }
        };
        match *self {
            Phase::Linear { omega, .. } => drift(omega),
            Phase::Quadratic { alpha, omega } => {
                if alpha == 0.0 {
                    drift(omega)
                } else {
                    PhaseRegularity::Aperiodic
                }
            }
            Phase::Sinusoidal { amplitude, omega, beta } => {
                if amplitude == 0.0 || omega == 0.0 {
                    return drift(beta);
                }
                let base = TAU / omega.abs();
                // θ(t + nT) = θ(t) + β n T, a multiple of 2π iff n β/|ω| ∈ ℤ.
                let ratio = beta / omega.abs();
                (1..=MAX_PERIOD_MULTIPLE)
                    .find(|&n| near_integer(f64::from(n) * ratio))
                    .map_or(PhaseRegularity::Aperiodic, |n| {
                        PhaseRegularity::Periodic(f64::from(n) * base)
                    })
            }
        }
    }
}

/// Smallest common period of several regularities, if any.
pub(crate) fn common_period<I>(parts: I) -> PhaseRegularity
where
    I: IntoIterator<Item = PhaseRegularity>,
{
    let mut periods = Vec::new();
    for part in parts {
        match part {
            PhaseRegularity::Constant => {}
            PhaseRegularity::Periodic(p) => periods.push(p),
            PhaseRegularity::Aperiodic => return PhaseRegularity::Aperiodic,
        }
    }
    let Some(longest) = periods.iter().copied().reduce(f64::max) else {
        return PhaseRegularity::Constant;
    };
    (1..=MAX_PERIOD_MULTIPLE)
        .map(|n| f64::from(n) * longest)
        .find(|candidate| periods.iter().all(|p| near_integer(candidate / p)))
        .map_or(PhaseRegularity::Aperiodic, PhaseRegularity::Periodic)
}
