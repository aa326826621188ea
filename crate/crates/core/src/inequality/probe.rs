//! Search for curves that come close to the constant: maximize
//! `Q = λ·‖ẋ‖∞²/(r0·r2)` over a parametric family, each candidate evaluated
//! with the Chebyshev-centred chordal function.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{landau_constant, theorem2_report};
use crate::curves::{Curve, Phase, RotatingFrame, TimeWindow};
use crate::error::{Error, Result};
use crate::geometry::{vec3, AmbientVector};

/// Grid size of the one-period window each candidate is evaluated on.
pub const PROBE_SAMPLES: usize = 2001;
pub const DEFAULT_SEED: u64 = 42;
/// Relative tolerance on `Q ≤ C²`.
pub const PROBE_BOUND_TOL: f64 = 1e-6;
const SIMPLEX_STEP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFamily {
    /// Latitude circles at constant angular speed.
    Latitude,
    /// Great-circle arcs traversed with phase `A sin(ω t)`.
    GreatCircleSinusoidal,
    /// Base point moved by two nested rotating frames.
    Compound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParameter {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub family: ProbeFamily,
    pub budget: usize,
    pub seed: u64,
    pub evaluated: usize,
    /// Candidates whose hypotheses failed or whose evaluation errored.
    pub skipped: usize,
    pub best_q: Option<f64>,
    pub best_sqrt_q: Option<f64>,
    pub best_parameters: Vec<NamedParameter>,
    pub c: f64,
    pub c_squared: f64,
    /// Every evaluated `Q` is at most `C²·(1 + 1e-6)`.
    pub within_bound: bool,
}

fn unit_direction(u: f64, v: f64) -> [f64; 3] {
    let z = 2.0 * u - 1.0;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = TAU * v;
    [r * phi.cos(), r * phi.sin(), z]
}

fn lerp(lo: f64, hi: f64, u: f64) -> f64 {
    lo + (hi - lo) * u
}

impl ProbeFamily {
    /// Number of continuous parameters, each ranging over `[0, 1]`.
    pub fn dimension(self) -> usize {
        match self {
            ProbeFamily::Latitude => 2,
            ProbeFamily::GreatCircleSinusoidal => 5,
            ProbeFamily::Compound => 9,
        }
    }

    /// Number of discrete variants.
    pub fn variants(self) -> usize {
        match self {
            ProbeFamily::Compound => 6,
            _ => 1,
        }
    }

    /// Curve and one-period window for unit-cube parameters `u` and
    /// variant `k`.
    pub fn curve(self, u: &[f64], k: usize) -> Result<(Curve, TimeWindow)> {
        if u.len() != self.dimension() || k >= self.variants() {
            return Err(Error::InvalidInput(format!(
                "{self:?} takes {} parameters and {} variants",
                self.dimension(),
                self.variants()
            )));
        }
        let u: Vec<f64> = u.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let (curve, omega) = match self {
            ProbeFamily::Latitude => {
                let omega = lerp(0.5, 3.0, u[1]);
                (Curve::latitude(lerp(0.05, FRAC_PI_2 - 0.05, u[0]), Phase::linear(omega))?, omega)
            }
            ProbeFamily::GreatCircleSinusoidal => {
                let a = AmbientVector::from_column_slice(&unit_direction(u[0], u[1]));
                let ap = crate::geometry::SurfacePoint::new(a.clone())?;
                let (t1, t2) = ap.tangent_basis();
                let psi = TAU * u[2];
                let b = t1 * psi.cos() + t2 * psi.sin();
                let omega = lerp(0.5, 3.0, u[4]);
                let phase = Phase::Sinusoidal { amplitude: lerp(0.05, 1.5, u[3]), omega, beta: 0.0 };
                (Curve::great_circle(a, b.normalize(), phase)?, omega)
            }
            ProbeFamily::Compound => {
                let omega = lerp(0.5, 2.0, u[8]);
                let multiple = (k % 3 + 1) as f64;
                let drift = if k >= 3 { omega } else { 0.0 };
                let frames = vec![
                    RotatingFrame {
                        axis: unit_direction(u[2], u[3]),
                        phase: Phase::Sinusoidal { amplitude: lerp(0.05, 1.5, u[6]), omega, beta: drift },
                    },
                    RotatingFrame {
                        axis: unit_direction(u[4], u[5]),
                        phase: Phase::Sinusoidal {
                            amplitude: lerp(0.05, 1.5, u[7]),
                            omega: multiple * omega,
                            beta: 0.0,
                        },
                    },
                ];
                let [x, y, z] = unit_direction(u[0], u[1]);
                (Curve::compound(vec3(x, y, z), frames)?, omega)
            }
        };
        Ok((curve, TimeWindow::new(0.0, TAU / omega, PROBE_SAMPLES)?))
    }

    fn describe(self, u: &[f64], k: usize) -> Vec<NamedParameter> {
        let named = |name: &str, value: f64| NamedParameter { name: name.into(), value };
        let u: Vec<f64> = u.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        match self {
            ProbeFamily::Latitude => vec![
                named("colatitude", lerp(0.05, FRAC_PI_2 - 0.05, u[0])),
                named("omega", lerp(0.5, 3.0, u[1])),
            ],
            ProbeFamily::GreatCircleSinusoidal => {
                let a = unit_direction(u[0], u[1]);
                vec![
                    named("a_x", a[0]),
                    named("a_y", a[1]),
                    named("a_z", a[2]),
                    named("b_angle", TAU * u[2]),
                    named("amplitude", lerp(0.05, 1.5, u[3])),
                    named("omega", lerp(0.5, 3.0, u[4])),
                ]
            }
            ProbeFamily::Compound => {
                let mut out = Vec::new();
                for (label, i) in [("base", 0), ("axis1", 2), ("axis2", 4)] {
                    let d = unit_direction(u[i], u[i + 1]);
                    for (c, v) in ["x", "y", "z"].iter().zip(d) {
                        out.push(named(&format!("{label}_{c}"), v));
                    }
                }
                out.push(named("amplitude1", lerp(0.05, 1.5, u[6])));
                out.push(named("amplitude2", lerp(0.05, 1.5, u[7])));
                out.push(named("omega", lerp(0.5, 2.0, u[8])));
                out.push(named("frequency_multiple", (k % 3 + 1) as f64));
                out.push(named("drift", if k >= 3 { 1.0 } else { 0.0 }));
                out
            }
        }
    }

    /// `Q` for one parameter point, `None` when the hypotheses fail.
    pub fn q(self, u: &[f64], k: usize) -> Option<f64> {
        let (curve, window) = self.curve(u, k).ok()?;
        let report = theorem2_report(&curve, &window).ok()?;
        report.bound.q().filter(|q| q.is_finite())
    }
}

/// Minimizes `f` with the Nelder–Mead simplex method, starting from `x0`
/// with an axis-aligned simplex of edge `step`. Stops after `max_evals`
/// evaluations. Returns the best point, its value and the evaluation count.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let counter = Cell::new(0usize);
    let eval = |x: &[f64]| {
        counter.set(counter.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        if simplex.len() >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
    };
    while simplex.len() == n + 1 && counter.get() < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[n].clone();
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = if counter.get() < max_evals { eval(&expanded) } else { f64::INFINITY };
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (toward, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = combine(&centroid, toward, 0.5);
            let fc = if counter.get() < max_evals { eval(&contracted) } else { f64::INFINITY };
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if counter.get() >= max_evals {
                        break;
                    }
                    let x = combine(&best, &entry.0, 0.5);
                    let v = eval(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    let (x, v) = simplex.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty simplex");
    (x, v, counter.get())
}

/// Random search over the family followed by a Nelder–Mead polish of the
/// best candidate. `budget` counts candidate evaluations; the first one is
/// the centre of the parameter box.
pub fn sharpness_probe(family: ProbeFamily, budget: usize, seed: u64) -> Result<ProbeReport> {
    if budget == 0 {
        return Err(Error::InvalidInput("probe budget must be at least 1".into()));
    }
    let k = landau_constant().c;
    let bound = k * k * (1.0 + PROBE_BOUND_TOL);
    let polish = if budget >= 10 { budget / 5 } else { 0 };
    let random = budget - polish;

    let dim = family.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<(Vec<f64>, usize)> = (0..random)
        .map(|i| {
            if i == 0 {
                (vec![0.5; dim], 0)
            } else {
                ((0..dim).map(|_| rng.gen::<f64>()).collect(), rng.gen_range(0..family.variants()))
            }
        })
        .collect();
    let values: Vec<Option<f64>> = candidates.par_iter().map(|(u, v)| family.q(u, *v)).collect();

    let mut evaluated = random;
    let mut skipped = values.iter().filter(|q| q.is_none()).count();
    let mut max_q = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(Vec<f64>, usize, f64)> = None;
    for ((u, v), q) in candidates.iter().zip(&values) {
        if let Some(q) = *q {
            if best.as_ref().map_or(true, |b| q > b.2) {
                best = Some((u.clone(), *v, q));
            }
        }
    }

    if let (Some((u0, variant, _)), true) = (best.clone(), polish > 0) {
        let seen = std::sync::Mutex::new((0usize, f64::NEG_INFINITY));
        let objective = |u: &[f64]| {
            let q = family.q(u, variant);
            let mut s = seen.lock().expect("probe bookkeeping");
            match q {
                Some(q) => {
                    s.1 = s.1.max(q);
                    -q
                }
                None => {
                    s.0 += 1;
                    f64::INFINITY
                }
            }
        };
        let (x, v, evals) = nelder_mead(objective, &u0, SIMPLEX_STEP, polish);
        let (nm_skipped, nm_max) = seen.into_inner().expect("probe bookkeeping");
        evaluated += evals;
        skipped += nm_skipped;
        max_q = max_q.max(nm_max);
        if -v > best.as_ref().map_or(f64::NEG_INFINITY, |b| b.2) {
            let clamped = x.iter().map(|c| c.clamp(0.0, 1.0)).collect();
            best = Some((clamped, variant, -v));
        }
    }

    let best_q = best.as_ref().map(|b| b.2);
    Ok(ProbeReport {
        family,
        budget,
        seed,
        evaluated,
        skipped,
        best_q,
        best_sqrt_q: best_q.map(f64::sqrt),
        best_parameters: best.as_ref().map_or_else(Vec::new, |b| family.describe(&b.0, b.1)),
        c: k,
        c_squared: k * k,
        within_bound: max_q <= bound,
    })
}
