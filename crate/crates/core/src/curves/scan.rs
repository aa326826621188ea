//! Sup-norm estimation over a finite time window: uniform grid scan with a
//! golden-section polish around the best grid points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_T_MIN: f64 = -20.0;
pub const DEFAULT_T_MAX: f64 = 20.0;
pub const DEFAULT_SAMPLES: usize = 40_001;

/// Number of grid maxima that get a local golden-section polish.
const REFINE_CANDIDATES: usize = 3;
const GOLDEN_MAX_ITER: usize = 200;
/// Relative bracket width below which the golden search counts as converged.
const REFINE_REL_TOL: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Finite stand-in for the real line when taking suprema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { t_min: DEFAULT_T_MIN, t_max: DEFAULT_T_MAX, samples: DEFAULT_SAMPLES }
    }
}

impl TimeWindow {
    pub fn new(t_min: f64, t_max: f64, samples: usize) -> Result<Self> {
        let w = Self { t_min, t_max, samples };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Error::InvalidInput("window bounds must be finite".into()));
        }
        if self.t_min >= self.t_max {
            return Err(Error::InvalidInput(format!(
                "window requires t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.samples < 3 {
            return Err(Error::InvalidInput(format!(
                "window needs at least 3 samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_max - self.t_min) / (self.samples - 1) as f64
    }

    /// Time of grid node `i`. Nodes of a window are reproduced bit-for-bit
    /// by [`TimeWindow::refined`], which keeps grid maxima monotone.
    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            return self.t_max;
        }
        let frac = i as f64 / (self.samples - 1) as f64;
        self.t_min + (self.t_max - self.t_min) * frac
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples).map(|i| self.time(i))
    }

    /// Same window with every grid interval halved.
    pub fn refined(&self) -> Self {
        Self { samples: 2 * self.samples - 1, ..*self }
    }
}

/// Estimated supremum of a scalar function over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax_t: f64,
    /// Largest value seen on the uniform grid, before refinement.
    pub grid_value: f64,
    pub grid_step: f64,
    /// `value − grid_value`; how much the local polish added.
    pub refinement_gain: f64,
    /// The golden-section polish of the winning candidate converged.
    pub refined: bool,
}

/// Evaluates `f` on the grid in parallel. The first failing node (in time
/// order) determines the error, independent of scheduling.
pub(crate) fn grid_values<F>(window: &TimeWindow, f: &F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let raw: Vec<Result<f64>> = (0..window.samples)
        .into_par_iter()
        .map(|i| {
            let t = window.time(i);
            f(t).and_then(|v| if v.is_nan() { Err(Error::NumericFailure { t }) } else { Ok(v) })
        })
        .collect();
    raw.into_iter().collect()
}

/// Maximum of `f` over the window.
pub fn maximize<F>(window: &TimeWindow, f: F) -> Result<SupEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    window.validate()?;
    let values = grid_values(window, &f)?;

    // Descending by value; ties keep the smallest t first.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let best = order[0];
    let grid_value = values[best];

    let mut value = grid_value;
    let mut argmax_t = window.time(best);
    let mut refined = true;
    for &i in order.iter().take(REFINE_CANDIDATES) {
        let lo = window.time(i.saturating_sub(1));
        let hi = window.time((i + 1).min(window.samples - 1));
        let (t, v, converged) = golden_max(&f, lo, hi)?;
        if v > value {
            value = v;
            argmax_t = t;
            refined = converged;
        }
    }

    Ok(SupEstimate {
        value,
        argmax_t,
        grid_value,
        grid_step: window.step(),
        refinement_gain: value - grid_value,
        refined,
    })
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns `(t, f(t), converged)`.
pub(crate) fn golden_max<F>(f: &F, mut lo: f64, mut hi: f64) -> Result<(f64, f64, bool)>
where
    F: Fn(f64) -> Result<f64>,
{
    let eval = |t: f64| -> Result<f64> {
        let v = f(t)?;
        if v.is_nan() {
            Err(Error::NumericFailure { t })
        } else {
            Ok(v)
        }
    };
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = eval(a)?;
    let mut fb = eval(b)?;
    let mut best = if fa >= fb { (a, fa) } else { (b, fb) };
    let mut converged = false;
    for _ in 0..GOLDEN_MAX_ITER {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = eval(b)?;
        }
        if fa > best.1 {
            best = (a, fa);
        }
        if fb > best.1 {
            best = (b, fb);
        }
        if hi - lo <= REFINE_REL_TOL * hi.abs().max(lo.abs()).max(1.0) {
            converged = true;
            break;
        }
    }
    Ok((best.0, best.1, converged))
}
