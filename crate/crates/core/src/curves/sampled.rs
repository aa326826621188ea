use std::io::Read;

use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, Manifold, RENORMALIZE_TOL};

/// Minimum number of samples for the derivative stencils.
pub const MIN_SAMPLED_POINTS: usize = 5;
/// Allowed relative deviation of each time step from the mean step.
pub const GRID_JITTER_TOL: f64 = 1e-9;
/// Offsets (in units of the step) below which `t` is treated as a node.
const NODE_SNAP: f64 = 1e-9;

/// A curve known only on a uniform time grid. Derivatives come from finite
/// differences on the grid itself: 4th-order central stencils in the
/// interior, 2nd-order central next to the ends and 2nd-order one-sided at
/// the ends. Between nodes, values are interpolated linearly and pulled back
/// onto the manifold, which is only O(h²) accurate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    manifold: Manifold,
    t0: f64,
    step: f64,
    points: Vec<AmbientVector>,
    velocities: Vec<AmbientVector>,
    accelerations: Vec<AmbientVector>,
}

impl SampledCurve {
    /// Builds a curve from points at times `t0 + i·step`.
    pub fn new(manifold: Manifold, t0: f64, step: f64, points: Vec<AmbientVector>) -> Result<Self> {
        if points.len() < MIN_SAMPLED_POINTS {
            return Err(Error::TooFewPoints { found: points.len(), required: MIN_SAMPLED_POINTS });
        }
        if !(step > 0.0 && step.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidCurve(format!("invalid time grid t0 = {t0}, step = {step}")));
        }
        let dim = manifold.ambient_dim();
        let mut normalized = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            if p.len() != dim || !p.iter().all(|c| c.is_finite()) {
                return Err(Error::Ingestion {
                    row: i + 1,
                    reason: format!("expected {dim} finite coordinates, got {:?}", p.as_slice()),
                });
            }
            if manifold == Manifold::Sphere2 {
                let n = p.norm();
                if (n - 1.0).abs() > RENORMALIZE_TOL {
                    return Err(Error::Ingestion {
                        row: i + 1,
                        reason: format!("point is off the unit sphere (norm {n})"),
                    });
                }
                normalized.push(p / n);
            } else {
                normalized.push(p);
            }
        }
        let velocities = (0..normalized.len())
            .map(|i| {
                let v = first_derivative(&normalized, i, step);
                manifold.project_tangent(&normalized[i], &v)
            })
            .collect();
        let accelerations = (0..normalized.len())
            .map(|i| second_derivative(&normalized, i, step))
            .collect();
        Ok(Self { manifold, t0, step, points: normalized, velocities, accelerations })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_min(&self) -> f64 {
        self.t0
    }

    pub fn t_max(&self) -> f64 {
        self.t0 + self.step * (self.points.len() - 1) as f64
    }

    pub fn points(&self) -> &[AmbientVector] {
        &self.points
    }

    /// `(x, ẋ, ẍ)` at `t`.
    pub fn eval(&self, t: f64) -> Result<(AmbientVector, AmbientVector, AmbientVector)> {
        let (t_min, t_max) = (self.t_min(), self.t_max());
        let pos = (t - self.t0) / self.step;
        let last = (self.points.len() - 1) as f64;
        if !t.is_finite() || pos < -NODE_SNAP || pos > last + NODE_SNAP {
            return Err(Error::OutOfDomain { t, t_min, t_max });
        }
        let pos = pos.clamp(0.0, last);
        let nearest = pos.round();
        if (pos - nearest).abs() <= NODE_SNAP {
            let i = nearest as usize;
            return Ok((
                self.points[i].clone(),
                self.velocities[i].clone(),
                self.accelerations[i].clone(),
            ));
        }
        let i = pos.floor() as usize;
        let w = pos - i as f64;
        let lerp = |v: &[AmbientVector]| &v[i] * (1.0 - w) + &v[i + 1] * w;
        let mut x = lerp(&self.points);
        if self.manifold == Manifold::Sphere2 {
            x /= x.norm();
        }
        let xdot = self.manifold.project_tangent(&x, &lerp(&self.velocities));
        Ok((x, xdot, lerp(&self.accelerations)))
    }
}

fn first_derivative(f: &[AmbientVector], i: usize, h: f64) -> AmbientVector {
    let n = f.len();
    if i >= 2 && i + 2 < n {
        (&f[i - 2] - &f[i - 1] * 8.0 + &f[i + 1] * 8.0 - &f[i + 2]) / (12.0 * h)
    } else if i >= 1 && i + 1 < n {
        (&f[i + 1] - &f[i - 1]) / (2.0 * h)
    } else if i == 0 {
        (&f[0] * -3.0 + &f[1] * 4.0 - &f[2]) / (2.0 * h)
    } else {
        (&f[i] * 3.0 - &f[i - 1] * 4.0 + &f[i - 2]) / (2.0 * h)
    }
}

fn second_derivative(f: &[AmbientVector], i: usize, h: f64) -> AmbientVector {
    let n = f.len();
    let h2 = h * h;
    if i >= 2 && i + 2 < n {
        (-&f[i - 2] + &f[i - 1] * 16.0 - &f[i] * 30.0 + &f[i + 1] * 16.0 - &f[i + 2]) / (12.0 * h2)
    } else if i >= 1 && i + 1 < n {
        (&f[i + 1] - &f[i] * 2.0 + &f[i - 1]) / h2
    } else if i == 0 {
        (&f[0] * 2.0 - &f[1] * 5.0 + &f[2] * 4.0 - &f[3]) / h2
    } else {
        (&f[i] * 2.0 - &f[i - 1] * 5.0 + &f[i - 2] * 4.0 - &f[i - 3]) / h2
    }
}

/// Validates `(t, x, y, z)` rows as a uniformly sampled curve on S².
///
/// Row numbers in errors are 1-based data rows.
pub fn load_sampled(rows: &[[f64; 4]]) -> Result<SampledCurve> {
    if rows.len() < MIN_SAMPLED_POINTS {
        return Err(Error::TooFewPoints { found: rows.len(), required: MIN_SAMPLED_POINTS });
    }
    for (i, r) in rows.iter().enumerate() {
        if !r.iter().all(|c| c.is_finite()) {
            return Err(Error::Ingestion { row: i + 1, reason: "non-finite value".into() });
        }
    }
    let t0 = rows[0][0];
    let step = (rows[rows.len() - 1][0] - t0) / (rows.len() - 1) as f64;
    for (i, pair) in rows.windows(2).enumerate() {
        let dt = pair[1][0] - pair[0][0];
        if dt <= 0.0 {
            return Err(Error::Ingestion {
                row: i + 2,
                reason: format!("time {} does not increase", pair[1][0]),
            });
        }
        if (dt - step).abs() > GRID_JITTER_TOL * step {
            return Err(Error::Ingestion {
                row: i + 2,
                reason: format!("time step {dt} deviates from the uniform step {step}"),
            });
        }
    }
    let points = rows
        .iter()
        .map(|r| AmbientVector::from_column_slice(&r[1..]))
        .collect();
    SampledCurve::new(Manifold::Sphere2, t0, step, points)
}

/// Reads the `t,x,y,z` CSV format and hands the rows to [`load_sampled`].
pub fn read_sampled_csv<R: Read>(reader: R) -> Result<SampledCurve> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Ingestion { row: 0, reason: format!("unreadable header: {e}") })?
        .clone();
    let expected = ["t", "x", "y", "z"];
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Ingestion {
            row: 0,
            reason: format!("expected header `t,x,y,z`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record =
            record.map_err(|e| Error::Ingestion { row: i + 1, reason: e.to_string() })?;
        let mut row = [0.0; 4];
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = field.parse().map_err(|_| Error::Ingestion {
                row: i + 1,
                reason: format!("`{field}` is not a decimal number"),
            })?;
        }
        if record.len() != 4 {
            return Err(Error::Ingestion { row: i + 1, reason: "expected 4 fields".into() });
        }
        rows.push(row);
    }
    load_sampled(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn great_circle_rows(t0: f64, h: f64, n: usize) -> Vec<[f64; 4]> {
        (0..n)
            .map(|i| {
                let t = t0 + h * i as f64;
                [t, t.cos(), t.sin(), 0.0]
            })
            .collect()
    }

    #[test]
    fn accepts_great_circle_and_matches_analytic() {
        let c = load_sampled(&great_circle_rows(0.0, 0.01, 101)).unwrap();
        // 4th-order stencils away from the ends, 2nd-order next to them.
        for (t, tol) in [(0.0, 1e-4), (0.01, 1e-4), (0.02, 1e-6), (0.5, 1e-6), (0.98, 1e-6), (1.0, 1e-4)] {
            let (x, v, _) = c.eval(t).unwrap();
            assert!((x[0] - t.cos()).abs() < 1e-12);
            assert!((v[0] + t.sin()).abs() < tol && (v[1] - t.cos()).abs() < tol, "t = {t}");
        }
    }

    #[test]
    fn stencil_accuracy_at_interior_node() {
        let c = load_sampled(&great_circle_rows(-1.0, 0.01, 201)).unwrap();
        let (_, v, a) = c.eval(0.0).unwrap();
        assert!((v[0]).abs() < 1e-7 && (v[1] - 1.0).abs() < 1e-7);
        assert!((a[0] + 1.0).abs() < 1e-6 && a[1].abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let rows = great_circle_rows(0.0, 0.1, 4);
        assert_eq!(
            load_sampled(&rows).unwrap_err(),
            Error::TooFewPoints { found: 4, required: 5 }
        );

        let mut rows = great_circle_rows(0.0, 0.1, 10);
        rows[6][1] *= 1.01;
        rows[6][2] *= 1.01;
        assert!(matches!(load_sampled(&rows).unwrap_err(), Error::Ingestion { row: 7, .. }));

        let mut rows = great_circle_rows(0.0, 0.1, 10);
        rows[3][0] += 1e-4;
        assert!(matches!(load_sampled(&rows).unwrap_err(), Error::Ingestion { row: 4, .. }));

        let mut rows = great_circle_rows(0.0, 0.1, 10);
        rows.swap(2, 3);
        assert!(matches!(load_sampled(&rows).unwrap_err(), Error::Ingestion { row: 3, .. }));
    }

    #[test]
    fn out_of_domain() {
        let c = load_sampled(&great_circle_rows(0.0, 0.1, 11)).unwrap();
        assert!(matches!(c.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(c.eval(-0.01), Err(Error::OutOfDomain { .. })));
        assert!(c.eval(1.0).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let mut text = String::from("t,x,y,z\n");
        for r in great_circle_rows(0.0, 0.05, 21) {
            text.push_str(&format!("{},{},{},{}\n", r[0], r[1], r[2], r[3]));
        }
        let c = read_sampled_csv(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 21);
        let bad = "t,x,y\n0,1,0\n";
        assert!(matches!(read_sampled_csv(bad.as_bytes()), Err(Error::Ingestion { row: 0, .. })));
        let bad = "t,x,y,z\n0,1,0,zero\n";
        assert!(matches!(read_sampled_csv(bad.as_bytes()), Err(Error::Ingestion { row: 1, .. })));
    }
}
