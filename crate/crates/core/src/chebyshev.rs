//! Chebyshev centre of a point cloud on S²: the point `e` minimizing the
//! largest chordal distance `max_i ‖e − p_i‖`, equivalently maximizing
//! `f(e) = min_i ⟨e, p_i⟩`.
//!
//! The solver runs projected supergradient ascent from 16 deterministic
//! starts and then polishes with the minimum-norm point `q*` of the convex
//! hull of the cloud. When the cloud lies in an open hemisphere,
//! `max_{‖e‖=1} min_i ⟨e, p_i⟩ = ‖q*‖` and the maximizer is `q*/‖q*‖`, so the
//! polish both sharpens the ascent result and certifies it.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::golden_max;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, SurfacePoint};

pub const MULTISTARTS: usize = 16;
pub const ASCENT_ITERATIONS: usize = 500;
/// Ascent counts as converged when the best objective over this many
/// trailing iterations improved by less than [`STALL_TOL`].
pub const STALL_WINDOW: usize = 50;
pub const STALL_TOL: f64 = 1e-10;
/// Hull points closer to the origin than this are treated as the origin:
/// no open hemisphere contains the cloud.
const MIN_NORM_FLOOR: f64 = 1e-12;
const WOLFE_MAX_MAJOR: usize = 10_000;
const WOLFE_TOL: f64 = 1e-14;
/// Alternating longitude/latitude golden passes of the oracle's polish.
const ORACLE_REFINE_PASSES: usize = 4;

/// Result of a Chebyshev-centre computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapCenter {
    pub e: [f64; 3],
    /// `max_i ‖e − p_i‖`
    pub minimax_chordal_radius: f64,
    /// `min_i ⟨e, p_i⟩`
    pub min_inner_product: f64,
    pub iterations: usize,
    pub converged: bool,
    pub samples: usize,
    /// Set when no open hemisphere contains the cloud; the maximizer is then
    /// generally not unique.
    pub warning: Option<String>,
}

impl CapCenter {
    pub fn center(&self) -> SurfacePoint {
        SurfacePoint::normalize(&AmbientVector::from_column_slice(&self.e))
            .expect("cap centre is a unit vector")
    }

    fn from_objective(e: Vector3<f64>, points: &[Vector3<f64>]) -> Self {
        let (f, _) = objective(&e, points);
        let radius = points.iter().map(|p| (e - p).norm()).fold(0.0, f64::max);
        let warning = (f <= 0.0).then(|| {
            "points are not contained in an open hemisphere; the centre is not unique".to_string()
        });
        Self {
            e: [e.x, e.y, e.z],
            minimax_chordal_radius: radius,
            min_inner_product: f,
            iterations: 0,
            converged: false,
            samples: points.len(),
            warning,
        }
    }
}

fn to_vec3(p: &SurfacePoint) -> Vector3<f64> {
    let c = p.coords();
    Vector3::new(c[0], c[1], c[2])
}

/// `min_i ⟨x, p_i⟩` and the smallest active index.
fn objective(x: &Vector3<f64>, points: &[Vector3<f64>]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = x.dot(p);
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// Vertices of the unit icosahedron.
fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let vertices = raw.iter().map(|&(x, y, z)| Vector3::new(x, y, z).normalize()).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Vertices of the icosphere with `level` midpoint subdivisions
/// (`10·4^level + 2` of them).
pub fn icosphere(level: u32) -> Vec<Vector3<f64>> {
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push((vertices[a] + vertices[b]).normalize());
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    vertices
}

fn starts(points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let mean: Vector3<f64> = points.iter().sum();
    let mean_dir = if mean.norm() > MIN_NORM_FLOOR { mean.normalize() } else { points[0] };
    let (_, central) = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.dot(&mean_dir), i))
        .fold((f64::NEG_INFINITY, 0), |acc, (d, i)| if d > acc.0 { (d, i) } else { acc });
    let mut s = vec![mean_dir, points[0], points[points.len() - 1], points[central]];
    s.extend(icosahedron().0);
    debug_assert_eq!(s.len(), MULTISTARTS);
    s
}

struct Ascent {
    best: Vector3<f64>,
    best_value: f64,
    converged: bool,
}

/// Projected supergradient ascent with steps `0.5/√k`.
fn ascend(start: Vector3<f64>, points: &[Vector3<f64>]) -> Ascent {
    let mut x = start;
    let (mut fx, mut active) = objective(&x, points);
    let (mut best, mut best_value) = (x, fx);
    let mut history = Vec::with_capacity(ASCENT_ITERATIONS);
    for k in 1..=ASCENT_ITERATIONS {
        let step = 0.5 / (k as f64).sqrt();
        let moved = x + points[active] * step;
        let n = moved.norm();
        if n == 0.0 {
            break;
        }
        x = moved / n;
        (fx, active) = objective(&x, points);
        if fx > best_value {
            best_value = fx;
            best = x;
        }
        history.push(best_value);
    }
    let converged = history.len() > STALL_WINDOW
        && history[history.len() - 1] - history[history.len() - 1 - STALL_WINDOW] < STALL_TOL;
    Ascent { best, best_value, converged }
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
///
/// Returns the point and whether the optimality test passed.
fn min_norm_point(points: &[Vector3<f64>]) -> (Vector3<f64>, usize, bool) {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1.0);
    let first = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .unwrap_or(0);
    let mut corral = vec![first];
    let mut weights = vec![1.0];
    let mut x = points[first];
    for major in 1..=WOLFE_MAX_MAJOR {
        let (value, j) = objective(&x, points);
        if x.norm_squared() - value <= WOLFE_TOL * scale {
            return (x, major, true);
        }
        if corral.contains(&j) {
            return (x, major, false);
        }
        corral.push(j);
        weights.push(0.0);
        loop {
            let Some(lambda) = affine_min_norm(points, &corral) else {
                return (x, major, false);
            };
            if lambda.iter().all(|&l| l > 1e-15) {
                weights = lambda;
                break;
            }
            // Step from the current weights towards the affine minimizer
            // until the first weight hits zero.
            let theta = weights
                .iter()
                .zip(&lambda)
                .filter(|(_, &l)| l <= 1e-15)
                .map(|(&w, &l)| if w - l > 0.0 { w / (w - l) } else { 0.0 })
                .fold(1.0, f64::min);
            for (w, l) in weights.iter_mut().zip(&lambda) {
                *w = theta * l + (1.0 - theta) * *w;
            }
            let mut k = 0;
            while k < corral.len() {
                if weights[k] <= 1e-15 {
                    corral.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if corral.len() <= 1 {
                break;
            }
        }
        x = corral.iter().zip(&weights).map(|(&i, &w)| points[i] * w).sum();
    }
    (x, WOLFE_MAX_MAJOR, false)
}

/// Barycentric weights of the minimum-norm point of the affine hull of the
/// corral points.
fn affine_min_norm(points: &[Vector3<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let m = corral.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[(r, c)] = points[i].dot(&points[j]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    let mut b = DVector::zeros(m + 1);
    b[m] = 1.0;
    let sol = a.clone().lu().solve(&b).or_else(|| a.svd(true, true).solve(&b, 1e-14).ok())?;
    let lambda: Vec<f64> = sol.iter().take(m).copied().collect();
    lambda.iter().all(|l| l.is_finite()).then_some(lambda)
}

fn validate(points: &[SurfacePoint]) -> Result<Vec<Vector3<f64>>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("Chebyshev centre of an empty point set".into()));
    }
    Ok(points.iter().map(to_vec3).collect())
}

/// Chebyshev centre of `points` by multistart supergradient ascent followed
/// by the minimum-norm-point polish.
pub fn chebyshev_center(points: &[SurfacePoint]) -> Result<CapCenter> {
    let pts = validate(points)?;
    let runs: Vec<Ascent> = starts(&pts).into_par_iter().map(|s| ascend(s, &pts)).collect();
    // Earliest start wins ties.
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.best_value > best.best_value {
            best = run;
        }
    }
    let mut e = best.best;
    let value = best.best_value;
    let mut converged = best.converged;
    let mut iterations = ASCENT_ITERATIONS;

    let (q, major, certified) = min_norm_point(&pts);
    iterations += major;
    if q.norm() > MIN_NORM_FLOOR {
        let candidate = q.normalize();
        let (fc, _) = objective(&candidate, &pts);
        if fc >= value {
            e = candidate;
            converged |= certified;
        }
    }

    let mut cap = CapCenter::from_objective(e, &pts);
    cap.iterations = iterations;
    cap.converged = converged;
    if q.norm() <= MIN_NORM_FLOOR && cap.warning.is_none() {
        cap.warning = Some("the origin lies in the convex hull of the points; the centre is not unique".into());
    }
    Ok(cap)
}

/// Brute-force Chebyshev centre: exhaustive scan of an icosphere of the
/// given subdivision level, then alternating golden-section passes in a
/// longitude/latitude chart centred on the best vertex.
pub fn chebyshev_grid_oracle(points: &[SurfacePoint], subdivisions: u32) -> Result<CapCenter> {
    let pts = validate(points)?;
    let grid = icosphere(subdivisions);
    let values: Vec<f64> = grid.par_iter().map(|v| objective(v, &pts).0).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let vertex = grid[best];
    let p = SurfacePoint::normalize(&AmbientVector::from_column_slice(vertex.as_slice()))?;
    let (u1, u2) = p.tangent_basis();
    let (u1, u2) = (Vector3::new(u1[0], u1[1], u1[2]), Vector3::new(u2[0], u2[1], u2[2]));
    let chart = |lon: f64, lat: f64| (vertex * lon.cos() + u1 * lon.sin()) * lat.cos() + u2 * lat.sin();

    // Icosahedron edges subtend ~1.107 rad and halve with each level.
    let reach = 1.5 * 1.1071487 / 2f64.powi(subdivisions as i32);
    let (mut lon, mut lat) = (0.0, 0.0);
    let mut value = values[best];
    for _ in 0..ORACLE_REFINE_PASSES {
        let along_lon = |l: f64| Ok(objective(&chart(l, lat), &pts).0);
        let (l, v, _) = golden_max(&along_lon, -reach, reach)?;
        if v > value {
            value = v;
            lon = l;
        }
        let along_lat = |b: f64| Ok(objective(&chart(lon, b), &pts).0);
        let (b, v, _) = golden_max(&along_lat, -reach, reach)?;
        if v > value {
            value = v;
            lat = b;
        }
    }
    let mut cap = CapCenter::from_objective(chart(lon, lat).normalize(), &pts);
    cap.iterations = grid.len();
    cap.converged = true;
    Ok(cap)
}
