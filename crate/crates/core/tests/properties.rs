use std::f64::consts::{PI, TAU};

use manifold_landau::auxfun::AuxFunction;
use manifold_landau::chebyshev::chebyshev_center;
use manifold_landau::curves::{sup_norm, Curve, Phase, Quantity, RotatingFrame, SampledCurve, TimeWindow};
use manifold_landau::geometry::{self, vec3, AmbientVector, Manifold, SurfacePoint};
use manifold_landau::inequality::{landau_constant, theorem1_report, theorem2_report};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = SurfacePoint> {
    (-1.0..1.0f64, 0.0..TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SurfacePoint::normalize(&vec3(r * phi.cos(), r * phi.sin(), z)).unwrap()
    })
}

/// Points within `radius < π/2` of a random pole, so an open hemisphere contains them.
fn cap_cloud() -> impl Strategy<Value = Vec<SurfacePoint>> {
    (unit(), 0.05..1.5f64, prop::collection::vec((0.0..1.0f64, 0.0..TAU), 1..30)).prop_map(|(pole, radius, raw)| {
        let (u1, u2) = pole.tangent_basis();
        raw.into_iter()
            .map(|(s, a)| {
                let r = radius * s.sqrt();
                let dir = &u1 * a.cos() + &u2 * a.sin();
                SurfacePoint::normalize(&(pole.coords() * r.cos() + dir * r.sin())).unwrap()
            })
            .collect()
    })
}

fn tangent(x: &SurfacePoint, angle: f64, len: f64) -> AmbientVector {
    let (u1, u2) = x.tangent_basis();
    (u1 * angle.cos() + u2 * angle.sin()) * len
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_tangent_and_idempotent(x in unit(), v in prop::array::uniform3(-5.0..5.0f64)) {
        let v = vec3(v[0], v[1], v[2]);
        let p = geometry::project_tangent(&x, &v).unwrap();
        prop_assert!(x.dot(&p.vec).abs() <= 1e-12 * v.norm().max(1.0));
        let again = geometry::project_tangent(&x, &p.vec).unwrap();
        prop_assert!((&again.vec - &p.vec).norm() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn geodesics_stay_on_sphere_at_constant_speed(
        x in unit(), angle in 0.0..TAU, speed in 0.01..3.0f64, t in -10.0..10.0f64,
    ) {
        let y = tangent(&x, angle, speed);
        let g = geometry::geodesic(&x, &y, t).unwrap();
        prop_assert!((g.coords().norm() - 1.0).abs() <= 1e-12);
        // Great-circle distance from the start is |t|·‖y‖ modulo 2π.
        let expected = (speed * t).cos();
        prop_assert!((x.dot(g.coords()) - expected).abs() <= 1e-9);
    }

    #[test]
    fn hessian_form_is_quadratic_in_direction(
        e in unit(), x in unit(), angle in 0.0..TAU, len in 0.1..3.0f64, scale in 0.1..4.0f64,
    ) {
        prop_assume!(e.dot(x.coords()) > -0.9);
        let y = tangent(&x, angle, len);
        let ys = &y * scale;
        let chordal = AuxFunction::chordal(e.clone());
        let q = chordal.hessian_quadratic(x.coords(), &y).unwrap();
        let qs = chordal.hessian_quadratic(x.coords(), &ys).unwrap();
        prop_assert!((qs - scale * scale * q).abs() <= 1e-12 * (1.0 + qs.abs()));

        let intrinsic = AuxFunction::intrinsic(e);
        let q = intrinsic.hessian_quadratic(x.coords(), &y).unwrap();
        let qs = intrinsic.hessian_quadratic(x.coords(), &ys).unwrap();
        prop_assert!((qs - scale * scale * q).abs() <= 1e-5 * (1.0 + qs.abs()), "{} vs {}", qs, scale * scale * q);
    }

    #[test]
    fn refining_the_grid_never_lowers_the_sup(
        colat in 0.1..3.0f64, amp in 0.1..2.0f64, omega in 0.3..3.0f64, n in 21usize..400,
    ) {
        let curve = Curve::latitude(colat, Phase::Sinusoidal { amplitude: amp, omega, beta: 0.0 }).unwrap();
        let coarse = TimeWindow::new(-3.0, 4.0, n).unwrap();
        let fine = coarse.refined();
        for accel in [false, true] {
            let q = || if accel { Quantity::CovariantAccelNorm } else { Quantity::Speed };
            let a = sup_norm(&curve, &coarse, q()).unwrap();
            let b = sup_norm(&curve, &fine, q()).unwrap();
            prop_assert!(b.grid_value >= a.grid_value);
            prop_assert!(a.value >= a.grid_value && b.value >= b.grid_value);
        }
    }

    #[test]
    fn chebyshev_is_rotation_equivariant(
        pts in cap_cloud(),
        axis in unit(), angle in 0.0..TAU,
    ) {
        let c = chebyshev_center(&pts).unwrap();
        let a = axis.to_array();
        let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::from(a)), angle);
        let rotated: Vec<SurfacePoint> = pts
            .iter()
            .map(|p| {
                let v = rot * Vector3::from(p.to_array());
                SurfacePoint::normalize(&vec3(v.x, v.y, v.z)).unwrap()
            })
            .collect();
        let r = chebyshev_center(&rotated).unwrap();
        prop_assert!((c.min_inner_product - r.min_inner_product).abs() <= 1e-9);
        // The objective dominates every input point used as a candidate.
        for p in &pts {
            let f = pts.iter().map(|q| p.dot(q.coords())).fold(f64::INFINITY, f64::min);
            prop_assert!(c.min_inner_product >= f - 1e-12);
        }
        prop_assert!((c.minimax_chordal_radius.powi(2) - (2.0 - 2.0 * c.min_inner_product)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_holds_whenever_hypotheses_hold(
        x0 in unit(), angle in 0.0..TAU, amp in 0.05..1.5f64, omega in 0.5..3.0f64,
        colat in 0.05..1.5f64, lat_omega in 0.5..3.0f64,
    ) {
        let b = tangent(&x0, angle, 1.0);
        let gc = Curve::great_circle(x0.into_coords(), b, Phase::Sinusoidal { amplitude: amp, omega, beta: 0.0 }).unwrap();
        let lat = Curve::latitude(colat, Phase::linear(lat_omega)).unwrap();
        for curve in [gc, lat] {
            let window = TimeWindow { samples: 1001, ..curve.default_window() };
            let r = theorem2_report(&curve, &window).unwrap();
            if r.bound.hypotheses_ok {
                prop_assert!(r.bound.lhs <= r.bound.rhs.unwrap() * (1.0 + 1e-6));
                prop_assert!(r.bound.satisfied);
            }
        }
    }

    #[test]
    fn explicit_center_reports_match_chebyshev_path(colat in 0.1..1.4f64, omega in 0.5..2.5f64) {
        let curve = Curve::latitude(colat, Phase::linear(omega)).unwrap();
        let window = TimeWindow { samples: 801, ..curve.default_window() };
        let pole = SurfacePoint::from_xyz(0.0, 0.0, 1.0).unwrap();
        let explicit = theorem1_report(&curve, &AuxFunction::chordal(pole), &window).unwrap();
        let cheb = theorem2_report(&curve, &window).unwrap();
        prop_assert!((explicit.lhs - cheb.bound.lhs).abs() <= 1e-12);
        prop_assert!((explicit.lambda.value - cheb.bound.lambda.value).abs() <= 1e-9);
    }
}

#[test]
fn constant_is_deterministic() {
    assert_eq!(landau_constant(), landau_constant());
    assert!((landau_constant().c - 2.0 * (PI / 9.0).cos()).abs() <= 1e-12);
}

#[test]
fn refined_windows_share_nodes() {
    let w = TimeWindow::new(-1.3, 2.9, 17).unwrap();
    let r = w.refined();
    for i in 0..w.samples {
        assert_eq!(w.time(i), r.time(2 * i));
    }
}

/// Sampled derivatives at interior nodes converge at fourth order.
#[test]
fn sampled_interior_convergence_order() {
    let curve = Curve::compound(
        vec3(0.0, 0.6, 0.8),
        vec![
            RotatingFrame { axis: [0.0, 0.0, 1.0], phase: Phase::Sinusoidal { amplitude: 0.7, omega: 1.3, beta: 0.4 } },
            RotatingFrame { axis: [1.0, 0.0, 0.0], phase: Phase::linear(0.9) },
        ],
    )
    .unwrap();
    let (t0, t1) = (0.0, 2.0);
    // Errors at the common node t = 1.
    let errors = |n: usize| {
        let step = (t1 - t0) / (n - 1) as f64;
        let points = (0..n).map(|i| curve.eval(t0 + step * i as f64).unwrap().x).collect();
        let s = SampledCurve::new(Manifold::Sphere2, t0, step, points).unwrap();
        let (_, v, a) = s.eval(1.0).unwrap();
        let exact = curve.eval(1.0).unwrap();
        let acc_exact = Manifold::Sphere2.covariant_accel(&exact.x, &exact.xdot, &exact.xddot).unwrap();
        let acc = Manifold::Sphere2.covariant_accel(&exact.x, &v, &a).unwrap();
        ((v - exact.xdot).norm(), (acc - acc_exact).norm())
    };
    let (v1, a1) = errors(41);
    let (v2, a2) = errors(81);
    let order_v = (v1 / v2).log2();
    let order_a = (a1 / a2).log2();
    assert!(order_v >= 3.5, "velocity order {order_v} ({v1:e} → {v2:e})");
    assert!(order_a >= 3.5, "acceleration order {order_a} ({a1:e} → {a2:e})");
}
