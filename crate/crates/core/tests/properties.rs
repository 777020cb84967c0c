use std::f64::consts::TAU;

use mangoldt::asymptotics::{busemann_value, MeridianRay};
use mangoldt::geodesic::{distance, integrate, GeodesicState, PolarPoint, DEFAULT_TOL};
use mangoldt::{Builtin, ProfileModel};
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = ProfileModel> {
    prop::sample::select(Builtin::ALL.to_vec()).prop_map(ProfileModel::builtin)
}

fn point(lo: f64, hi: f64) -> impl Strategy<Value = PolarPoint<f64>> {
    (lo..hi, 0.0..TAU).prop_map(|(t, th)| PolarPoint::new(t, th))
}

fn plane_distance(a: &PolarPoint<f64>, b: &PolarPoint<f64>) -> f64 {
    let (xa, ya) = (a.t * a.theta.cos(), a.t * a.theta.sin());
    let (xb, yb) = (b.t * b.theta.cos(), b.t * b.theta.sin());
    (xa - xb).hypot(ya - yb)
}

/// Gap between two points in the ambient frame, for any model.
fn separation(m: &ProfileModel, a: &PolarPoint<f64>, b: &PolarPoint<f64>) -> f64 {
    let dth = (a.theta - b.theta + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
    (a.t - b.t).abs() + m.f(a.t.max(b.t)).abs() * dth.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesics_retrace_when_reversed(m in builtin(), q in point(0.2, 2.0), phi in 0.0..TAU, s in 0.1..2.0f64) {
        let start = GeodesicState::launch(&m, q, phi);
        let out = integrate(&m, &start, s, DEFAULT_TOL).unwrap();
        let back = integrate(&m, &out.end().reversed(), s, DEFAULT_TOL).unwrap();
        let home = back.endpoint();
        prop_assert!(separation(&m, &home, &q) < 1e-7, "{:?} vs {:?}", home, q);
    }

    #[test]
    fn geodesics_keep_unit_speed(m in builtin(), q in point(0.05, 3.0), phi in 0.0..TAU, s in 0.1..4.0f64) {
        let start = GeodesicState::launch(&m, q, phi);
        let path = integrate(&m, &start, s, DEFAULT_TOL).unwrap();
        prop_assert!(path.max_speed_defect(&m) <= 1e-8);
        let nu = path.nu();
        for sample in &path.samples {
            prop_assert!((sample.state.nu - nu).abs() <= 1e-12 * (1.0 + nu.abs()));
        }
    }

    #[test]
    fn distance_is_symmetric(m in builtin(), a in point(0.1, 4.0), b in point(0.1, 4.0)) {
        let ab = distance(&m, &a, &b).unwrap().length;
        let ba = distance(&m, &b, &a).unwrap().length;
        prop_assert!((ab - ba).abs() <= 1e-6, "{ab} vs {ba}");
    }

    #[test]
    fn distance_satisfies_the_triangle_inequality(
        m in builtin(),
        x in point(0.1, 4.0),
        y in point(0.1, 4.0),
        z in point(0.1, 4.0),
    ) {
        let xy = distance(&m, &x, &y).unwrap().length;
        let yz = distance(&m, &y, &z).unwrap().length;
        let xz = distance(&m, &x, &z).unwrap().length;
        prop_assert!(xz <= xy + yz + 1e-6, "{xz} > {xy} + {yz}");
    }

    #[test]
    fn busemann_grows_with_the_horizon(q in point(0.1, 2.0), theta in 0.0..TAU, horizon in 40.0..200.0f64) {
        let m = ProfileModel::hyperbolic();
        let ray = MeridianRay::from_pole(theta);
        let b = busemann_value(&m, &ray, &q, horizon).unwrap();
        prop_assert!(b.doubled >= b.value - 1e-9, "{:?}", b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plane_busemann_is_one_lipschitz(x in point(0.0, 2.0), y in point(0.0, 2.0), theta in 0.0..TAU) {
        let m = ProfileModel::plane();
        let ray = MeridianRay::from_pole(theta);
        let fx = busemann_value(&m, &ray, &x, 100.0).unwrap().value;
        let fy = busemann_value(&m, &ray, &y, 100.0).unwrap().value;
        prop_assert!((fx - fy).abs() <= plane_distance(&x, &y) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hyperbolic_busemann_is_one_lipschitz(x in point(0.1, 2.0), y in point(0.1, 2.0)) {
        let m = ProfileModel::hyperbolic();
        let ray = MeridianRay::from_pole(0.0);
        let fx = busemann_value(&m, &ray, &x, 40.0).unwrap().value;
        let fy = busemann_value(&m, &ray, &y, 40.0).unwrap().value;
        let d = distance(&m, &x, &y).unwrap().length;
        prop_assert!((fx - fy).abs() <= d + 1e-9, "{fx} {fy} {d}");
    }
}
