use std::f64::consts::PI;

use proptest::prelude::*;

use scherk::diffops::{fd_gradient, fd_hessian, minimal_residual, FD_STEP};
use scherk::surface::{helicoid_limit_error, BranchPolicy, GrainAngle, Helicoid, Point, Scherk};

fn scherk(alpha: f64) -> Scherk {
    Scherk::from_alpha(alpha).unwrap()
}

/// Keep `y` clear of the branch lines `k ell` so principal values are comparable.
fn off_cut(y: f64, ell: f64) -> bool {
    let r = (y / ell).rem_euclid(1.0);
    r > 1e-6 && r < 1.0 - 1e-6
}

proptest! {
    #[test]
    fn odd_in_x_and_in_y(alpha in 0.05f64..3.05, x in -6.0f64..6.0, y in -20.0f64..20.0) {
        let s = scherk(alpha);
        prop_assume!(off_cut(y, s.angle().ell()) && x.abs() > 1e-9);
        let h = s.principal(Point::new(x, y)).unwrap();
        prop_assert!((s.principal(Point::new(-x, y)).unwrap() + h).abs() <= 1e-12 * (1.0 + h.abs()));
        prop_assert!((s.principal(Point::new(x, -y)).unwrap() + h).abs() <= 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn periodic_in_y(alpha in 0.05f64..3.05, x in -6.0f64..6.0, y in -10.0f64..10.0, k in -3i32..4) {
        let s = scherk(alpha);
        let ell = s.angle().ell();
        prop_assume!(off_cut(y, ell));
        let a = s.principal(Point::new(x, y)).unwrap();
        let b = s.principal(Point::new(x, y + k as f64 * ell)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + k.abs() as f64 * ell));
    }

    #[test]
    fn principal_range(alpha in 0.05f64..3.05, x in -50.0f64..50.0, y in -50.0f64..50.0) {
        let s = scherk(alpha);
        prop_assume!(x != 0.0 || off_cut(y, s.angle().ell()));
        let h = s.principal(Point::new(x, y)).unwrap();
        prop_assert!(h.abs() <= 0.5 * s.angle().jump_quantum() * (1.0 + 1e-15));
    }

    #[test]
    fn sheets_differ_by_quantum(alpha in 0.05f64..3.05, x in 0.1f64..5.0, y in 0.1f64..3.0, k in -5i64..6) {
        let s = scherk(alpha);
        let p = Point::new(x, y);
        let z0 = s.height(p, BranchPolicy::Principal).unwrap().z;
        let zk = s.height(p, BranchPolicy::Sheet(k)).unwrap().z;
        prop_assert!((zk - z0 - k as f64 * s.angle().jump_quantum()).abs() <= 1e-12 * (1.0 + zk.abs()));
    }

    #[test]
    fn analytic_derivatives_match_differences(alpha in 0.2f64..2.9, x in -3.0f64..3.0, y in -5.0f64..5.0) {
        let s = scherk(alpha);
        let ell = s.angle().ell();
        let p = Point::new(x, y);
        prop_assume!(s.core_distance(p) > 0.5);
        // finite differences straddling a branch line would see the jump
        prop_assume!(((y / ell).rem_euclid(1.0) - 0.5).abs() < 0.5 - 4.0 * FD_STEP / ell);
        let g = s.gradient(p).unwrap();
        let fg = fd_gradient(&s, p, FD_STEP).unwrap();
        prop_assert!((g.hx - fg.hx).abs() <= 1e-7 * (1.0 + g.hx.abs()));
        prop_assert!((g.hy - fg.hy).abs() <= 1e-7 * (1.0 + g.hy.abs()));
        let h = s.hessian(p).unwrap();
        let fh = fd_hessian(&s, p, FD_STEP).unwrap();
        for (a, b) in [(h.hxx, fh.hxx), (h.hxy, fh.hxy), (h.hyy, fh.hyy)] {
            prop_assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_continuous_across_cut(alpha in 0.2f64..2.9, x in 0.3f64..4.0) {
        let s = scherk(alpha);
        let ell = s.angle().ell();
        let above = s.gradient(Point::new(x, ell + 1e-9)).unwrap();
        let below = s.gradient(Point::new(x, ell - 1e-9)).unwrap();
        prop_assert!((above.hx - below.hx).abs() <= 1e-6);
        prop_assert!((above.hy - below.hy).abs() <= 1e-6);
    }

    #[test]
    fn minimal_away_from_cores(alpha in 0.1f64..3.0, x in -5.0f64..5.0, y in -8.0f64..8.0) {
        let s = scherk(alpha);
        let p = Point::new(x, y);
        prop_assume!(s.core_distance(p) > 0.05);
        let r = minimal_residual(&s, p).unwrap();
        let g = s.gradient(p).unwrap();
        let scale = 1.0 + g.norm_sqr();
        let h = s.hessian(p).unwrap();
        prop_assert!(r.abs() <= 1e-12 * scale * (1.0 + h.hxx.abs() + h.hxy.abs() + h.hyy.abs()));
    }

    #[test]
    fn helicoid_is_minimal(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let h = Helicoid::new();
        let p = Point::new(x, y);
        prop_assume!(h.core_distance(p) > 0.1);
        prop_assert!(minimal_residual(&h, p).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn helicoid_limit_shrinks(x in 0.2f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(y.abs() > 1e-3);
        let p = Point::new(x, y);
        let e1 = helicoid_limit_error(p, GrainAngle::new(0.1).unwrap()).unwrap();
        let e2 = helicoid_limit_error(p, GrainAngle::new(0.01).unwrap()).unwrap();
        prop_assert!(e2 < e1 || e1 < 1e-12);
    }
}

#[test]
fn reference_point_values() {
    let g = GrainAngle::new(PI / 2.0).unwrap();
    // 60-digit reference, ell = pi sqrt(2)
    assert!((g.ell() - 4.442_882_938_158_366).abs() < 1e-14);
    let z = Scherk::new(g).principal(Point::new(1.0, g.ell() / 4.0)).unwrap();
    assert!((z + 0.612_191_472_543_135_6).abs() < 1e-14);
    assert_eq!(Scherk::new(g).principal(Point::new(0.0, 1.0)).unwrap(), 0.0);
}

#[test]
fn helicoid_limit_is_second_order() {
    let p = Point::new(2.0, 0.5);
    let errs: Vec<f64> =
        [0.4, 0.2, 0.1, 0.05].iter().map(|&a| helicoid_limit_error(p, GrainAngle::new(a).unwrap()).unwrap()).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0]);
        let slope = (w[0] / w[1]).log2();
        assert!(slope > 1.8, "{slope}");
    }
}
