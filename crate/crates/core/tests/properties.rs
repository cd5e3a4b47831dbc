use std::f64::consts::PI;

use cclab::cost::Cost;
use cclab::manifold::{dist, exp_map, log_map, Manifold, ManifoldPoint};
use cclab::sampling::{random_pair, rng_for, PairBounds};
use cclab::sliding::Scenario;
use cclab::sphere::{neg_h_ddot, neg_h_ddot_vectors, SphereConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = SphereConfig> {
    (0.05..PI - 0.05, -PI..PI, -PI..PI, 0.0..2.0f64).prop_map(|(rho, theta, psi, wp)| SphereConfig::new(rho, theta, psi, wp))
}

/// A random orthonormal frame of `R^4`, standing in for `T_x S^4`.
fn rotated_frame(entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 4, entries).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn neg_h_ddot_is_biquadratic(cfg in config(), a in 0.1..3.0f64, b in 0.1..3.0f64) {
        let base = neg_h_ddot(&cfg).unwrap();
        let scaled = SphereConfig {
            q_norm: b,
            w_plane_norm: a,
            w_perp_norm: a * cfg.w_perp_norm,
            ..cfg
        };
        let v = neg_h_ddot(&scaled).unwrap();
        let want = a * a * b * b * base;
        prop_assert!((v - want).abs() <= 1e-9 * (1.0 + want.abs()), "{v} vs {want}");
    }

    #[test]
    fn neg_h_ddot_is_even_in_each_vector(cfg in config()) {
        let base = neg_h_ddot(&cfg).unwrap();
        // w -> -w and q -> -q
        let flip_w = SphereConfig { psi: cfg.psi + PI, ..cfg };
        let flip_q = SphereConfig { theta: cfg.theta + PI, ..cfg };
        for v in [neg_h_ddot(&flip_w).unwrap(), neg_h_ddot(&flip_q).unwrap()] {
            prop_assert!((v - base).abs() <= 1e-10 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn four_sphere_reduces_to_two_plane(
        rho in 0.05..PI - 0.05,
        entries in prop::collection::vec(-1.0..1.0f64, 16),
        q in prop::collection::vec(-1.0..1.0f64, 2),
        w in prop::collection::vec(-1.0..1.0f64, 4),
        angle in -PI..PI,
    ) {
        let frame = rotated_frame(&entries);
        let (e1, rhat) = (frame.column(0).into_owned(), frame.column(1).into_owned());
        let qv = &e1 * q[0] + &rhat * q[1];
        let w_plane = &e1 * w[0] + &rhat * w[1];
        let perp = |c: f64, s: f64| frame.column(2) * c + frame.column(3) * s;
        let w_perp = perp(w[2], w[3]);
        let v = neg_h_ddot_vectors(rho, &rhat, &qv, &(&w_plane + &w_perp)).unwrap();

        // rotating w_perp inside the normal plane changes nothing
        let (s, c) = angle.sin_cos();
        let turned = perp(c * w[2] - s * w[3], s * w[2] + c * w[3]);
        let v_turned = neg_h_ddot_vectors(rho, &rhat, &qv, &(&w_plane + &turned)).unwrap();
        prop_assert!((v - v_turned).abs() <= 1e-10 * (1.0 + v.abs()));

        let q_norm = qv.norm();
        prop_assume!(q_norm > 1e-3);
        let cfg = SphereConfig {
            rho,
            theta: q[1].atan2(q[0]),
            psi: w[1].atan2(w[0]),
            q_norm,
            w_plane_norm: w[0].hypot(w[1]),
            w_perp_norm: w_perp.norm(),
        };
        let reduced = neg_h_ddot(&cfg).unwrap();
        prop_assert!((v - reduced).abs() <= 1e-9 * (1.0 + v.abs()), "{v} vs {reduced}");
    }

    #[test]
    fn exp_inverts_log(
        name in prop::sample::select(vec!["S2", "S4", "R2", "CP1", "CP2", "S2xS2", "S2xR1"]),
        seed in any::<u64>(),
    ) {
        let m: Manifold = name.parse().unwrap();
        let (x, y) = random_pair(&m, PairBounds::default(), &mut rng_for(seed, 0));
        let x = ManifoldPoint::new(&m, x).unwrap();
        let y = ManifoldPoint::new(&m, y).unwrap();
        let v = log_map(&x, &y).unwrap();
        prop_assert!(dist(&exp_map(&x, &v).unwrap(), &y).unwrap() <= 1e-9);
    }

    #[test]
    fn profile_vanishes_at_base_point(
        name in prop::sample::select(vec!["S2", "CP1", "S2xR1"]),
        seed in any::<u64>(),
        t in 0.0..1.0f64,
    ) {
        let m: Manifold = name.parse().unwrap();
        let s = Scenario::random(&Cost::half_square(&m), 0, seed, 0).unwrap();
        prop_assert_eq!(s.f_eval(t, &s.x).unwrap(), 0.0);
    }
}

