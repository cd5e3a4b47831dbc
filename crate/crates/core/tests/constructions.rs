use cclab::constructions::{null_construction, product_additivity, MinusVectors, Submersion};
use cclab::cost::Cost;
use cclab::manifold::Manifold;
use cclab::sampling::{random_pair, rng_for, PairBounds};

#[test]
fn flat_product_is_additive() {
    let r = Manifold::euclidean(1).unwrap();
    let c = Cost::half_square(&r);
    for i in 0..20 {
        // every term is a finite-difference estimate of zero
        let rec = product_additivity(&c, &c, 3, i).unwrap();
        assert!(rec.defect <= 1e-9, "{}", rec.defect);
        assert!(rec.cross_product.abs() <= 1e-9);
    }
}

#[test]
fn submersion_shortens_distances() {
    for m in [1, 2] {
        let sub = Submersion::hopf(m).unwrap();
        for i in 0..50 {
            let mut rng = rng_for(8, i);
            let a = sub.total.random_point(&mut rng);
            let b = sub.total.random_point(&mut rng);
            let d_total = sub.total.dist_raw(&a, &b);
            let d_base = sub.base.dist_raw(&sub.project(&a), &sub.project(&b));
            assert!(d_base <= d_total + 1e-12, "CP{m}: {d_base} > {d_total}");
        }
    }
}

#[test]
fn horizontal_lifts_preserve_distance_and_are_deterministic() {
    for m in [1, 2] {
        let sub = Submersion::hopf(m).unwrap();
        for i in 0..30 {
            let (x, xbar) = random_pair(&sub.base, PairBounds::default(), &mut rng_for(4, i));
            let lift = sub.horizontal_lift_pair(&x, &xbar).unwrap();
            assert!((lift.total_distance - lift.base_distance).abs() <= 1e-10);
            assert!((sub.project(&lift.xbar_lift) - &xbar).norm() <= 1e-10);
            let again = sub.horizontal_lift_pair(&x, &xbar).unwrap();
            assert_eq!(lift.xbar_lift, again.xbar_lift);
        }
    }
}

#[test]
fn mismatched_submersions_are_rejected() {
    assert!(Submersion::from_names("S5", "CP2").is_ok());
    assert!(Submersion::from_names("S4", "CP2").is_err());
    assert!(Submersion::from_names("S3", "S2").is_err());
}

#[test]
fn log_times_sphere_fails_the_weak_condition() {
    // geodesic vectors on the sphere factor carry zero cross-curvature, so the
    // null pair inherits the negative value of the log factor
    let c_log = Cost::log_euclidean(&Manifold::euclidean(1).unwrap()).unwrap();
    let c_s2 = Cost::half_square(&Manifold::sphere(2).unwrap());
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..500 {
        let n = null_construction(&c_log, &c_s2, MinusVectors::Geodesic, seed).unwrap();
        assert!(n.pair.h_value.abs() <= 1e-9, "seed {seed}: h {}", n.pair.h_value);
        assert!(n.cross_minus.abs() <= 1e-6);
        assert!(n.cross < 0.0, "seed {seed}: {}", n.cross);
        worst = worst.max(n.cross);
    }
    assert!(worst < -1e-3, "{worst}");
}
