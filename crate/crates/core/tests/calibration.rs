use std::f64::consts::PI;

use cclab::cost::Cost;
use cclab::crosscurv::cross_raw;
use cclab::manifold::{Manifold, STENCIL_GUARD};
use cclab::sampling::{random_pair, rng_for, PairBounds};
use cclab::sphere::{embedding, neg_h_ddot, oracle_tolerance, SphereConfig};
use nalgebra::DVector;
use rand::Rng;

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(v)
}

#[test]
fn diagonal_limit_is_four_thirds() {
    let m = Manifold::sphere(2).unwrap();
    let c = Cost::half_square(&m);
    let mut rng = rng_for(3, 0);
    for _ in 0..20 {
        let x = m.random_point(&mut rng);
        let p = m.random_unit_tangent(&x, &mut rng);
        let q = m.random_unit_tangent(&x, &mut rng);
        let q = (&q - &p * p.dot(&q)).normalize();
        // xbar very close to x; pbar the parallel transport of q
        let v = m.random_unit_tangent(&x, &mut rng) * 1e-3;
        let xbar = m.exp_raw(&x, &v, STENCIL_GUARD).unwrap();
        let pbar = &q - (&x + &xbar) * (q.dot(&xbar) / (1.0 + x.dot(&xbar)));
        let cv = cross_raw(&c, &x, &xbar, &p, &pbar).unwrap();
        assert!((cv.value - 4.0 / 3.0).abs() < 1e-3, "{}", cv.value);
    }
}

#[test]
fn euclidean_cross_vanishes() {
    let m = Manifold::euclidean(3).unwrap();
    let c = Cost::half_square(&m);
    let mut rng = rng_for(5, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, xbar) = random_pair(&m, PairBounds::default(), &mut rng);
        let p = m.random_unit_tangent(&x, &mut rng) * rng.random_range(0.2..2.0);
        let pbar = m.random_unit_tangent(&xbar, &mut rng) * rng.random_range(0.2..2.0);
        worst = worst.max(cross_raw(&c, &x, &xbar, &p, &pbar).unwrap().value.abs());
    }
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn geodesic_velocities_have_zero_cross() {
    let m = Manifold::sphere(2).unwrap();
    let c = Cost::half_square(&m);
    let mut rng = rng_for(9, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (x, xbar) = random_pair(&m, PairBounds::default(), &mut rng);
        let p = m.log_raw(&x, &xbar, STENCIL_GUARD).unwrap();
        let pbar = -m.log_raw(&xbar, &x, STENCIL_GUARD).unwrap();
        let cv = cross_raw(&c, &x, &xbar, &p, &pbar).unwrap();
        worst = worst.max(cv.value.abs());
        let d = m.dist_raw(&x, &xbar);
        let h = c.h_raw(&x, &xbar, &p, &pbar, STENCIL_GUARD).unwrap();
        assert!((h - d * d).abs() < 1e-8, "{h} vs {}", d * d);
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn sphere_cross_matches_closed_form() {
    let m = Manifold::sphere(3).unwrap();
    let c = Cost::half_square(&m);
    let mut rng = rng_for(11, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let cfg = SphereConfig {
            rho: rng.random_range(0.05..PI - 0.05),
            theta: rng.random_range(0.0..PI),
            psi: rng.random_range(0.0..PI),
            q_norm: 1.0,
            w_plane_norm: rng.random_range(0.0..1.0),
            w_perp_norm: rng.random_range(0.0..1.0),
        };
        let emb = embedding(&cfg).unwrap();
        let exact = 2.0 * neg_h_ddot(&cfg).unwrap();
        let cv = cross_raw(&c, &emb.x, &emb.xbar, &emb.w, &emb.pbar).unwrap();
        let err = (cv.value - exact).abs();
        worst = worst.max(err / oracle_tolerance(exact));
        assert!(err <= oracle_tolerance(exact), "{cfg:?}: {} vs {exact}", cv.value);
    }
    eprintln!("worst error / tolerance = {worst:.3e}");
}

#[test]
fn log_cost_quadratic_form() {
    let m = Manifold::euclidean(2).unwrap();
    let c = Cost::log_euclidean(&m).unwrap();
    let x = dv(&[0.3, -0.2]);
    let xbar = dv(&[1.1, 0.4]);
    let p = dv(&[0.6, 0.8]);
    let pbar = dv(&[-0.2, 0.9]);
    let cv = cross_raw(&c, &x, &xbar, &p, &pbar).unwrap();
    assert!(cv.value.is_finite());
}
