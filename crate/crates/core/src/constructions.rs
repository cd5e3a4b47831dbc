//! Product costs, the logarithmic-cost counterexample, and the Hopf
//! submersion `S^{2m+1} -> CP^m` with horizontal lifts.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::Cost;
use crate::crosscurv::{cross_raw, null_pair, nonneg_tolerance, NullPair};
use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{cinner, cscale, gauge, gauge_phase, Manifold, ManifoldKind, ManifoldPoint, TangentVector, STENCIL_GUARD};
use crate::sampling::{random_pair, rng_for, PairBounds};

/// The additive cost `c+(x+, xbar+) + c-(x-, xbar-)` on the product manifold.
pub fn product_cost(c_plus: &Cost, c_minus: &Cost) -> Result<Cost> {
    Cost::sum(vec![c_plus.clone(), c_minus.clone()])
}

/// `2 <q, p>^2 - |p|^2 |q|^2`, the Hessian of the logarithmic cost in
/// direction `p` written in the dual variable `q` (up to the positive factor
/// `|q|^2`).
pub fn log_cost_quadratic(q: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::domain("q and p have different lengths"));
    }
    let q2 = q.norm_squared();
    if q2 == 0.0 {
        return Err(Error::SingularCost);
    }
    Ok(2.0 * q.dot(p).powi(2) - p.norm_squared() * q2)
}

/// One product-additivity check.
#[derive(Debug, Clone, Serialize)]
pub struct AdditivityRecord {
    pub cross_product: f64,
    pub cross_plus: f64,
    pub cross_minus: f64,
    pub defect: f64,
}

/// Pairs for the additivity check stay a unit away from the cut locus: the
/// check is absolute, and next to the cut locus the cross-curvature reaches
/// `1e5`, where finite differences resolve only about `1e-7` relative.
pub const ADDITIVITY_BOUNDS: PairBounds = PairBounds {
    min_dist: 0.05,
    room: 1.0,
    euclid_max: 2.0,
};

/// Compares the cross-curvature of `c+ + c-` at a random configuration with
/// the sum of the factor values, for unit vectors in each factor.
pub fn product_additivity(c_plus: &Cost, c_minus: &Cost, seed: u64, index: u64) -> Result<AdditivityRecord> {
    let c = product_cost(c_plus, c_minus)?;
    let m = c.manifold();
    let mut rng = rng_for(seed, index);
    let (mp, mm) = (c_plus.manifold(), c_minus.manifold());
    let (xp, xbp) = random_pair(mp, ADDITIVITY_BOUNDS, &mut rng);
    let (xm, xbm) = random_pair(mm, ADDITIVITY_BOUNDS, &mut rng);
    let pp = mp.random_unit_tangent(&xp, &mut rng);
    let pbp = mp.random_unit_tangent(&xbp, &mut rng);
    let pm = mm.random_unit_tangent(&xm, &mut rng);
    let pbm = mm.random_unit_tangent(&xbm, &mut rng);
    let cross_plus = cross_raw(c_plus, &xp, &xbp, &pp, &pbp)?.value;
    let cross_minus = cross_raw(c_minus, &xm, &xbm, &pm, &pbm)?.value;
    let x = m.join(&[xp, xm]);
    let xbar = m.join(&[xbp, xbm]);
    let cross_product = cross_raw(&c, &x, &xbar, &m.join(&[pp, pm]), &m.join(&[pbp, pbm]))?.value;
    Ok(AdditivityRecord {
        cross_product,
        cross_plus,
        cross_minus,
        defect: (cross_product - cross_plus - cross_minus).abs(),
    })
}

fn factor_pair<R: Rng + ?Sized>(c: &Cost, rng: &mut R) -> (DVector<f64>, DVector<f64>) {
    let bounds = match c.kind() {
        // keep the logarithmic singularity at a fixed distance
        crate::cost::CostKind::LogEuclidean => PairBounds {
            min_dist: 0.5,
            room: 0.0,
            euclid_max: 2.0,
        },
        _ => PairBounds::default(),
    };
    random_pair(c.manifold(), bounds, rng)
}

/// How the second factor of a null-pair construction chooses its vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinusVectors {
    /// `p- = E pbar-` for a random unit `pbar-`, so `h- = |E pbar-|^2 > 0`.
    EImage,
    /// The endpoint velocities of the connecting geodesic, for which `h-` is
    /// the squared distance and the factor cross-curvature vanishes.
    Geodesic,
}

/// A null pair on `c+ + c-` with its cross-curvature.
#[derive(Debug, Clone)]
pub struct NullConstruction {
    pub pair: NullPair,
    pub cross: f64,
    pub residual: f64,
    pub cross_plus: f64,
    pub cross_minus: f64,
}

/// Builds `p+` parallel to `E+ pbar+` on the first factor, vectors on the
/// second factor per `minus`, balances them to an h-null pair and evaluates
/// the cross-curvature of the sum.
pub fn null_construction(
    c_plus: &Cost,
    c_minus: &Cost,
    minus: MinusVectors,
    seed: u64,
) -> Result<NullConstruction> {
    let mut rng = rng_for(seed, 0);
    let (xp, xbp) = factor_pair(c_plus, &mut rng);
    let (xm, xbm) = factor_pair(c_minus, &mut rng);
    let (pp, pbp) = e_image_vectors(c_plus, &xp, &xbp, &mut rng)?;
    let (pm, pbm) = match minus {
        MinusVectors::EImage => e_image_vectors(c_minus, &xm, &xbm, &mut rng)?,
        MinusVectors::Geodesic => {
            let mm = c_minus.manifold();
            let p = mm.log_raw(&xm, &xbm, STENCIL_GUARD)?;
            let pbar = -mm.log_raw(&xbm, &xm, STENCIL_GUARD)?;
            (p, pbar)
        }
    };
    let pair = null_pair(c_plus, c_minus, &xp, &xbp, &pp, &pbp, &xm, &xbm, &pm, &pbm)?;
    let sign = if pair.balance.flipped { -1.0 } else { 1.0 };
    let cross_plus = cross_raw(c_plus, &xp, &xbp, &pp, &(&pbp * sign))?.value;
    let lambda = pair.balance.lambda;
    let cross_minus = cross_raw(c_minus, &xm, &xbm, &(&pm * lambda), &(&pbm * lambda))?.value;
    let cv = cross_raw(&pair.cost, &pair.x, &pair.xbar, &pair.p, &pair.pbar)?;
    Ok(NullConstruction {
        pair,
        cross: cv.value,
        residual: cv.residual,
        cross_plus,
        cross_minus,
    })
}

fn e_image_vectors<R: Rng + ?Sized>(
    c: &Cost,
    x: &DVector<f64>,
    xbar: &DVector<f64>,
    rng: &mut R,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let pbar = c.manifold().random_unit_tangent(xbar, rng);
    let e = c.cross_difference_raw(x, xbar, STENCIL_GUARD)?;
    let p = e.apply(&pbar);
    let n = p.norm();
    if n == 0.0 {
        return Err(Error::Degeneracy("E pbar vanishes".into()));
    }
    Ok((p / n, pbar))
}

/// The product of two logarithmic costs on `R^dim` violates the weak
/// condition: an h-null pair with negative cross-curvature.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub construction: NullConstruction,
    pub tolerance: f64,
}

impl Counterexample {
    pub fn h_value(&self) -> f64 {
        self.construction.pair.h_value
    }

    pub fn cross(&self) -> f64 {
        self.construction.cross
    }

    pub fn is_violation(&self) -> bool {
        self.h_value().abs() <= crate::crosscurv::NULL_TOL && self.cross() < -10.0 * self.tolerance
    }
}

pub fn log_product_counterexample(dim: usize, seed: u64) -> Result<Counterexample> {
    let r = Manifold::euclidean(dim)?;
    let c = Cost::log_euclidean(&r)?;
    let construction = null_construction(&c, &c, MinusVectors::EImage, seed)?;
    let tolerance = nonneg_tolerance(construction.cross_plus.abs().max(construction.cross_minus.abs()));
    Ok(Counterexample {
        construction,
        tolerance,
    })
}

/// Hopf submersion `S^{2m+1} -> CP^m`; `CP^m` points are the gauge-fixed
/// representatives of their fibres.
#[derive(Debug, Clone)]
pub struct Submersion {
    pub total: Manifold,
    pub base: Manifold,
    pub vertical_dim: usize,
}

/// A base pair and its horizontal lift.
#[derive(Debug, Clone)]
pub struct LiftedPair {
    pub x: DVector<f64>,
    pub xbar: DVector<f64>,
    pub x_lift: DVector<f64>,
    pub xbar_lift: DVector<f64>,
    pub base_distance: f64,
    pub total_distance: f64,
}

/// Output of [`Submersion::oneill_compare`].
#[derive(Debug, Clone, Serialize)]
pub struct OneillRecord {
    pub cross_base: f64,
    pub cross_total: f64,
    pub h_base: f64,
    pub h_total: f64,
    pub w: Vec<f64>,
    pub wbar: Vec<f64>,
    /// Smallest `c_M(x~(s), xbar~(t)) - c_B(x(s), xbar(t))` on the stencil grid.
    pub f_min: f64,
}

impl OneillRecord {
    pub fn slack(&self) -> f64 {
        self.cross_base - self.cross_total
    }
}

impl Submersion {
    pub fn hopf(m: usize) -> Result<Self> {
        Ok(Self {
            total: Manifold::sphere(2 * m + 1)?,
            base: Manifold::complex_projective(m)?,
            vertical_dim: 1,
        })
    }

    /// Parses `S<2m+1>` and `CP<m>`.
    pub fn from_names(total: &str, base: &str) -> Result<Self> {
        let t: Manifold = total.parse()?;
        let b: Manifold = base.parse()?;
        match (t.kind(), b.kind()) {
            (ManifoldKind::Sphere { n }, ManifoldKind::ComplexProjective { m }) if *n == 2 * m + 1 => Self::hopf(*m),
            _ => Err(Error::domain(format!("no submersion {total} -> {base}; only Hopf S(2m+1) -> CP(m) is built in"))),
        }
    }

    pub fn project(&self, x_lift: &DVector<f64>) -> DVector<f64> {
        gauge(x_lift)
    }

    /// `d pi` at `x_lift`: the horizontal part, rotated to the gauge of `pi(x_lift)`.
    pub fn project_vector(&self, x_lift: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let (re, im) = gauge_phase(x_lift);
        let b = self.project(x_lift);
        self.base.project_tangent(&b, &cscale(v, re, im))
    }

    fn check_fibre(&self, b: &DVector<f64>, x_lift: &DVector<f64>) -> Result<(f64, f64)> {
        self.base.check_point(b)?;
        self.total.check_point(x_lift)?;
        // x_lift = e^{i phi} b
        let (re, im) = cinner(b, x_lift);
        let modulus = re.hypot(im);
        if (modulus - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("point is not in the fibre (|<b, x~>| = {modulus})")));
        }
        Ok((re / modulus, im / modulus))
    }

    /// The horizontal vector at `x_lift` projecting to `v` at `b`.
    pub fn horizontal_lift_vector(&self, b: &DVector<f64>, v: &DVector<f64>, x_lift: &DVector<f64>) -> Result<DVector<f64>> {
        let (re, im) = self.check_fibre(b, x_lift)?;
        if self.base.tangency_defect(b, v) > 1e-10 {
            return Err(Error::domain("vector is not tangent to the base at b"));
        }
        Ok(cscale(v, re, im))
    }

    /// Lifts `(x, xbar)` from the representative `x` itself, following the
    /// horizontal lift of the connecting geodesic.
    pub fn horizontal_lift_pair(&self, x: &DVector<f64>, xbar: &DVector<f64>) -> Result<LiftedPair> {
        self.base.check_margin(x, xbar, crate::manifold::CUT_MARGIN)?;
        let v = self.base.log_raw(x, xbar, crate::manifold::CUT_MARGIN)?;
        let x_lift = x.clone();
        let xbar_lift = self.total.exp_raw(&x_lift, &v, crate::manifold::CUT_MARGIN)?;
        Ok(LiftedPair {
            base_distance: self.base.dist_raw(x, xbar),
            total_distance: self.total.dist_raw(&x_lift, &xbar_lift),
            x: x.clone(),
            xbar: xbar.clone(),
            x_lift,
            xbar_lift,
        })
    }

    /// Compares cross-curvatures of the half-squared distances on base and
    /// total space. `v* = E_B vbar` and `vbar* = E_B^T v` are lifted
    /// horizontally; `wbar = E_M^{-1} w*` and `w = E_M^{-T} wbar*`.
    pub fn oneill_compare(&self, x: &DVector<f64>, xbar: &DVector<f64>, v: &DVector<f64>, vbar: &DVector<f64>) -> Result<OneillRecord> {
        let cb = Cost::half_square(&self.base);
        let cm = Cost::half_square(&self.total);
        let lift = self.horizontal_lift_pair(x, xbar)?;
        let eb = cb.cross_difference_raw(x, xbar, STENCIL_GUARD)?;
        let v_star = eb.apply(vbar);
        let vbar_star = eb.apply_transpose(v);
        let w_star = self.horizontal_lift_vector(x, &v_star, &lift.x_lift)?;
        let wbar_star = self.horizontal_lift_vector(xbar, &vbar_star, &lift.xbar_lift)?;
        let em = cm.cross_difference_raw(&lift.x_lift, &lift.xbar_lift, STENCIL_GUARD)?;
        let lu = em.matrix.clone().lu();
        let lu_t = em.matrix.transpose().lu();
        let wbar = &em.frame_xbar
            * lu.solve(&(em.frame_x.transpose() * &w_star))
                .ok_or_else(|| Error::Degeneracy("E_M is singular".into()))?;
        let w = &em.frame_x
            * lu_t
                .solve(&(em.frame_xbar.transpose() * &wbar_star))
                .ok_or_else(|| Error::Degeneracy("E_M is singular".into()))?;
        let h_base = cb.h_raw(x, xbar, v, vbar, STENCIL_GUARD)?;
        let h_total = cm.h_raw(&lift.x_lift, &lift.xbar_lift, &w, &wbar, STENCIL_GUARD)?;
        let cross_base = cross_raw(&cb, x, xbar, v, vbar)?.value;
        let cross_total = cross_raw(&cm, &lift.x_lift, &lift.xbar_lift, &w, &wbar)?.value;
        let f_min = self.f_grid_min(&cm, &cb, &lift, &w, &wbar)?;
        Ok(OneillRecord {
            cross_base,
            cross_total,
            h_base,
            h_total,
            w: w.iter().copied().collect(),
            wbar: wbar.iter().copied().collect(),
            f_min,
        })
    }

    /// `F(s, t) = c_M(x~(s), xbar~(t)) - c_B(pi x~(s), pi xbar~(t))` on the 5x5
    /// grid of the cross-curvature stencil, where `x~(s)` is the h-geodesic
    /// with velocity `w` and `xbar~(t) = exp(t wbar)`.
    fn f_grid_min(&self, cm: &Cost, cb: &Cost, lift: &LiftedPair, w: &DVector<f64>, wbar: &DVector<f64>) -> Result<f64> {
        let (xl, xbl) = (&lift.x_lift, &lift.xbar_lift);
        let step = fd::fourth_step(cm.room_raw(xl, xbl).min(cb.room_raw(&lift.x, &lift.xbar)));
        let (nw, nwb) = (w.norm(), wbar.norm());
        let hs = if nw > 0.0 { step / nw } else { 0.0 };
        let ht = if nwb > 0.0 { step / nwb } else { 0.0 };
        let u = cm.solve_h_velocity_raw(xl, xbl, w, STENCIL_GUARD)?;
        let anchor = cm.neg_grad_raw(xbl, xl, STENCIL_GUARD)?;
        let mut f_min = f64::INFINITY;
        for i in -2..=2 {
            for j in -2..=2 {
                let s = f64::from(i) * hs;
                let t = f64::from(j) * ht;
                let xs = cm.c_exp_raw(xbl, &(&anchor + &u * s), STENCIL_GUARD)?;
                let xt = self.total.exp_raw(xbl, &(wbar * t), STENCIL_GUARD)?;
                let f = cm.eval_raw(&xs, &xt, STENCIL_GUARD)?
                    - cb.eval_raw(&self.project(&xs), &self.project(&xt), STENCIL_GUARD)?;
                f_min = f_min.min(f);
            }
        }
        Ok(f_min)
    }

    /// Random base configuration for the comparison.
    pub fn random_config(&self, seed: u64, index: u64) -> (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>) {
        let mut rng = rng_for(seed, index);
        let (x, xbar) = random_pair(&self.base, PairBounds::default(), &mut rng);
        let v = self.base.random_unit_tangent(&x, &mut rng);
        let vbar = self.base.random_unit_tangent(&xbar, &mut rng);
        (x, xbar, v, vbar)
    }

    /// [`Self::oneill_compare`] on `samples` random configurations.
    pub fn oneill_sweep(&self, seed: u64, samples: usize) -> Result<Vec<OneillRecord>> {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let (x, xbar, v, vbar) = self.random_config(seed, i);
                self.oneill_compare(&x, &xbar, &v, &vbar)
            })
            .collect()
    }
}

/// Typed form of [`Submersion::horizontal_lift_vector`].
pub fn horizontal_lift_vector(sub: &Submersion, v: &TangentVector, x_lift: &ManifoldPoint) -> Result<TangentVector> {
    if v.base().manifold() != &sub.base || x_lift.manifold() != &sub.total {
        return Err(Error::domain("arguments do not match the submersion"));
    }
    let lifted = sub.horizontal_lift_vector(v.base().coords(), v.coords(), x_lift.coords())?;
    TangentVector::new(x_lift, lifted)
}

/// Sectional curvature estimates from the diagonal limit of the
/// cross-curvature, `cross = 4/3 K` for orthonormal `p`, `pbar`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureProbe {
    pub estimates: Vec<f64>,
    /// `1 + 3 <i p, q>^2`, the exact curvature of each sampled plane.
    pub exact: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

/// Distance of `xbar` from `x` in the diagonal limit.
pub const DIAGONAL_OFFSET: f64 = 1e-3;

pub fn cpn_curvature_probe(m: usize, samples: usize, seed: u64) -> Result<CurvatureProbe> {
    let cp = Manifold::complex_projective(m)?;
    let c = Cost::half_square(&cp);
    let total = Manifold::sphere(2 * m + 1)?;
    let pairs = (0..samples as u64)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64)> {
            let mut rng = rng_for(seed, k);
            let x = cp.random_point(&mut rng);
            let p = cp.random_unit_tangent(&x, &mut rng);
            let ip = crate::manifold::times_i(&p);
            // sweep the angle between the plane and the complex line of p
            let alpha = std::f64::consts::FRAC_PI_2 * k as f64 / (samples.max(2) - 1) as f64;
            let q = if m == 1 {
                ip.clone()
            } else {
                let r = cp.random_unit_tangent(&x, &mut rng);
                let r = &r - &p * p.dot(&r) - &ip * ip.dot(&r);
                &ip * alpha.cos() + r.normalize() * alpha.sin()
            };
            let exact = 1.0 + 3.0 * ip.dot(&q).powi(2);
            let d = cp.random_unit_tangent(&x, &mut rng) * DIAGONAL_OFFSET;
            let raw = total.exp_raw(&x, &d, 0.0)?;
            let xbar = gauge(&raw);
            let (re, im) = gauge_phase(&raw);
            let qbar = cp.project_tangent(&xbar, &cscale(&q, re, im));
            let qbar = qbar.normalize();
            let cv = cross_raw(&c, &x, &xbar, &p, &qbar)?;
            Ok((cv.value * 0.75, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let estimates: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let exact: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let min = estimates.iter().copied().fold(f64::INFINITY, f64::min);
    let max = estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureProbe {
        estimates,
        exact,
        min,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_quadratic_examples() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(log_cost_quadratic(&e1, &e2).unwrap(), -1.0);
        assert_eq!(log_cost_quadratic(&e1, &e1).unwrap(), 1.0);
        assert!(matches!(log_cost_quadratic(&DVector::zeros(2), &e1), Err(Error::SingularCost)));
    }

    #[test]
    fn hopf_names() {
        assert!(Submersion::from_names("S3", "CP1").is_ok());
        assert!(Submersion::from_names("S5", "CP2").is_ok());
        assert!(Submersion::from_names("S5", "CP1").is_err());
    }

    #[test]
    fn lift_of_zero_vector() {
        let sub = Submersion::hopf(1).unwrap();
        let mut rng = rng_for(1, 0);
        let b = sub.base.random_point(&mut rng);
        let lift = cscale(&b, 0.6, 0.8);
        let v = sub.horizontal_lift_vector(&b, &DVector::zeros(4), &lift).unwrap();
        assert_eq!(v.norm(), 0.0);
        let far = sub.total.random_point(&mut rng);
        assert!(sub.horizontal_lift_vector(&b, &DVector::zeros(4), &far).is_err());
    }

    #[test]
    fn lifted_distance_matches() {
        let sub = Submersion::hopf(1).unwrap();
        let mut rng = rng_for(2, 0);
        let x = sub.base.random_point(&mut rng);
        let v = sub.base.random_unit_tangent(&x, &mut rng) * std::f64::consts::FRAC_PI_4;
        let xbar = sub.base.exp_raw(&x, &v, 0.0).unwrap();
        let lift = sub.horizontal_lift_pair(&x, &xbar).unwrap();
        assert!((lift.base_distance - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((lift.total_distance - lift.base_distance).abs() < 1e-12);
        assert!((sub.project(&lift.xbar_lift) - &xbar).amax() < 1e-12);
    }
}
