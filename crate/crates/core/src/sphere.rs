//! Closed-form fourth derivative of the half-squared distance on the unit
//! sphere, with the auxiliary functions used to prove its sign.
//!
//! Configuration: a point `x`, a vector `r` in `T_x S^n` with `rho = |r|`, and
//! the c-segment `xbar(t) = exp_x(r + t q)`. For `w` in `T_x S^n`,
//! `H(t) = Hess_x(dist(., xbar(t))^2 / 2)(w, w) = |w|^2 - I G(rho)` and the
//! quantity of interest is `-H''(0)`.
//!
//! In the plane spanned by `rhat` and `q` we use coordinates with
//! `rhat = (0, 1)`, `q = |q| (cos theta, sin theta)` and
//! `w1 = |w1| (cos psi, sin psi)`; `T = tan theta`, `S = tan psi`. So
//! `theta = pi/2` means `q` is parallel to `rhat`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;

/// Below this distance `A`, `B`, `G` use their Taylor expansions.
pub const SERIES_CUTOFF: f64 = 1e-4;

/// Equality-case tolerance on the sines of the angles to `rhat`.
pub const PARALLEL_TOL: f64 = 1e-12;

/// `a(rho) = sin^2 rho + rho sin rho - rho^2 (1 + cos rho)`, nonnegative on
/// `[0, pi]`. Near 0 the three terms cancel to `rho^6 / 90`, so a power series
/// is used there.
pub fn a_func(rho: f64) -> f64 {
    if rho.abs() < 0.5 {
        // coefficient of rho^{2j}:
        // (-1)^{j+1} [2^{2j-1}/(2j)! + 1/(2j-1)! - 1/(2j-2)!], zero for j = 1, 2
        let r2 = rho * rho;
        let mut sum = 0.0;
        let mut pow = r2 * r2 * r2;
        let mut fact_2j = 720.0; // (2j)!
        let mut fact_2jm1 = 120.0; // (2j-1)!
        let mut fact_2jm2 = 24.0; // (2j-2)!
        let mut two_pow = 32.0; // 2^{2j-1}
        for j in 3..20 {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * (two_pow / fact_2j + 1.0 / fact_2jm1 - 1.0 / fact_2jm2) * pow;
            let jf = j as f64;
            pow *= r2;
            fact_2jm2 = fact_2j;
            fact_2jm1 = fact_2j * (2.0 * jf + 1.0);
            fact_2j = fact_2jm1 * (2.0 * jf + 2.0);
            two_pow *= 4.0;
        }
        return sum;
    }
    let (s, c) = rho.sin_cos();
    s * s + rho * s - rho * rho * (1.0 + c)
}

/// `b(lambda) = a(pi/2 + arcsin lambda) / (1 - lambda)` on `[-1, 1)`.
pub fn b_func(lambda: f64) -> Result<f64> {
    if !(-1.0..1.0).contains(&lambda) {
        return Err(Error::domain(format!("b is defined on [-1, 1), got {lambda}")));
    }
    Ok(a_func(FRAC_PI_2 + lambda.asin()) / (1.0 - lambda))
}

/// `b'(lambda)` from `(1 - lambda) b' = 2 - lambda + (pi/2 + arcsin lambda)(2 lambda - 1) / sqrt(1 - lambda^2)`.
pub fn b_prime(lambda: f64) -> Result<f64> {
    if !(-1.0 < lambda && lambda < 1.0) {
        return Err(Error::domain(format!("b' is defined on (-1, 1), got {lambda}")));
    }
    let rhs = 2.0 - lambda
        + (FRAC_PI_2 + lambda.asin()) * (2.0 * lambda - 1.0) / (1.0 - lambda * lambda).sqrt();
    Ok(rhs / (1.0 - lambda))
}

/// The coefficient functions `(A, B, G)`:
/// `A = 2 (sin rho - rho cos rho) / rho`, `B = (rho - cos rho sin rho) / sin rho`,
/// `G = 1 - rho cot rho = rho A / (2 sin rho)`.
pub fn abg(rho: f64) -> Result<(f64, f64, f64)> {
    if !(rho > 0.0 && rho < PI) {
        return Err(Error::domain(format!("rho must lie in (0, pi), got {rho}")));
    }
    if rho < SERIES_CUTOFF {
        let r2 = rho * rho;
        let r4 = r2 * r2;
        return Ok((
            2.0 * r2 / 3.0 - r4 / 15.0,
            2.0 * r2 / 3.0 - r4 / 45.0,
            r2 / 3.0 + r4 / 45.0,
        ));
    }
    let s = rho.sin();
    let a = 2.0 * sin_minus_rho_cos(rho) / rho;
    let b = rho_minus_sin_cos(rho) / s;
    let g = rho * a / (2.0 * s);
    Ok((a, b, g))
}

/// `sin rho - rho cos rho = sum_{k>=1} (-1)^{k+1} 2k rho^{2k+1} / (2k+1)!`;
/// the series avoids the cancellation for small `rho`.
fn sin_minus_rho_cos(rho: f64) -> f64 {
    if rho >= 0.5 {
        return rho.sin() - rho * rho.cos();
    }
    let r2 = rho * rho;
    let mut term = rho * r2 / 6.0; // rho^{2k+1} / (2k+1)!
    let mut sum = 0.0;
    for k in 1..16 {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * 2.0 * kf * term;
        term *= r2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
    }
    sum
}

/// `rho - sin rho cos rho = rho - sin(2 rho) / 2`, by series for small `rho`.
fn rho_minus_sin_cos(rho: f64) -> f64 {
    if rho >= 0.5 {
        return rho - rho.sin() * rho.cos();
    }
    let u = 2.0 * rho;
    let u2 = u * u;
    let mut term = u * u2 / 6.0; // u^{2k+1} / (2k+1)!
    let mut sum = 0.0;
    for k in 1..16 {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * term;
        term *= u2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
    }
    0.5 * sum
}

/// `B - A = (rho^2 + rho sin rho cos rho - 2 sin^2 rho) / (rho sin rho)`, with
/// the numerator from its power series below `0.5`.
pub fn b_minus_a(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < PI) {
        return Err(Error::domain(format!("rho must lie in (0, pi), got {rho}")));
    }
    let s = rho.sin();
    let numerator = if rho < 0.5 {
        // coefficient of rho^{2j}: (-1)^{j-1} 2^{2j-2} (2j - 4) / (2j)!, j >= 3
        let r2 = rho * rho;
        let mut pow = r2 * r2 * r2;
        let mut fact = 720.0;
        let mut two_pow = 16.0;
        let mut sum = 0.0;
        for j in 3..20 {
            let jf = j as f64;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * two_pow * (2.0 * jf - 4.0) / fact * pow;
            pow *= r2;
            fact *= (2.0 * jf + 1.0) * (2.0 * jf + 2.0);
            two_pow *= 4.0;
        }
        sum
    } else {
        rho * rho + rho * s * rho.cos() - 2.0 * s * s
    };
    Ok(numerator / (rho * s))
}

/// A configuration in the reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereConfig {
    /// `|r|`, in `(0, pi)`.
    pub rho: f64,
    /// Angle of `q` in the `(rhat-perp, rhat)` frame; `pi/2` is parallel to `rhat`.
    pub theta: f64,
    /// Angle of `w1` in the same frame.
    pub psi: f64,
    pub q_norm: f64,
    /// `|w1|`, the length of the in-plane part of `w`.
    pub w_plane_norm: f64,
    /// `|w_perp|`, the length of the part of `w` normal to the plane.
    pub w_perp_norm: f64,
}

impl SphereConfig {
    /// Unit `q` and unit `w1`.
    pub fn new(rho: f64, theta: f64, psi: f64, w_perp_norm: f64) -> Self {
        Self {
            rho,
            theta,
            psi,
            q_norm: 1.0,
            w_plane_norm: 1.0,
            w_perp_norm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < PI) {
            return Err(Error::domain(format!("rho must lie in (0, pi), got {}", self.rho)));
        }
        if !(self.q_norm > 0.0) || self.w_plane_norm < 0.0 || self.w_perp_norm < 0.0 {
            return Err(Error::domain("norms must be nonnegative and |q| > 0"));
        }
        if !(self.theta.is_finite() && self.psi.is_finite()) {
            return Err(Error::domain("angles must be finite"));
        }
        Ok(())
    }

    /// `(<rhat, q>, |q|^2, <rhat, w1>, |w1|^2, <q, w1>)`.
    fn invariants(&self) -> (f64, f64, f64, f64, f64) {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.psi.sin_cos();
        let rq = self.q_norm * st;
        let rw = self.w_plane_norm * sp;
        let qw = self.q_norm * self.w_plane_norm * (ct * cp + st * sp);
        (rq, self.q_norm * self.q_norm, rw, self.w_plane_norm * self.w_plane_norm, qw)
    }

    pub fn w_norm_sq(&self) -> f64 {
        self.w_plane_norm.powi(2) + self.w_perp_norm.powi(2)
    }
}

/// `H = |w|^2 - (|w|^2 - <rhat, w>^2) G(rho)`.
pub fn hessian_h(cfg: &SphereConfig) -> Result<f64> {
    cfg.validate()?;
    let (_, _, g) = abg(cfg.rho)?;
    let (_, _, rw, _, _) = cfg.invariants();
    let w2 = cfg.w_norm_sq();
    Ok(w2 - (w2 - rw * rw) * g)
}

/// `G''` for the c-segment through `rhat` with velocity `q`.
fn g_ddot(rho: f64, rq: f64, q2: f64) -> Result<f64> {
    let (a, b, _) = abg(rho)?;
    let s = rho.sin();
    Ok(rho / (s * s * s) * a * rq * rq + b * (q2 - rq * rq) / (rho * s))
}

/// `-H1''`: the in-plane part, in the rearranged form that exposes its sign.
fn neg_h1_ddot(cfg: &SphereConfig) -> Result<(f64, f64)> {
    let rho = cfg.rho;
    let (a, b, _) = abg(rho)?;
    let bma = b_minus_a(rho)?;
    let s = rho.sin();
    let (rq, q2, rw, w2, qw) = cfg.invariants();
    let t1 = (a * rho * rho / (s * s) * rq * rq + b * (q2 - rq * rq)) * (w2 - rw * rw);
    let t2 = 4.0 * bma * (rq * rq * rw * rw - rq * rw * qw);
    let t3 = a * (rw * rw * q2 - qw * qw);
    let scale = t1.abs() + (4.0 * bma * rq * rq * rw * rw).abs() + (4.0 * bma * rq * rw * qw).abs()
        + (a * rw * rw * q2).abs()
        + (a * qw * qw).abs();
    Ok(((t1 + t2 + t3) / (rho * s), scale / (rho * s)))
}

/// `-H''(0) = G'' |w_perp|^2 - H1''`.
pub fn neg_h_ddot(cfg: &SphereConfig) -> Result<f64> {
    Ok(neg_h_ddot_with_scale(cfg)?.0)
}

/// [`neg_h_ddot`] together with the sum of the absolute values of the terms
/// that were added up; rounding error is bounded by a few ulps of the latter.
pub fn neg_h_ddot_with_scale(cfg: &SphereConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (rq, q2, _, _, _) = cfg.invariants();
    let gdd = g_ddot(cfg.rho, rq, q2)?;
    let perp = gdd * cfg.w_perp_norm * cfg.w_perp_norm;
    let (h1, scale) = neg_h1_ddot(cfg)?;
    Ok((perp + h1, perp.abs() + scale))
}

/// `-H''` for explicit vectors of `T_x S^n` (any `n`), assembled as
/// `G'' I + 2 G' I' + G I''` with `I = |w|^2 - <rhat, w>^2`.
pub fn neg_h_ddot_vectors(rho: f64, rhat: &DVector<f64>, q: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let (_, b, g) = abg(rho)?;
    let s = rho.sin();
    let rq = rhat.dot(q);
    let rw = rhat.dot(w);
    let qw = q.dot(w);
    let q2 = q.norm_squared();
    let w2 = w.norm_squared();
    let i = w2 - rw * rw;
    let g_dot = b * rq / s;
    let gdd = g_ddot(rho, rq, q2)?;
    let i_dot = 2.0 / rho * (-rw * qw + rw * rw * rq);
    let i_ddot =
        2.0 / (rho * rho) * (4.0 * rq * rw * qw - 4.0 * rw * rw * rq * rq - qw * qw + rw * rw * q2);
    Ok(gdd * i + 2.0 * g_dot * i_dot + g * i_ddot)
}

/// `P = A S^2 - 2 (2B - A) T S + A rho^2 / sin^2 rho T^2 + B - A`.
pub fn p_poly(rho: f64, t: f64, s: f64) -> Result<f64> {
    let (a, b, _) = abg(rho)?;
    let bma = b_minus_a(rho)?;
    let sn = rho.sin();
    Ok(a * s * s - 2.0 * (2.0 * b - a) * t * s + a * rho * rho / (sn * sn) * t * t + bma)
}

/// `D = 4 {((2B - A)^2 - A^2 rho^2 / sin^2 rho) T^2 - A (B - A)}`, with the
/// bracket factored as `(2B - A + A rho / sin rho)(-2 a(rho) / (rho sin rho))`.
pub fn discriminant(rho: f64, t: f64) -> Result<f64> {
    let (a, b, _) = abg(rho)?;
    let bma = b_minus_a(rho)?;
    let sn = rho.sin();
    let plus = 2.0 * b - a + a * rho / sn;
    let minus = -2.0 * a_func(rho) / (rho * sn);
    Ok(4.0 * (plus * minus * t * t - a * bma))
}

/// Whether the configuration lies in the zero set of `-H''`: `q`, `w` and
/// `rhat` all parallel.
pub fn equality_classifier(cfg: &SphereConfig) -> Result<bool> {
    cfg.validate()?;
    let q_parallel = cfg.theta.cos().abs() < PARALLEL_TOL;
    let w_parallel = cfg.w_plane_norm == 0.0 || cfg.psi.cos().abs() < PARALLEL_TOL;
    Ok(cfg.w_perp_norm == 0.0 && q_parallel && w_parallel)
}

/// A configuration realised on `S^3` in `R^4`: `x = e0`, the plane of `rhat`
/// and `q` is `span(e1, e2)` with `rhat = e2`, and `w_perp` points along `e3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub x: DVector<f64>,
    pub r: DVector<f64>,
    pub q: DVector<f64>,
    pub w: DVector<f64>,
    pub xbar: DVector<f64>,
    /// Velocity of `t -> exp_x(r + t q)` at `t = 0`.
    pub pbar: DVector<f64>,
}

pub fn embedding(cfg: &SphereConfig) -> Result<Embedding> {
    cfg.validate()?;
    let v = |a: f64, b: f64, c: f64, d: f64| DVector::from_vec(vec![a, b, c, d]);
    let x = v(1.0, 0.0, 0.0, 0.0);
    let r = v(0.0, 0.0, cfg.rho, 0.0);
    let q = v(0.0, cfg.q_norm * cfg.theta.cos(), cfg.q_norm * cfg.theta.sin(), 0.0);
    let w = v(
        0.0,
        cfg.w_plane_norm * cfg.psi.cos(),
        cfg.w_plane_norm * cfg.psi.sin(),
        cfg.w_perp_norm,
    );
    let xbar = exp_at(&x, &r);
    let pbar = exp_differential(&x, &r, &q);
    Ok(Embedding {
        x,
        r,
        q,
        w,
        xbar,
        pbar,
    })
}

fn exp_at(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n == 0.0 {
        return x.clone();
    }
    x * n.cos() + v * (n.sin() / n)
}

/// `d(exp_x)_v (q)` on the unit sphere.
pub fn exp_differential(x: &DVector<f64>, v: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n == 0.0 {
        return q.clone();
    }
    let vhat = v / n;
    let radial = q.dot(&vhat);
    let (s, c) = n.sin_cos();
    (x * (-s) + &vhat * c) * radial + (q - &vhat * radial) * (s / n)
}

fn log_at(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let w = y - x * x.dot(y);
    let s = w.norm();
    if s == 0.0 {
        return w;
    }
    let d = 2.0 * (x - y).norm().atan2((x + y).norm());
    w * (d / s)
}

/// Finite-difference oracle for `-H''(0) = -d^4/dt^2 ds^2 c(exp_x(s w), exp_x(r + t q))`.
/// The `t`-derivative of the cost is `-<log_{xbar(t)} y, xbar'(t)>` with
/// `xbar'(t) = d(exp_x)_{r + t q}(q)`; the remaining three derivatives are
/// central differences on the adaptive Richardson ladder of
/// [`fd::mixed_third_adaptive`].
pub fn fd_neg_h_ddot(cfg: &SphereConfig) -> Result<(f64, f64)> {
    let emb = embedding(cfg)?;
    let wn = emb.w.norm();
    if wn == 0.0 {
        return Ok((0.0, 0.0));
    }
    let step = fd::fourth_step(PI - cfg.rho);
    let d = |s: f64, t: f64| -> Result<f64> {
        let y = exp_at(&emb.x, &(&emb.w * s));
        let rt = &emb.r + &emb.q * t;
        let xt = exp_at(&emb.x, &rt);
        let vt = exp_differential(&emb.x, &rt, &emb.q);
        Ok(-log_at(&xt, &y).dot(&vt))
    };
    let a = fd::mixed_third_adaptive(d, step / wn, step / cfg.q_norm, 0)?;
    Ok((-a.value, a.residual))
}

/// One row of a `(rho, theta, psi)` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub rho: f64,
    pub theta: f64,
    pub psi: f64,
    pub w_perp: f64,
    pub neg_h_ddot: f64,
    /// Rounding scale of `neg_h_ddot`.
    pub scale: f64,
    /// `P(rho, tan theta, tan psi)`, absent where a tangent is infinite.
    pub p: Option<f64>,
    pub d: Option<f64>,
    pub fd: Option<f64>,
    pub abs_err: Option<f64>,
}

/// Uniform grid with endpoints inset by `inset`.
pub fn grid(lo: f64, hi: f64, n: usize, inset: f64) -> Vec<f64> {
    let (a, b) = (lo + inset, hi - inset);
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Evaluates a row; the FD oracle is optional because it dominates the cost.
pub fn scan_row(rho: f64, theta: f64, psi: f64, w_perp: f64, with_fd: bool) -> Result<ScanRow> {
    let cfg = SphereConfig::new(rho, theta, psi, w_perp);
    let (value, scale) = neg_h_ddot_with_scale(&cfg)?;
    let finite = theta.cos().abs() >= PARALLEL_TOL && psi.cos().abs() >= PARALLEL_TOL;
    let (p, d) = if finite {
        let (t, s) = (theta.tan(), psi.tan());
        (Some(p_poly(rho, t, s)?), Some(discriminant(rho, t)?))
    } else {
        (None, None)
    };
    let (fd, abs_err) = if with_fd {
        let (f, _) = fd_neg_h_ddot(&cfg)?;
        (Some(f), Some((f - value).abs()))
    } else {
        (None, None)
    };
    Ok(ScanRow {
        rho,
        theta,
        psi,
        w_perp,
        neg_h_ddot: value,
        scale,
        p,
        d,
        fd,
        abs_err,
    })
}

/// Tolerance used when comparing closed form and finite differences.
pub fn oracle_tolerance(value: f64) -> f64 {
    1e-4f64.max(1e-3 * value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_values() {
        assert_eq!(a_func(0.0), 0.0);
        assert!(a_func(PI).abs() < 1e-14);
        let expected = 1.0 + FRAC_PI_2 - PI * PI / 4.0;
        assert!((a_func(FRAC_PI_2) - expected).abs() < 1e-15);
        // series and direct form agree where both are accurate
        let r: f64 = 0.5;
        let direct = r.sin().powi(2) + r * r.sin() - r * r * (1.0 + r.cos());
        let below = 0.5 * (1.0 - f64::EPSILON);
        assert!((a_func(below) - direct).abs() < 1e-15);
        assert!((a_func(1e-2) / 1e-12 - 1.0 / 90.0).abs() < 1e-5);
    }

    #[test]
    fn b_values() {
        assert_eq!(b_func(-1.0).unwrap(), 0.0);
        let expected = 1.0 + FRAC_PI_2 - PI * PI / 4.0;
        assert!((b_func(0.0).unwrap() - expected).abs() < 1e-15);
        assert!(b_func(1.0).is_err());
        let h = 1e-5;
        let slope = (b_func(0.75 + h).unwrap() - b_func(0.75 - h).unwrap()) / (2.0 * h);
        assert!(slope >= 3.0);
        assert!((slope - b_prime(0.75).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn abg_values() {
        let (a, b, g) = abg(FRAC_PI_2).unwrap();
        assert!((a - 4.0 / PI).abs() < 1e-15);
        assert!((b - FRAC_PI_2).abs() < 1e-15);
        assert!((g - 1.0).abs() < 1e-15);
        assert!(abg(0.0).is_err() && abg(PI).is_err());
        let (a, b, g) = abg(1e-6).unwrap();
        assert!(a < 1e-11 && b < 1e-11 && g < 1e-11);
        // continuity across the series cutoff
        let (a0, b0, g0) = abg(SERIES_CUTOFF * (1.0 - 1e-14)).unwrap();
        let (a1, b1, g1) = abg(SERIES_CUTOFF * (1.0 + 1e-14)).unwrap();
        for (u, v) in [(a0, a1), (b0, b1), (g0, g1)] {
            assert!((u - v).abs() < 1e-12 * u, "{u} vs {v}");
        }
    }

    #[test]
    fn g_identity_and_b_minus_a() {
        for k in 1..1000 {
            let rho = PI * k as f64 / 1000.0;
            let (a, b, g) = abg(rho).unwrap();
            let direct = 1.0 - rho * rho.cos() / rho.sin();
            assert!((g - direct).abs() < 1e-14 * (1.0 + g.abs()), "{rho}");
            let bma = b_minus_a(rho).unwrap();
            assert!(bma > 0.0);
            if rho > 0.5 {
                assert!((bma - (b - a)).abs() < 1e-13 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn special_values_of_neg_h_ddot() {
        // q and w1 both along rhat
        let cfg = SphereConfig::new(1.0, FRAC_PI_2, FRAC_PI_2, 0.0);
        assert!(neg_h_ddot(&cfg).unwrap().abs() < 1e-15);
        assert!(equality_classifier(&cfg).unwrap());

        let cfg = SphereConfig {
            w_plane_norm: 0.0,
            ..SphereConfig::new(1.0, 0.3, 0.0, 1.0)
        };
        let v = neg_h_ddot(&cfg).unwrap();
        assert!(v > 0.0);
        assert!(!equality_classifier(&cfg).unwrap());

        let cfg = SphereConfig::new(1.0, FRAC_PI_2, 0.4, 0.0);
        assert!(neg_h_ddot(&cfg).unwrap() > 0.0);
        assert!(!equality_classifier(&cfg).unwrap());
    }

    #[test]
    fn p_form_matches_direct_form() {
        for &rho in &[0.1, 0.7, 1.5, 2.5, 3.0] {
            for &theta in &[0.0, 0.3, 1.0, 2.0, 2.9] {
                for &psi in &[0.1, 0.8, 1.3, 2.4] {
                    let cfg = SphereConfig::new(rho, theta, psi, 0.0);
                    let p = p_poly(rho, theta.tan(), psi.tan()).unwrap();
                    let via_p = (theta.cos() * psi.cos()).powi(2) / (rho * rho.sin()) * p;
                    let direct = neg_h_ddot(&cfg).unwrap();
                    assert!((via_p - direct).abs() < 1e-10 * (1.0 + direct.abs()));
                }
            }
        }
        let rho = 1.2;
        assert!((p_poly(rho, 0.0, 0.0).unwrap() - b_minus_a(rho).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn factored_identity() {
        for k in 1..200 {
            let rho = PI * k as f64 / 200.0;
            let (a, b, _) = abg(rho).unwrap();
            let lhs = 2.0 * b - a - a * rho / rho.sin() + 2.0 / (rho * rho.sin()) * a_func(rho);
            assert!(lhs.abs() < 1e-12 * (1.0 + a * rho / rho.sin()), "{rho}: {lhs}");
        }
    }

    #[test]
    fn vector_form_matches_reduced_form() {
        for &rho in &[0.2, 1.0, 2.0, 3.0] {
            for &(theta, psi, wp) in &[(0.3, 1.1, 0.0), (1.4, 0.2, 0.7), (2.2, 2.9, 1.0)] {
                let cfg = SphereConfig::new(rho, theta, psi, wp);
                let emb = embedding(&cfg).unwrap();
                let rhat = &emb.r / rho;
                let v = neg_h_ddot_vectors(rho, &rhat, &emb.q, &emb.w).unwrap();
                let r = neg_h_ddot(&cfg).unwrap();
                assert!((v - r).abs() < 1e-10 * (1.0 + r.abs()), "{v} vs {r}");
            }
        }
    }

    #[test]
    fn fd_oracle_agrees_on_a_few_configs() {
        for &rho in &[0.05, 0.8, 2.0, PI - 0.05] {
            for &(theta, psi, wp) in &[(0.3, 1.1, 0.0), (1.4, 0.2, 1.0)] {
                let cfg = SphereConfig::new(rho, theta, psi, wp);
                let exact = neg_h_ddot(&cfg).unwrap();
                let (fd, _) = fd_neg_h_ddot(&cfg).unwrap();
                assert!((fd - exact).abs() <= oracle_tolerance(exact), "{rho}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn hessian_limits() {
        let cfg = SphereConfig::new(1.0, 0.2, FRAC_PI_2, 0.0);
        assert!((hessian_h(&cfg).unwrap() - 1.0).abs() < 1e-15);
        let cfg = SphereConfig::new(1e-6, 0.2, 0.5, 0.3);
        assert!((hessian_h(&cfg).unwrap() - cfg.w_norm_sq()).abs() < 1e-11);
    }
}
