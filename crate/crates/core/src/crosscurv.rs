//! Finite-difference cross-curvature.
//!
//! `cross(p, pbar) = -2 d^4/ds^2 dt^2 c(x(s), xbar(t))` at `s = t = 0`, where
//! `s -> (x(s), xbar)` is an h-geodesic with `x'(0) = p` and
//! `xbar(t) = exp_xbar(t pbar)` is any curve with velocity `pbar`. The
//! `t`-derivative of the cost is taken in closed form (the gradient of the
//! cost paired with the geodesic velocity), so the stencil only differentiates
//! three more times; this keeps round-off near `1e-9` instead of `1e-6`.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{ManifoldPoint, TangentVector, CUT_MARGIN, STENCIL_GUARD};
use crate::sampling::{random_pair, rng_for, PairBounds};

/// Most ladder levels tried above the initial step in [`cross_raw`].
pub const UP_LEVELS: usize = 2;

/// Richardson levels used by [`cross_fd`].
pub const RICHARDSON_LEVELS: u32 = 1;

/// One evaluated cross-curvature sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSample {
    pub x: ManifoldPoint,
    pub xbar: ManifoldPoint,
    pub p: TangentVector,
    pub pbar: TangentVector,
    pub h_value: f64,
    pub cross_value: f64,
    pub fd_step: f64,
    pub richardson_levels: u32,
    pub residual_estimate: f64,
}

/// Serializable view of a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub x: Vec<f64>,
    pub xbar: Vec<f64>,
    pub p: Vec<f64>,
    pub pbar: Vec<f64>,
    pub h_value: f64,
    pub cross_value: f64,
    pub residual_estimate: f64,
}

impl CrossSample {
    pub fn record(&self) -> SampleRecord {
        SampleRecord {
            x: self.x.coords().iter().copied().collect(),
            xbar: self.xbar.coords().iter().copied().collect(),
            p: self.p.coords().iter().copied().collect(),
            pbar: self.pbar.coords().iter().copied().collect(),
            h_value: self.h_value,
            cross_value: self.cross_value,
            residual_estimate: self.residual_estimate,
        }
    }
}

/// Raw result of the stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossValue {
    pub value: f64,
    pub residual: f64,
    pub step: f64,
}

/// Cross-curvature on raw coordinates. `p` is tangent at `x`, `pbar` at `xbar`.
pub fn cross_raw(
    c: &Cost,
    x: &DVector<f64>,
    xbar: &DVector<f64>,
    p: &DVector<f64>,
    pbar: &DVector<f64>,
) -> Result<CrossValue> {
    let room = c.room_raw(x, xbar);
    let step = fd::fourth_step(room);
    let (np, npbar) = (p.norm(), pbar.norm());
    if np == 0.0 || npbar == 0.0 {
        return Ok(CrossValue {
            value: 0.0,
            residual: 0.0,
            step,
        });
    }
    let m = c.manifold();
    let u = c.solve_h_velocity_raw(x, xbar, p, STENCIL_GUARD)?;
    let anchor = c.neg_grad_raw(xbar, x, STENCIL_GUARD)?;
    let curve = |s: f64| c.c_exp_raw(xbar, &(&anchor + &u * s), STENCIL_GUARD);
    // d/dt c(x(s), xbar(t)) = -<(-D_xbar c), xbar'(t)>
    let dt_cost = |s: f64, t: f64| -> Result<f64> {
        let xs = curve(s)?;
        let (xt, vt) = m.geodesic(xbar, pbar, t, STENCIL_GUARD)?;
        Ok(-c.neg_grad_raw(&xt, &xs, STENCIL_GUARD)?.dot(&vt))
    };
    // the stencil moves x and xbar by about one step each
    let up = (0..=UP_LEVELS)
        .take_while(|&k| step * 2f64.powi(k as i32) <= 0.5 * (room - STENCIL_GUARD))
        .last()
        .unwrap_or(0);
    let a = fd::mixed_third_adaptive(dt_cost, step / np, step / npbar, up)?;
    Ok(CrossValue {
        value: -2.0 * a.value,
        residual: 2.0 * a.residual,
        step: step * a.scale,
    })
}

fn check_inputs(
    c: &Cost,
    x: &ManifoldPoint,
    xbar: &ManifoldPoint,
    p: &TangentVector,
    pbar: &TangentVector,
) -> Result<()> {
    // validates manifolds and the cut-locus margin
    c.eval_raw(x.coords(), xbar.coords(), CUT_MARGIN).and_then(|_| {
        if x.manifold() != c.manifold() || xbar.manifold() != c.manifold() {
            return Err(Error::domain("points do not live on the cost's manifold"));
        }
        Ok(())
    })?;
    let m = c.manifold();
    if (p.base().coords() - x.coords()).amax() > 1e-12
        || (pbar.base().coords() - xbar.coords()).amax() > 1e-12
    {
        return Err(Error::domain("tangent vectors are not based at (x, xbar)"));
    }
    debug_assert!(m.tangency_defect(x.coords(), p.coords()) < 1e-8);
    Ok(())
}

/// Cross-curvature of `c` at `(x, xbar)` in the plane `(p + 0) ^ (0 + pbar)`.
pub fn cross_fd(
    c: &Cost,
    x: &ManifoldPoint,
    xbar: &ManifoldPoint,
    p: &TangentVector,
    pbar: &TangentVector,
) -> Result<CrossSample> {
    check_inputs(c, x, xbar, p, pbar)?;
    let cv = cross_raw(c, x.coords(), xbar.coords(), p.coords(), pbar.coords())?;
    let h_value = c.h_raw(x.coords(), xbar.coords(), p.coords(), pbar.coords(), STENCIL_GUARD)?;
    Ok(CrossSample {
        x: x.clone(),
        xbar: xbar.clone(),
        p: p.clone(),
        pbar: pbar.clone(),
        h_value,
        cross_value: cv.value,
        fd_step: cv.step,
        richardson_levels: RICHARDSON_LEVELS,
        residual_estimate: cv.residual,
    })
}

/// Scaling `lambda` and sign choice that make `h_plus + lambda^2 h_minus`
/// vanish after possibly flipping the sign of `pbar_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    pub lambda: f64,
    /// Whether `pbar_plus` had to be negated so that `h_plus <= 0`.
    pub flipped: bool,
}

/// `h_plus` is `h(p_plus + pbar_plus)` on the first factor, `h_minus > 0` the
/// value on the second factor's pair (for geodesic velocities of the
/// half-squared distance, the squared length).
pub fn balance(h_plus: f64, h_minus: f64) -> Result<Balance> {
    if !(h_minus > 0.0) {
        return Err(Error::NotNullable(format!(
            "second factor must have positive h, got {h_minus}"
        )));
    }
    // h is odd in pbar, so a positive value becomes negative after a flip
    let (hp, flipped) = if h_plus > 0.0 { (-h_plus, true) } else { (h_plus, false) };
    if !(hp <= 0.0) {
        return Err(Error::NotNullable(format!("h_plus = {h_plus}")));
    }
    Ok(Balance {
        lambda: (-hp / h_minus).sqrt(),
        flipped,
    })
}

/// An h-null pair on a sum cost built from one pair per factor.
#[derive(Debug, Clone)]
pub struct NullPair {
    pub cost: Cost,
    pub x: DVector<f64>,
    pub xbar: DVector<f64>,
    pub p: DVector<f64>,
    pub pbar: DVector<f64>,
    pub balance: Balance,
    pub h_plus: f64,
    pub h_minus: f64,
    pub h_value: f64,
}

/// Combines `(p_plus, ±pbar_plus)` on `c_plus` with `lambda (p_minus, pbar_minus)`
/// on `c_minus` into an h-null pair of `c_plus + c_minus`.
#[allow(clippy::too_many_arguments)]
pub fn null_pair(
    c_plus: &Cost,
    c_minus: &Cost,
    x_plus: &DVector<f64>,
    xbar_plus: &DVector<f64>,
    p_plus: &DVector<f64>,
    pbar_plus: &DVector<f64>,
    x_minus: &DVector<f64>,
    xbar_minus: &DVector<f64>,
    p_minus: &DVector<f64>,
    pbar_minus: &DVector<f64>,
) -> Result<NullPair> {
    let h_plus = c_plus.h_raw(x_plus, xbar_plus, p_plus, pbar_plus, STENCIL_GUARD)?;
    let h_minus = c_minus.h_raw(x_minus, xbar_minus, p_minus, pbar_minus, STENCIL_GUARD)?;
    let bal = balance(h_plus, h_minus)?;
    let sign = if bal.flipped { -1.0 } else { 1.0 };
    let cost = Cost::sum(vec![c_plus.clone(), c_minus.clone()])?;
    let m = cost.manifold();
    let x = m.join(&[x_plus.clone(), x_minus.clone()]);
    let xbar = m.join(&[xbar_plus.clone(), xbar_minus.clone()]);
    let p = m.join(&[p_plus.clone(), p_minus * bal.lambda]);
    let pbar = m.join(&[pbar_plus * sign, pbar_minus * bal.lambda]);
    let h_value = cost.h_raw(&x, &xbar, &p, &pbar, STENCIL_GUARD)?;
    Ok(NullPair {
        cost,
        x,
        xbar,
        p,
        pbar,
        balance: bal,
        h_plus,
        h_minus,
        h_value,
    })
}

/// Claims checked by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Claim {
    /// `cross >= 0` on all pairs.
    NonNegCross,
    /// `cross >= 0` on h-null pairs.
    A3w,
    /// `cross > 0` on h-null pairs with `p != 0 != pbar`.
    A3s,
    /// `cross >= 0` with equality only for the connecting geodesic's endpoint
    /// velocities, and quadratic growth away from them.
    AlmostPositive,
}

impl Claim {
    pub fn id(&self) -> &'static str {
        match self {
            Claim::NonNegCross => "nonneg",
            Claim::A3w => "a3w",
            Claim::A3s => "a3s",
            Claim::AlmostPositive => "almost-positive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nonneg" => Ok(Claim::NonNegCross),
            "a3w" => Ok(Claim::A3w),
            "a3s" => Ok(Claim::A3s),
            "almost-positive" => Ok(Claim::AlmostPositive),
            other => Err(Error::Parse(format!("unknown claim '{other}'"))),
        }
    }
}

/// Strict floor on `cross / (|p|^2 |pbar|^2)` for the A3s claim.
pub const A3S_FLOOR: f64 = 1e-3;

/// Tilt angles used by the almost-positivity probe.
pub const TILTS: [f64; 3] = [0.0, 0.1, 0.2];

/// Smallest fitted `c0` accepted as positive by the almost-positivity probe;
/// finite-difference noise on a vanishing cross-curvature stays below it.
pub const ALMOST_POSITIVE_FLOOR: f64 = 1e-6;

/// What to sample in [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    pub base_pairs: usize,
    pub directions: usize,
    pub seed: u64,
    pub bounds: PairBounds,
    /// On products, also test split pairs `p` in one factor, `pbar` in another.
    pub split_pairs: bool,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            base_pairs: 40,
            directions: 5,
            seed: crate::sampling::DEFAULT_SEED,
            bounds: PairBounds::default(),
            split_pairs: true,
        }
    }
}

/// Outcome of a classification scan. `violations` are the samples that break
/// the claim's predicate (`cross < -tolerance`, or below the strict floor for
/// A3s).
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub claim: Claim,
    pub manifold: String,
    pub cost: String,
    pub min_cross: f64,
    pub max_cross: f64,
    /// Smallest `cross / (|p|^2 |pbar|^2)`.
    pub min_normalized: f64,
    pub argmin: Option<CrossSample>,
    pub n_samples: usize,
    pub null_pair_count: usize,
    pub max_abs_h: f64,
    pub violations: Vec<CrossSample>,
    pub tolerance: f64,
    pub strict_floor: Option<f64>,
    /// Fitted `c0` in `cross >= c0 (eps^2 + epsbar^2)` (almost positivity).
    pub fitted_c0: Option<f64>,
    /// Largest `|cross|` at the connecting geodesic's own velocities.
    pub equality_residual: Option<f64>,
    pub pass: bool,
}

/// Nonnegativity tolerance `1e-6 (1 + |max_cross|)`.
pub fn nonneg_tolerance(max_cross: f64) -> f64 {
    1e-6 * (1.0 + max_cross.abs())
}

/// Null tolerance on `|h|` for unit-scale vectors.
pub const NULL_TOL: f64 = 1e-9;

fn sample_raw(
    c: &Cost,
    x: &DVector<f64>,
    xbar: &DVector<f64>,
    p: DVector<f64>,
    pbar: DVector<f64>,
) -> Result<CrossSample> {
    let m = c.manifold();
    let xp = ManifoldPoint::from_raw(m, x.clone());
    let xbp = ManifoldPoint::from_raw(m, xbar.clone());
    let cv = cross_raw(c, x, xbar, &p, &pbar)?;
    let h_value = c.h_raw(x, xbar, &p, &pbar, STENCIL_GUARD)?;
    Ok(CrossSample {
        p: TangentVector::from_raw(&xp, p),
        pbar: TangentVector::from_raw(&xbp, pbar),
        x: xp,
        xbar: xbp,
        h_value,
        cross_value: cv.value,
        fd_step: cv.step,
        richardson_levels: RICHARDSON_LEVELS,
        residual_estimate: cv.residual,
    })
}

/// An h-null `pbar` for a given `p`: `nu pbar0 - mu pbar1` with
/// `mu = h(p, pbar0)`, `nu = h(p, pbar1)`, normalised. `pbar0`, `pbar1` are
/// orthonormal, so the combination has length `sqrt(mu^2 + nu^2)` and the
/// normalisation does not amplify the error of `h`.
pub fn null_partner<R: Rng + ?Sized>(
    c: &Cost,
    x: &DVector<f64>,
    xbar: &DVector<f64>,
    p: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let m = c.manifold();
    for _ in 0..16 {
        let b0 = m.random_unit_tangent(xbar, rng);
        let b1 = m.random_unit_tangent(xbar, rng);
        let b1 = &b1 - &b0 * b0.dot(&b1);
        let n1 = b1.norm();
        if n1 < 1e-3 {
            continue;
        }
        let b1 = b1 / n1;
        let mu = c.h_raw(x, xbar, p, &b0, STENCIL_GUARD)?;
        let nu = c.h_raw(x, xbar, p, &b1, STENCIL_GUARD)?;
        let v = b0 * nu - b1 * mu;
        let n = v.norm();
        if n > 0.0 {
            return Ok(v / n);
        }
    }
    Err(Error::NotNullable("could not find an independent null partner".into()))
}

fn unit_samples_for_pair(
    c: &Cost,
    claim: Claim,
    spec: &SamplerSpec,
    index: usize,
) -> Result<Vec<CrossSample>> {
    let m = c.manifold();
    let mut rng = rng_for(spec.seed, index as u64);
    let (x, xbar) = random_pair(m, spec.bounds, &mut rng);
    let mut out = Vec::with_capacity(spec.directions);
    for _ in 0..spec.directions {
        let p = m.random_unit_tangent(&x, &mut rng);
        let pbar = match claim {
            Claim::NonNegCross => m.random_unit_tangent(&xbar, &mut rng),
            _ => null_partner(c, &x, &xbar, &p, &mut rng)?,
        };
        out.push(sample_raw(c, &x, &xbar, p, pbar)?);
    }
    if spec.split_pairs && m.is_product() {
        let factors = m.factors();
        let parts_x = m.split(&x);
        let parts_xbar = m.split(&xbar);
        for i in 0..factors.len() {
            for j in 0..factors.len() {
                if i == j {
                    continue;
                }
                let mut p_parts: Vec<_> = parts_x.iter().map(|v| DVector::zeros(v.len())).collect();
                let mut pbar_parts: Vec<_> = parts_xbar.iter().map(|v| DVector::zeros(v.len())).collect();
                p_parts[i] = factors[i].manifold.random_unit_tangent(&parts_x[i], &mut rng);
                pbar_parts[j] = factors[j].manifold.random_unit_tangent(&parts_xbar[j], &mut rng);
                out.push(sample_raw(c, &x, &xbar, m.join(&p_parts), m.join(&pbar_parts))?);
            }
        }
    }
    Ok(out)
}

struct AlmostPositiveProbe {
    samples: Vec<CrossSample>,
    ratios: Vec<f64>,
    equality: f64,
}

/// Angle between the line of `v` and the unit vector `dir`.
fn line_angle(v: &DVector<f64>, dir: &DVector<f64>) -> f64 {
    let n = v.norm();
    if n == 0.0 {
        return 0.0;
    }
    (v.dot(dir).abs() / n).min(1.0).acos()
}

fn almost_positive_for_pair(c: &Cost, spec: &SamplerSpec, index: usize) -> Result<AlmostPositiveProbe> {
    let m = c.manifold();
    let mut rng = rng_for(spec.seed, index as u64);
    let (x, xbar) = random_pair(m, spec.bounds, &mut rng);
    let e = m.log_raw(&x, &xbar, STENCIL_GUARD)?.normalize();
    let ebar = -m.log_raw(&xbar, &x, STENCIL_GUARD)?.normalize();
    let orth = |base: &DVector<f64>, dir: &DVector<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
        let v = m.random_unit_tangent(base, rng);
        (&v - dir * dir.dot(&v)).normalize()
    };
    let zero = sample_raw(c, &x, &xbar, e.clone(), ebar.clone())?;
    let equality = zero.cross_value.abs();
    let mut candidates = Vec::new();
    for _ in 0..spec.directions {
        let a = orth(&x, &e, &mut rng);
        let b = orth(&xbar, &ebar, &mut rng);
        for &eps in &TILTS {
            for &epsbar in &TILTS {
                if eps == 0.0 && epsbar == 0.0 {
                    continue;
                }
                candidates.push((&e * eps.cos() + &a * eps.sin(), &ebar * epsbar.cos() + &b * epsbar.sin()));
            }
        }
    }
    if spec.split_pairs && m.is_product() {
        // unit vectors confined to single factors; on a product these sit far
        // from the geodesic directions yet can have vanishing cross-curvature
        let factors = m.factors();
        let (px, pxb) = (m.split(&x), m.split(&xbar));
        for i in 0..factors.len() {
            for j in 0..factors.len() {
                let mut p_parts: Vec<_> = px.iter().map(|v| DVector::zeros(v.len())).collect();
                let mut pbar_parts: Vec<_> = pxb.iter().map(|v| DVector::zeros(v.len())).collect();
                p_parts[i] = factors[i].manifold.random_unit_tangent(&px[i], &mut rng);
                pbar_parts[j] = factors[j].manifold.random_unit_tangent(&pxb[j], &mut rng);
                candidates.push((m.join(&p_parts), m.join(&pbar_parts)));
            }
        }
    }
    let mut samples = vec![zero];
    let mut ratios = Vec::with_capacity(candidates.len());
    for (p, pbar) in candidates {
        let dev = line_angle(&p, &e).powi(2) + line_angle(&pbar, &ebar).powi(2);
        let s = sample_raw(c, &x, &xbar, p, pbar)?;
        if dev > 0.0 {
            ratios.push(s.cross_value / dev);
        }
        samples.push(s);
    }
    Ok(AlmostPositiveProbe {
        samples,
        ratios,
        equality,
    })
}

/// Scans sampled configurations for a claim. Evaluation is parallel; the
/// reduction runs in sample order, so the report does not depend on the
/// thread count.
pub fn classify(c: &Cost, spec: &SamplerSpec, claim: Claim) -> Result<ClassificationReport> {
    let (samples, fitted_c0, equality_residual) = if claim == Claim::AlmostPositive {
        let probes = (0..spec.base_pairs)
            .into_par_iter()
            .map(|i| almost_positive_for_pair(c, spec, i))
            .collect::<Result<Vec<_>>>()?;
        let c0 = probes
            .iter()
            .flat_map(|pr| pr.ratios.iter().copied())
            .fold(f64::INFINITY, f64::min);
        let eq = probes.iter().map(|pr| pr.equality).fold(0.0, f64::max);
        let samples: Vec<_> = probes.into_iter().flat_map(|pr| pr.samples).collect();
        (samples, Some(c0), Some(eq))
    } else {
        let nested = (0..spec.base_pairs)
            .into_par_iter()
            .map(|i| unit_samples_for_pair(c, claim, spec, i))
            .collect::<Result<Vec<_>>>()?;
        (nested.into_iter().flatten().collect::<Vec<_>>(), None, None)
    };

    let mut min_cross = f64::INFINITY;
    let mut max_cross = f64::NEG_INFINITY;
    let mut min_normalized = f64::INFINITY;
    let mut argmin = None;
    let mut max_abs_h: f64 = 0.0;
    let mut null_pair_count = 0;
    for s in &samples {
        if s.cross_value < min_cross {
            min_cross = s.cross_value;
            argmin = Some(s.clone());
        }
        max_cross = max_cross.max(s.cross_value);
        let scale = s.p.norm().powi(2) * s.pbar.norm().powi(2);
        min_normalized = min_normalized.min(s.cross_value / scale);
        max_abs_h = max_abs_h.max(s.h_value.abs());
        if s.h_value.abs() <= NULL_TOL * (1.0 + s.p.norm() * s.pbar.norm()) {
            null_pair_count += 1;
        }
    }
    let tolerance = nonneg_tolerance(max_cross);
    let needs_null = matches!(claim, Claim::A3w | Claim::A3s);
    if needs_null && null_pair_count != samples.len() {
        return Err(Error::NotNullable(format!(
            "{} of {} scan pairs are not h-null (max |h| = {max_abs_h:.3e})",
            samples.len() - null_pair_count,
            samples.len()
        )));
    }
    let strict_floor = (claim == Claim::A3s).then_some(A3S_FLOOR);
    let violations: Vec<CrossSample> = samples
        .iter()
        .filter(|s| match claim {
            Claim::A3s => s.cross_value < A3S_FLOOR * s.p.norm().powi(2) * s.pbar.norm().powi(2),
            _ => s.cross_value < -tolerance,
        })
        .cloned()
        .collect();
    let pass = match claim {
        Claim::AlmostPositive => {
            violations.is_empty()
                && fitted_c0.is_some_and(|c0| c0 >= ALMOST_POSITIVE_FLOOR)
                && equality_residual.is_some_and(|e| e <= tolerance)
        }
        _ => violations.is_empty(),
    };
    Ok(ClassificationReport {
        claim,
        manifold: c.manifold().to_string(),
        cost: c.to_string(),
        min_cross,
        max_cross,
        min_normalized,
        argmin,
        n_samples: samples.len(),
        null_pair_count,
        max_abs_h,
        violations,
        tolerance,
        strict_floor,
        fitted_c0,
        equality_residual,
        pass,
    })
}

/// Result of [`alternative_a3_concavity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub t: Vec<f64>,
    /// `phi(t) = D^2_x c(x, c_exp_x(q0 + t q))[p, p]`.
    pub phi: Vec<f64>,
    /// `phi''(t)` on the same grid.
    pub second_differences: Vec<f64>,
    pub max_second_difference: f64,
}

/// The Hessian in `x` of `c(., y)` in direction `p`, from the closed-form
/// gradient differentiated once along the geodesic `exp_x(s p)`.
pub fn hessian_along(c: &Cost, x: &DVector<f64>, y: &DVector<f64>, p: &DVector<f64>) -> Result<f64> {
    let np = p.norm();
    if np == 0.0 {
        return Ok(0.0);
    }
    let m = c.manifold();
    fd::derivative(
        |s| {
            let (xs, vs) = m.geodesic(x, p, s, STENCIL_GUARD)?;
            Ok(-c.neg_grad_raw(&xs, y, STENCIL_GUARD)?.dot(&vs))
        },
        1e-3 / np,
    )
}

/// Step of the `t` second difference in [`alternative_a3_concavity`].
pub const CONCAVITY_STEP: f64 = 1e-2;

/// `phi(t) = p^i p^j c_ij(x, c_exp_x(q0 + t q))` on `samples` points of
/// `[0, 1]`, and its second derivative (five-point rule).
pub fn alternative_a3_concavity(
    c: &Cost,
    x: &ManifoldPoint,
    p: &TangentVector,
    q0: &DVector<f64>,
    q: &DVector<f64>,
    samples: usize,
) -> Result<ConcavityReport> {
    let xs = x.coords();
    let phi = |t: f64| -> Result<f64> {
        let y = c.c_exp_raw(xs, &(q0 + q * t), CUT_MARGIN)?;
        hessian_along(c, xs, &y, p.coords())
    };
    let n = samples.max(2);
    let mut ts = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    let h = CONCAVITY_STEP / (1.0 + q.norm());
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let v = phi(t)?;
        ts.push(t);
        values.push(v);
        second.push(fd::five_point_second(|d| phi(t + d), v, h)?);
    }
    let max_second_difference = second.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityReport {
        t: ts,
        phi: values,
        second_differences: second,
        max_second_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Manifold;

    #[test]
    fn balance_examples() {
        assert_eq!(balance(0.0, 4.0).unwrap().lambda, 0.0);
        let b = balance(-4.0, 4.0).unwrap();
        assert_eq!(b.lambda, 1.0);
        assert!(!b.flipped);
        let b = balance(9.0, 4.0).unwrap();
        assert_eq!(b.lambda, 1.5);
        assert!(b.flipped);
        assert!(matches!(balance(-1.0, 0.0), Err(Error::NotNullable(_))));
    }

    #[test]
    fn euclidean_cross_vanishes() {
        let r3 = Manifold::euclidean(3).unwrap();
        let c = Cost::half_square(&r3);
        let mut rng = rng_for(1, 0);
        for _ in 0..10 {
            let (x, y) = random_pair(&r3, PairBounds::default(), &mut rng);
            let p = r3.random_unit_tangent(&x, &mut rng);
            let q = r3.random_unit_tangent(&y, &mut rng);
            let v = cross_raw(&c, &x, &y, &p, &q).unwrap();
            assert!(v.value.abs() < 1e-7, "{}", v.value);
        }
    }

    #[test]
    fn zero_vectors_give_zero() {
        let s2 = Manifold::sphere(2).unwrap();
        let c = Cost::half_square(&s2);
        let mut rng = rng_for(2, 0);
        let (x, y) = random_pair(&s2, PairBounds::default(), &mut rng);
        let p = s2.random_unit_tangent(&x, &mut rng);
        let v = cross_raw(&c, &x, &y, &p, &DVector::zeros(3)).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn claim_ids_round_trip() {
        for claim in [Claim::NonNegCross, Claim::A3w, Claim::A3s, Claim::AlmostPositive] {
            assert_eq!(Claim::parse(claim.id()).unwrap(), claim);
        }
        assert!(Claim::parse("a4").is_err());
    }

    #[test]
    fn null_partners_are_null() {
        let s2 = Manifold::sphere(2).unwrap();
        let c = Cost::half_square(&s2);
        let mut rng = rng_for(3, 0);
        for _ in 0..10 {
            let (x, y) = random_pair(&s2, PairBounds::default(), &mut rng);
            let p = s2.random_unit_tangent(&x, &mut rng);
            let q = null_partner(&c, &x, &y, &p, &mut rng).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
            assert!(c.h_raw(&x, &y, &p, &q, STENCIL_GUARD).unwrap().abs() < NULL_TOL);
        }
    }
}
