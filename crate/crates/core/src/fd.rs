//! Finite-difference stencils shared by the oracles.
//!
//! Every derivative is taken with central differences at two step sizes `h`
//! and `h/2` and combined by one level of Richardson extrapolation, which
//! removes the leading `O(h^2)` truncation term.

use nalgebra::DVector;

use crate::error::Result;

/// Base step for fourth-order mixed derivatives (radians of displacement).
pub const FOURTH_STEP: f64 = 0.02;

/// First-derivative step `1e-5 (1 + scale)`.
pub fn first_step(scale: f64) -> f64 {
    1e-5 * (1.0 + scale.abs())
}

/// Number of halvings tried by [`mixed_third_adaptive`].
pub const LADDER: usize = 6;

/// Largest fourth-derivative step for a configuration with `room` left before
/// the nearest singularity of the cost; keeps the stencil inside the domain.
pub fn fourth_step(room: f64) -> f64 {
    FOURTH_STEP * (room / 0.25).clamp(0.1, 1.0)
}

/// One Richardson level for an `O(h^2)` scheme evaluated at `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Error estimate of [`richardson`], in the same units as the value.
pub fn richardson_residual(coarse: f64, fine: f64) -> f64 {
    (coarse - fine).abs() / 3.0
}

/// Richardson-extrapolated central first derivative of a vector-valued map.
pub fn derivative_vec<F>(f: F, h: f64) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let coarse = (f(h)? - f(-h)?) / (2.0 * h);
    let fine = (f(0.5 * h)? - f(-0.5 * h)?) / h;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Richardson-extrapolated central first derivative of a scalar map.
pub fn derivative<F>(f: F, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = (f(h)? - f(-h)?) / (2.0 * h);
    let fine = (f(0.5 * h)? - f(-0.5 * h)?) / h;
    Ok(richardson(coarse, fine))
}

/// Fourth-order five-point first derivative at 0.
pub fn five_point_first<F>(f: F, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((-f(2.0 * h)? + 8.0 * f(h)? - 8.0 * f(-h)? + f(-2.0 * h)?) / (12.0 * h))
}

/// Fourth-order five-point second derivative at 0, given `f(0)`.
pub fn five_point_second<F>(f: F, f0: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * f0 + 16.0 * f(-h)? - f(-2.0 * h)?) / (12.0 * h * h))
}

/// `d^4 F / ds^2 dt^2` at the origin from values of `F`, using the tensor
/// product of three-point second differences at steps `(hs, ht)` and
/// `(hs/2, ht/2)` (together a 5x5 grid). Returns `(value, residual)`.
pub fn mixed_fourth<F>(f: F, hs: f64, ht: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    const W: [f64; 3] = [1.0, -2.0, 1.0];
    let level = |k: f64| -> Result<f64> {
        let (a, b) = (hs * k, ht * k);
        let mut acc = 0.0;
        for (i, wi) in W.iter().enumerate() {
            for (j, wj) in W.iter().enumerate() {
                let s = (i as f64 - 1.0) * a;
                let t = (j as f64 - 1.0) * b;
                acc += wi * wj * f(s, t)?;
            }
        }
        Ok(acc / (a * a * b * b))
    };
    let coarse = level(1.0)?;
    let fine = level(0.5)?;
    Ok((richardson(coarse, fine), richardson_residual(coarse, fine)))
}

/// `d^3 D / ds^2 dt` at the origin, where `D(s, t)` is itself a `t`-derivative
/// known in closed form; same two-level scheme as [`mixed_fourth`].
pub fn mixed_third<F>(d: F, hs: f64, ht: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    const W: [f64; 3] = [1.0, -2.0, 1.0];
    let level = |k: f64| -> Result<f64> {
        let (a, b) = (hs * k, ht * k);
        let mut acc = 0.0;
        for (i, wi) in W.iter().enumerate() {
            let s = (i as f64 - 1.0) * a;
            acc += wi * (d(s, b)? - d(s, -b)?);
        }
        Ok(acc / (a * a * 2.0 * b))
    };
    let coarse = level(1.0)?;
    let fine = level(0.5)?;
    Ok((richardson(coarse, fine), richardson_residual(coarse, fine)))
}

/// Result of [`mixed_third_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub residual: f64,
    /// Factor applied to the initial steps for the accepted estimate.
    pub scale: f64,
}

/// [`mixed_third`] on the ladder `(hs, ht) 2^-k`, `k = -up..=LADDER`.
/// Adjacent levels form Richardson estimates; the accepted one is the
/// estimate whose neighbours agree with it best, which balances truncation
/// against round-off near singularities where no single step does both.
/// Levels above the initial step (`k < 0`) are optional: if one fails to
/// evaluate, it and every coarser level are dropped.
pub fn mixed_third_adaptive<F>(d: F, hs: f64, ht: f64, up: usize) -> Result<Adaptive>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    const W: [f64; 3] = [1.0, -2.0, 1.0];
    let level = |k: f64| -> Result<f64> {
        let (a, b) = (hs * k, ht * k);
        let mut acc = 0.0;
        for (i, wi) in W.iter().enumerate() {
            let s = (i as f64 - 1.0) * a;
            acc += wi * (d(s, b)? - d(s, -b)?);
        }
        Ok(acc / (a * a * 2.0 * b))
    };
    let mut coarse = Vec::with_capacity(up);
    for k in 1..=up as i32 {
        match level(2f64.powi(k)) {
            Ok(v) => coarse.push((v, 2f64.powi(k))),
            Err(_) => break,
        }
    }
    let mut levels: Vec<(f64, f64)> = coarse.into_iter().rev().collect();
    for k in 0..=LADDER {
        let scale = 0.5f64.powi(k as i32);
        levels.push((level(scale)?, scale));
    }
    let estimates: Vec<(f64, f64)> = levels
        .windows(2)
        .map(|w| (richardson(w[0].0, w[1].0), w[0].1))
        .collect();
    let mut best = Adaptive {
        value: estimates[0].0,
        residual: f64::INFINITY,
        scale: estimates[0].1,
    };
    for k in 0..estimates.len() {
        let e = estimates[k].0;
        let left = if k > 0 { (e - estimates[k - 1].0).abs() } else { 0.0 };
        let right = if k + 1 < estimates.len() {
            (e - estimates[k + 1].0).abs()
        } else {
            0.0
        };
        let spread = left.max(right);
        if spread < best.residual {
            best = Adaptive {
                value: e,
                residual: spread,
                scale: estimates[k].1,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_is_exact_for_quartic_truncation() {
        // central difference of sin has error h^2/6 cos + O(h^4)
        let d = derivative(|x| Ok((1.0 + x).sin()), 1e-3).unwrap();
        assert!((d - 1f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn mixed_fourth_of_polynomial() {
        // s^2 t^2 -> 4 ; plus terms the stencil must annihilate
        let f = |s: f64, t: f64| Ok(s * s * t * t + 3.0 * s.powi(4) + t.powi(3) - 2.0 * s * t + 1.0);
        let (v, r) = mixed_fourth(f, 0.1, 0.1).unwrap();
        assert!((v - 4.0).abs() < 1e-8, "{v}");
        assert!(r < 1e-8);
    }

    #[test]
    fn mixed_third_of_smooth_function() {
        // F = e^{s+t}, so D = dF/dt = e^{s+t}
        let (v, _) = mixed_third(|s, t| Ok((s + t).exp()), 0.02, 0.02).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn adaptive_ladder_handles_a_near_singularity() {
        // D = dF/dt for F = 1 / (r - s - t) with a pole at distance r
        let r = 0.05;
        let d = |s: f64, t: f64| Ok(1.0 / (r - s - t).powi(2));
        let exact = 24.0 / r.powi(5);
        let a = mixed_third_adaptive(d, 0.02, 0.02, 0).unwrap();
        assert!(((a.value - exact) / exact).abs() < 1e-6, "{a:?}");
        assert!(a.scale < 1.0);
        let flat = mixed_third_adaptive(|s, t| Ok((s + t).exp()), 0.02, 0.02, 0).unwrap();
        assert!((flat.value - 1.0).abs() < 1e-8 && flat.scale == 1.0, "{flat:?}");
    }

    #[test]
    fn failed_coarse_levels_are_dropped() {
        // D is undefined beyond |t| = 0.05, so only the first level above the
        // initial step evaluates
        let d = |s: f64, t: f64| {
            if t.abs() > 0.05 {
                Err(crate::error::Error::domain("outside"))
            } else {
                Ok((s + t).exp())
            }
        };
        let a = mixed_third_adaptive(d, 0.02, 0.02, 3).unwrap();
        assert!((a.value - 1.0).abs() < 1e-6 && a.scale <= 2.0, "{a:?}");
    }

    #[test]
    fn five_point_rules() {
        let f = |x: f64| Ok((0.3 + x).exp());
        let d1 = five_point_first(f, 1e-2).unwrap();
        let d2 = five_point_second(f, 0.3f64.exp(), 1e-2).unwrap();
        assert!((d1 - 0.3f64.exp()).abs() < 1e-9);
        assert!((d2 - 0.3f64.exp()).abs() < 1e-7);
    }
}
