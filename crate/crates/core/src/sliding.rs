//! The sliding-mountain function `f_t(y) = -c(y, xbar(t)) + c(x, xbar(t))`
//! along a c-segment `xbar(t)` from `x`, with checks of the maximum principle
//! (`f_t <= max(f_0, f_1)`) and of convexity in `t`.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{CUT_MARGIN, STENCIL_GUARD};
use crate::sampling::rng_for;

/// Points of the uniform `t` grid.
pub const T_GRID: usize = 33;

/// Relative pass threshold: margins must be at least `-1e-8 (1 + max |f|)`.
pub const CONVEXITY_TOL: f64 = 1e-8;

/// Step of the `t` and `s` differences in [`Scenario::g_diagnostics`].
pub const G_STEP: f64 = 1e-2;

/// A c-segment `xbar(t) = c_exp_x(q0 + t (q1 - q0))` and probe points.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cost: Cost,
    pub x: DVector<f64>,
    pub q0: DVector<f64>,
    pub q1: DVector<f64>,
    pub probes: Vec<DVector<f64>>,
    pub t_grid: Vec<f64>,
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

impl Scenario {
    /// Builds a scenario, dropping probe points that come within the cut-locus
    /// margin of some `xbar(t)` on the grid.
    pub fn new(cost: &Cost, x: DVector<f64>, q0: DVector<f64>, q1: DVector<f64>, candidates: Vec<DVector<f64>>) -> Result<Self> {
        let mut s = Self {
            cost: cost.clone(),
            x,
            q0,
            q1,
            probes: Vec::new(),
            t_grid: uniform_grid(T_GRID),
        };
        let segment = s
            .t_grid
            .iter()
            .map(|&t| s.xbar(t))
            .collect::<Result<Vec<_>>>()?;
        let m = cost.manifold();
        for xb in &segment {
            m.check_margin(&s.x, xb, CUT_MARGIN)?;
        }
        s.probes = candidates
            .into_iter()
            .filter(|y| segment.iter().all(|xb| cost.eval_raw(y, xb, CUT_MARGIN).is_ok()))
            .collect();
        Ok(s)
    }

    /// Random scenario on a half-squared-distance (or other radial) cost:
    /// both endpoint covectors keep `room` beyond the margin in every factor.
    pub fn random(cost: &Cost, probes: usize, seed: u64, index: u64) -> Result<Self> {
        let m = cost.manifold();
        let mut rng = rng_for(seed, index);
        let x = m.random_point(&mut rng);
        let room = 0.1;
        let q0 = m.random_tangent_within(&x, 0.0, room, 2.0, &mut rng);
        let q1 = m.random_tangent_within(&x, 0.0, room, 2.0, &mut rng);
        let candidates = (0..probes).map(|_| m.random_point(&mut rng)).collect();
        Self::new(cost, x, q0, q1, candidates)
    }

    pub fn xbar(&self, t: f64) -> Result<DVector<f64>> {
        let q = &self.q0 * (1.0 - t) + &self.q1 * t;
        self.cost.c_exp_raw(&self.x, &q, STENCIL_GUARD)
    }

    /// `f_t(y)`.
    pub fn f_eval(&self, t: f64, y: &DVector<f64>) -> Result<f64> {
        let xb = self.xbar(t)?;
        Ok(-self.cost.eval_raw(y, &xb, CUT_MARGIN)? + self.cost.eval_raw(&self.x, &xb, CUT_MARGIN)?)
    }

    fn profile(&self, y: &DVector<f64>) -> Result<Vec<f64>> {
        self.t_grid.iter().map(|&t| self.f_eval(t, y)).collect()
    }

    /// `g(s) = d^2/dt^2 f_t(x(s))` at `t0`, where `s -> (x(s), xbar(t0))` is
    /// the h-geodesic leaving `x` with velocity `p`.
    pub fn g_diagnostics(&self, t0: f64, p: &DVector<f64>) -> Result<GRecord> {
        let c = &self.cost;
        let xb = self.xbar(t0)?;
        let u = c.solve_h_velocity_raw(&self.x, &xb, p, STENCIL_GUARD)?;
        let anchor = c.neg_grad_raw(&xb, &self.x, STENCIL_GUARD)?;
        let curve = |s: f64| c.c_exp_raw(&xb, &(&anchor + &u * s), STENCIL_GUARD);
        let g = |s: f64| -> Result<f64> {
            let y = curve(s)?;
            let f = |dt: f64| -> Result<f64> {
                let xt = self.xbar(t0 + dt)?;
                Ok(-c.eval_raw(&y, &xt, STENCIL_GUARD)? + c.eval_raw(&self.x, &xt, STENCIL_GUARD)?)
            };
            fd::five_point_second(f, f(0.0)?, G_STEP)
        };
        // the s rules get one Richardson level over (hs, hs/2): at hs = 1e-2
        // their h^4 truncation alone reaches 1e-5 on the curved spaces
        let hs = G_STEP / p.norm().max(f64::MIN_POSITIVE);
        let g0 = g(0.0)?;
        let sixth = |coarse: f64, fine: f64| (16.0 * fine - coarse) / 15.0;
        let g1 = sixth(fd::five_point_first(g, hs)?, fd::five_point_first(g, 0.5 * hs)?);
        let g2 = sixth(fd::five_point_second(g, g0, hs)?, fd::five_point_second(g, g0, 0.5 * hs)?);
        Ok(GRecord {
            t0,
            g0,
            g_prime: g1,
            g_second: g2,
        })
    }
}

/// `g(0)`, `g'(0)`, `g''(0)` of [`Scenario::g_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GRecord {
    pub t0: f64,
    pub g0: f64,
    pub g_prime: f64,
    pub g_second: f64,
}

/// Worst margin over all scenarios, probes and grid times.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub check: &'static str,
    pub scenarios: usize,
    pub probes: usize,
    /// Smallest margin; negative values are violations.
    pub min_margin: f64,
    /// Smallest centred second difference in `t` (time-convexity only).
    pub min_second_difference: Option<f64>,
    pub scale: f64,
    pub threshold: f64,
    pub worst_scenario: Option<usize>,
    pub worst_t: Option<f64>,
    pub worst_probe: Option<Vec<f64>>,
    pub pass: bool,
}

struct Margins {
    chord: f64,
    second: f64,
    dasm: f64,
    chord_t: f64,
    dasm_t: f64,
    max_abs: f64,
}

fn margins(grid: &[f64], f: &[f64]) -> Margins {
    let (f0, f1) = (f[0], f[f.len() - 1]);
    let mut m = Margins {
        chord: f64::INFINITY,
        second: f64::INFINITY,
        dasm: f64::INFINITY,
        chord_t: 0.0,
        dasm_t: 0.0,
        max_abs: f.iter().fold(0.0, |a, v| a.max(v.abs())),
    };
    for (k, (&t, &ft)) in grid.iter().zip(f).enumerate() {
        let chord = (1.0 - t) * f0 + t * f1 - ft;
        if chord < m.chord {
            m.chord = chord;
            m.chord_t = t;
        }
        let dasm = f0.max(f1) - ft;
        if dasm < m.dasm {
            m.dasm = dasm;
            m.dasm_t = t;
        }
        if k > 0 && k + 1 < f.len() {
            m.second = m.second.min(f[k + 1] - 2.0 * ft + f[k - 1]);
        }
    }
    m
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Check {
    Dasm,
    TimeConvexity,
}

fn run_check(scenarios: &[Scenario], check: Check) -> Result<ConvexityReport> {
    let per_scenario = scenarios
        .par_iter()
        .map(|s| {
            s.probes
                .iter()
                .map(|y| Ok((y.clone(), margins(&s.t_grid, &s.profile(y)?))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ConvexityReport {
        check: match check {
            Check::Dasm => "dasm",
            Check::TimeConvexity => "time-convexity",
        },
        scenarios: scenarios.len(),
        probes: 0,
        min_margin: f64::INFINITY,
        min_second_difference: (check == Check::TimeConvexity).then_some(f64::INFINITY),
        scale: 1.0,
        threshold: 0.0,
        worst_scenario: None,
        worst_t: None,
        worst_probe: None,
        pass: false,
    };
    let mut max_abs: f64 = 0.0;
    for (i, probes) in per_scenario.iter().enumerate() {
        for (y, m) in probes {
            report.probes += 1;
            max_abs = max_abs.max(m.max_abs);
            let (margin, t) = match check {
                Check::Dasm => (m.dasm, m.dasm_t),
                Check::TimeConvexity => (m.chord, m.chord_t),
            };
            if margin < report.min_margin {
                report.min_margin = margin;
                report.worst_scenario = Some(i);
                report.worst_t = Some(t);
                report.worst_probe = Some(y.iter().copied().collect());
            }
            if let Some(sd) = report.min_second_difference.as_mut() {
                *sd = sd.min(m.second);
            }
        }
    }
    report.scale = 1.0 + max_abs;
    report.threshold = -CONVEXITY_TOL * report.scale;
    report.pass = report.min_margin >= report.threshold
        && report.min_second_difference.is_none_or(|sd| sd >= report.threshold);
    Ok(report)
}

/// `f_t(y) <= max(f_0(y), f_1(y))` on every grid point and probe.
pub fn check_dasm(scenarios: &[Scenario]) -> Result<ConvexityReport> {
    run_check(scenarios, Check::Dasm)
}

/// `f_t(y) <= (1 - t) f_0(y) + t f_1(y)` and nonnegative second differences.
pub fn check_time_convexity(scenarios: &[Scenario]) -> Result<ConvexityReport> {
    run_check(scenarios, Check::TimeConvexity)
}

/// `count` random scenarios with `probes` candidate points each.
pub fn random_scenarios(cost: &Cost, count: usize, probes: usize, seed: u64) -> Result<Vec<Scenario>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| Scenario::random(cost, probes, seed, i))
        .collect()
}

/// Worst `g` statistics over scenarios, with `p` random unit and `t0 = 1/2`.
#[derive(Debug, Clone, Serialize)]
pub struct GSummary {
    pub max_abs_g0: f64,
    pub max_abs_g_prime: f64,
    pub min_g_second: f64,
    pub records: usize,
}

pub fn g_summary(scenarios: &[Scenario], seed: u64) -> Result<GSummary> {
    let records = scenarios
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = rng_for(seed ^ 0x9e37_79b9, i as u64);
            let p = s.cost.manifold().random_unit_tangent(&s.x, &mut rng);
            s.g_diagnostics(0.5, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GSummary {
        max_abs_g0: records.iter().map(|r| r.g0.abs()).fold(0.0, f64::max),
        max_abs_g_prime: records.iter().map(|r| r.g_prime.abs()).fold(0.0, f64::max),
        min_g_second: records.iter().map(|r| r.g_second).fold(f64::INFINITY, f64::min),
        records: records.len(),
    })
}

/// A scenario on the product of two logarithmic costs that breaks the
/// maximum principle: the segment moves in an h-null direction for `p`
/// around the maximiser of `t -> -D^2_x c(x, xbar(t))[p, p]`, and the probes
/// are `x +- s p`.
#[derive(Debug, Clone)]
pub struct DasmViolation {
    pub scenario: Scenario,
    pub report: ConvexityReport,
}

pub fn log_product_dasm_violation(dim: usize, seed: u64) -> Result<DasmViolation> {
    let r = crate::manifold::Manifold::euclidean(dim)?;
    let log = Cost::log_euclidean(&r)?;
    let c = Cost::sum(vec![log.clone(), log])?;
    let m = c.manifold();
    for attempt in 0..64u64 {
        let mut rng = rng_for(seed, attempt);
        let x = m.random_point(&mut rng);
        let p = m.random_unit_tangent(&x, &mut rng);
        let qstar = m.random_unit_tangent(&x, &mut rng) * rng.random_range(0.5..2.0);
        let v = m.random_unit_tangent(&x, &mut rng);
        // h(p, xbar') = <p, q'> for this cost, so q' = v must be orthogonal to p
        let v = (&v - &p * p.dot(&v)).normalize();
        // -D^2_x c[p, p] = sum over factors of |p_i|^2 |q_i|^2 - 2 <q_i, p_i>^2,
        // a quadratic in tau along q* + tau v; centre the segment on its maximum
        let phi = |tau: f64| -> f64 {
            let q = &qstar + &v * tau;
            (0..2)
                .map(|k| {
                    let qi = q.rows(k * dim, dim);
                    let pi = p.rows(k * dim, dim);
                    pi.norm_squared() * qi.norm_squared() - 2.0 * qi.dot(&pi).powi(2)
                })
                .sum()
        };
        let curvature = phi(1.0) - 2.0 * phi(0.0) + phi(-1.0);
        if curvature >= -1e-3 {
            continue;
        }
        let tau_star = -(phi(1.0) - phi(-1.0)) / (2.0 * curvature);
        for &half in &[0.5, 0.25, 1.0] {
            for &s in &[1e-2, 3e-3, 3e-2] {
                let q0 = &qstar + &v * (tau_star - half);
                let q1 = &qstar + &v * (tau_star + half);
                if (0..=32).any(|k| {
                    let q = &q0 + (&q1 - &q0) * (k as f64 / 32.0);
                    (0..2).any(|f| q.rows(f * dim, dim).norm() < 0.2)
                }) {
                    continue;
                }
                let probes = vec![&x + &p * s, &x - &p * s];
                let scenario = match Scenario::new(&c, x.clone(), q0, q1, probes) {
                    Ok(sc) if sc.probes.len() == 2 => sc,
                    _ => continue,
                };
                let report = check_dasm(std::slice::from_ref(&scenario))?;
                if !report.pass {
                    return Ok(DasmViolation { scenario, report });
                }
            }
        }
    }
    Err(Error::Convergence {
        iterations: 64,
        defect: 0.0,
    })
}
