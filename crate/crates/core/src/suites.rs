//! Verification suites. Each suite checks a group of claims and returns one
//! [`VerificationReport`] per claim (and per manifold where it sweeps several).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{
    cpn_curvature_probe, log_cost_quadratic, log_product_counterexample, null_construction, product_additivity,
    MinusVectors, Submersion,
};
use crate::cost::Cost;
use crate::crosscurv::{self, alternative_a3_concavity, classify, cross_raw, Claim, SamplerSpec, NULL_TOL};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector, CUT_MARGIN, STENCIL_GUARD};
use crate::report::{Polarity, Table, VerificationReport};
use crate::sampling::{random_pair, rng_for, PairBounds, DEFAULT_SEED};
use crate::sliding;
use crate::sphere::{self, SphereConfig};

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 8] = [
    "sphere",
    "product",
    "submersion",
    "cross",
    "dasm",
    "time-convexity",
    "counterexample",
    "all",
];

/// Rounding allowance for closed-form values that vanish exactly: `64 eps`
/// times the magnitude of the largest term.
pub const ROUNDING_ULPS: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: Option<usize>,
    pub quick: bool,
    /// `(rho, theta, psi)` points of the sphere scan.
    pub grid: Option<[usize; 3]>,
    pub manifold: Option<String>,
    pub cost: Option<String>,
    /// Comma-separated factors of the product suite, e.g. `S2,S2`.
    pub factors: Option<String>,
    pub total: Option<String>,
    pub base: Option<String>,
    pub dim: Option<usize>,
    pub claim: Option<String>,
    /// Per-claim tolerance overrides; they may only loosen.
    pub tolerances: BTreeMap<String, f64>,
    /// Whether the caller wants the suite's CSV table.
    pub table: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: None,
            quick: false,
            grid: None,
            manifold: None,
            cost: None,
            factors: None,
            total: None,
            base: None,
            dim: None,
            claim: None,
            tolerances: BTreeMap::new(),
            table: false,
        }
    }
}

impl SuiteOptions {
    fn count(&self, full: usize, quick: usize) -> usize {
        self.samples.unwrap_or(if self.quick { quick } else { full })
    }

    /// The built-in tolerance of `claim`, or its override. Larger is looser.
    pub fn tolerance(&self, claim: &str, builtin: f64) -> Result<f64> {
        match self.tolerances.get(claim) {
            Some(&t) if !(t >= builtin) => Err(Error::Parse(format!(
                "tolerance override {t:e} for '{claim}' is tighter than the built-in {builtin:e}"
            ))),
            Some(&t) => Ok(t),
            None => Ok(builtin),
        }
    }

    fn spec(&self, full: usize, quick: usize) -> SamplerSpec {
        SamplerSpec {
            base_pairs: self.count(full, quick),
            seed: self.seed,
            ..SamplerSpec::default()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutput {
    pub reports: Vec<VerificationReport>,
    pub table: Option<Table>,
}

impl SuiteOutput {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    fn extend(&mut self, other: SuiteOutput) {
        self.reports.extend(other.reports);
        if self.table.is_none() {
            self.table = other.table;
        }
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteOutput> {
    match name {
        "sphere" => sphere_suite(opts),
        "product" => product_suite(opts),
        "submersion" => submersion_suite(opts),
        "cross" => cross_suite(opts),
        "dasm" => dasm_suite(opts),
        "time-convexity" => time_convexity_suite(opts),
        "counterexample" => counterexample_suite(opts),
        "all" => {
            let mut out = SuiteOutput::default();
            for suite in &SUITES[..SUITES.len() - 1] {
                out.extend(run_suite(suite, opts)?);
            }
            Ok(out)
        }
        other => Err(Error::Parse(format!("unknown suite '{other}'"))),
    }
}

fn fold_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn argmax<T>(items: &[T], key: impl Fn(&T) -> f64) -> Option<&T> {
    items
        .iter()
        .fold(None, |best: Option<(&T, f64)>, it| {
            let k = key(it);
            match best {
                Some((_, bk)) if bk >= k => best,
                _ => Some((it, k)),
            }
        })
        .map(|(it, _)| it)
}

// ---------------------------------------------------------------- sphere

/// Random configuration for the oracle comparison: `rho` in
/// `[0.05, pi - 0.05]`, unit `q`, `|w1|` and `|w_perp|` in `[0, 1]`.
pub fn random_sphere_config(seed: u64, index: u64) -> SphereConfig {
    let mut rng = rng_for(seed, index);
    SphereConfig {
        rho: rng.random_range(CUT_MARGIN..PI - CUT_MARGIN),
        theta: rng.random_range(0.0..PI),
        psi: rng.random_range(0.0..PI),
        q_norm: 1.0,
        w_plane_norm: rng.random_range(0.0..1.0),
        w_perp_norm: rng.random_range(0.0..1.0),
    }
}

/// Cell-centred grid on `(0, pi)`.
fn centred(n: usize) -> Vec<f64> {
    (0..n).map(|k| PI * (k as f64 + 0.5) / n as f64).collect()
}

/// Scan rows on the `(rho, theta, psi)` grid for `w_perp` in `{0, 1}`, in
/// lexicographic order of the grid indices.
pub fn sphere_scan(grid: [usize; 3], with_fd: bool) -> Result<Vec<sphere::ScanRow>> {
    let [nr, nt, np] = grid;
    let rhos = centred(nr);
    let thetas = centred(nt);
    let psis = centred(np);
    let mut cells = Vec::with_capacity(nr * nt * np * 2);
    for &r in &rhos {
        for &t in &thetas {
            for &p in &psis {
                for w in [0.0, 1.0] {
                    cells.push((r, t, p, w));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(r, t, p, w)| sphere::scan_row(r, t, p, w, with_fd))
        .collect()
}

pub fn scan_table(rows: &[sphere::ScanRow]) -> Table {
    let mut t = Table::new(&["rho", "theta", "psi", "w_perp", "negHddot", "P", "D", "fd", "abs_err"]);
    for r in rows {
        t.rows.push(vec![
            Some(r.rho),
            Some(r.theta),
            Some(r.psi),
            Some(r.w_perp),
            Some(r.neg_h_ddot),
            r.p,
            r.d,
            r.fd,
            r.abs_err,
        ]);
    }
    t
}

#[derive(Serialize)]
struct OracleRow {
    config: SphereConfig,
    closed_form: f64,
    fd: f64,
    cross: f64,
}

pub fn sphere_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();

    // a(rho) on [0, pi]
    let start = Instant::now();
    let zero_tol = opts.tolerance("a_nonneg", 1e-8)?;
    let n = 10_000;
    let points: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let rho = PI * k as f64 / (n - 1) as f64;
            (rho, sphere::a_func(rho))
        })
        .collect();
    let stray_zeros = points
        .iter()
        .filter(|(r, a)| *a <= 0.0 && r.min(PI - r) > zero_tol)
        .count();
    let lowest = points.iter().copied().fold((0.0, f64::INFINITY), |b, p| if p.1 < b.1 { p } else { b });
    out.reports.push(
        VerificationReport::new(
            "a_nonneg",
            "a(rho) = sin^2 rho + rho sin rho - rho^2 (1 + cos rho) >= 0 on [0, pi], zero only at the endpoints",
            Polarity::Holds,
        )
        .stats(points.iter().map(|p| p.1))
        .worst(lowest)
        .tolerance(zero_tol)
        .with("stray_zeros", stray_zeros)
        .verdict(lowest.1 >= 0.0 && stray_zeros == 0)
        .timed(start),
    );

    // discriminant on a (rho, T) grid
    let start = Instant::now();
    let t_max: f64 = 1e3;
    let ts: Vec<f64> = (0..41).map(|k| (t_max.asinh() * (k as f64 - 20.0) / 20.0).sinh()).collect();
    let mut ds = Vec::with_capacity(1000 * ts.len());
    for k in 1..=1000 {
        let rho = PI * k as f64 / 1001.0;
        for &t in &ts {
            ds.push((rho, t, sphere::discriminant(rho, t)?));
        }
    }
    let worst = ds.iter().copied().fold((0.0, 0.0, f64::NEG_INFINITY), |b, d| if d.2 > b.2 { d } else { b });
    out.reports.push(
        VerificationReport::new(
            "D_negative",
            "the discriminant of P in S is negative for every rho in (0, pi) and every T",
            Polarity::Holds,
        )
        .stats(ds.iter().map(|d| d.2))
        .worst(worst)
        .tolerance(0.0)
        .verdict(worst.2 < 0.0)
        .timed(start),
    );

    // -H'' and P on the scan grid
    let start = Instant::now();
    let grid = opts.grid.unwrap_or(if opts.quick { [12, 6, 6] } else { [48, 24, 24] });
    let rows = sphere_scan(grid, opts.table)?;
    let margin = |r: &sphere::ScanRow| r.neg_h_ddot + ROUNDING_ULPS * f64::EPSILON * r.scale;
    let worst = argmax(&rows, |r| -margin(r)).copied();
    out.reports.push(
        VerificationReport::new("negHddot_nonneg", "-H'' >= 0 on the round sphere", Polarity::Holds)
            .stats(rows.iter().map(|r| r.neg_h_ddot))
            .worst(worst)
            .tolerance(ROUNDING_ULPS * f64::EPSILON)
            .with("grid", grid)
            .verdict(rows.iter().all(|r| margin(r) >= 0.0))
            .timed(start),
    );
    let ps: Vec<(f64, f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| r.p.map(|p| (r.rho, r.theta, r.psi, p)))
        .collect();
    let worst = ps.iter().copied().fold(None, |b: Option<(f64, f64, f64, f64)>, p| match b {
        Some(b) if b.3 <= p.3 => Some(b),
        _ => Some(p),
    });
    out.reports.push(
        VerificationReport::new(
            "P_positive",
            "P(rho, T, S) = A S^2 - 2 (2B - A) T S + A rho^2 / sin^2 rho T^2 + B - A > 0",
            Polarity::Holds,
        )
        .stats(ps.iter().map(|p| p.3))
        .worst(worst)
        .tolerance(0.0)
        .verdict(ps.iter().all(|p| p.3 > 0.0))
        .timed(start),
    );

    // closed form against finite differences and the cross-curvature; the
    // statistics are error / max(abs_tol, 1e-3 |value|), so the bound is 1
    let start = Instant::now();
    let abs_tol = opts.tolerance("closedform_vs_fd", 1e-4)?;
    let tol = |v: f64| abs_tol.max(1e-3 * v.abs());
    let samples = opts.count(200, 50);
    let s3 = Manifold::sphere(3)?;
    let c3 = Cost::half_square(&s3);
    let oracle: Vec<OracleRow> = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<OracleRow> {
            let config = random_sphere_config(opts.seed, i);
            let closed_form = sphere::neg_h_ddot(&config)?;
            let (fd, _) = sphere::fd_neg_h_ddot(&config)?;
            let emb = sphere::embedding(&config)?;
            let cross = cross_raw(&c3, &emb.x, &emb.xbar, &emb.w, &emb.pbar)?.value;
            Ok(OracleRow {
                config,
                closed_form,
                fd,
                cross,
            })
        })
        .collect::<Result<_>>()?;
    let fd_ratio = |o: &OracleRow| (o.fd - o.closed_form).abs() / tol(o.closed_form);
    let cross_ratio = |o: &OracleRow| (o.cross - 2.0 * o.closed_form).abs() / tol(2.0 * o.closed_form);
    out.reports.push(
        VerificationReport::new(
            "closedform_vs_fd",
            "-H'' equals -d^4/dt^2 ds^2 c(exp_x(s w), exp_x(r + t q))",
            Polarity::Holds,
        )
        .stats(oracle.iter().map(fd_ratio))
        .worst(argmax(&oracle, fd_ratio))
        .tolerance(1.0)
        .with("absolute_tolerance", abs_tol)
        .with("relative_tolerance", 1e-3)
        .with("max_abs_error", fold_max(oracle.iter().map(|o| (o.fd - o.closed_form).abs())))
        .verdict(oracle.iter().all(|o| fd_ratio(o) <= 1.0))
        .timed(start),
    );
    out.reports.push(
        VerificationReport::new(
            "cross_calibration",
            "cross(w, d(exp_x)_r q) = -2 H''",
            Polarity::Holds,
        )
        .stats(oracle.iter().map(cross_ratio))
        .worst(argmax(&oracle, cross_ratio))
        .tolerance(1.0)
        .with("absolute_tolerance", abs_tol)
        .with("relative_tolerance", 1e-3)
        .with("max_abs_error", fold_max(oracle.iter().map(|o| (o.cross - 2.0 * o.closed_form).abs())))
        .verdict(oracle.iter().all(|o| cross_ratio(o) <= 1.0))
        .timed(start),
    );

    // equality cases
    let start = Instant::now();
    let mut ok = true;
    let mut positives = Vec::new();
    let mut zeros = Vec::new();
    for rho in sphere::grid(0.0, PI, 16, CUT_MARGIN) {
        let cases = [
            (SphereConfig::new(rho, FRAC_PI_2, FRAC_PI_2, 0.0), true),
            (SphereConfig::new(rho, FRAC_PI_2, FRAC_PI_4, 0.0), false),
            (SphereConfig::new(rho, PI / 3.0, FRAC_PI_2, 0.0), false),
            (SphereConfig::new(rho, FRAC_PI_2, FRAC_PI_2, 1.0), false),
        ];
        for (cfg, parallel) in cases {
            let (v, scale) = sphere::neg_h_ddot_with_scale(&cfg)?;
            let classified = sphere::equality_classifier(&cfg)?;
            if parallel {
                zeros.push(v);
                ok &= classified && v.abs() <= ROUNDING_ULPS * f64::EPSILON * scale;
            } else {
                positives.push(v);
                ok &= !classified && v > 0.0;
            }
        }
    }
    out.reports.push(
        VerificationReport::new(
            "equality_cases",
            "-H'' = 0 exactly when q, w and rhat are parallel",
            Polarity::Holds,
        )
        .stats(positives.iter().copied())
        .tolerance(ROUNDING_ULPS * f64::EPSILON)
        .with("max_abs_on_zero_set", fold_max(zeros.iter().map(|v| v.abs())))
        .verdict(ok)
        .timed(start),
    );

    if opts.table {
        out.table = Some(scan_table(&rows));
    }
    Ok(out)
}

// ---------------------------------------------------------------- products

fn named_manifolds(opts: &SuiteOptions, defaults: &[&str]) -> Result<Vec<Manifold>> {
    match &opts.manifold {
        Some(m) => Ok(vec![m.parse()?]),
        None => defaults.iter().map(|m| m.parse()).collect(),
    }
}

fn cost_on(opts: &SuiteOptions, m: &Manifold) -> Result<Cost> {
    Cost::parse(m, opts.cost.as_deref().unwrap_or("half-square"))
}

fn classification_report(
    claim_id: &str,
    anchor: &str,
    polarity: Polarity,
    r: &crosscurv::ClassificationReport,
    pass: bool,
    start: Instant,
) -> VerificationReport {
    let mut rep = VerificationReport::new(claim_id, anchor, polarity)
        .tolerance(r.tolerance)
        .with("manifold", &r.manifold)
        .with("cost", &r.cost)
        .with("min_normalized", r.min_normalized)
        .with("null_pairs", r.null_pair_count)
        .with("max_abs_h", r.max_abs_h)
        .with("violations", r.violations.len())
        .verdict(pass)
        .timed(start);
    rep.n_samples = r.n_samples;
    rep.min = Some(r.min_cross);
    rep.max = Some(r.max_cross);
    if let Some(f) = r.strict_floor {
        rep = rep.with("strict_floor", f);
    }
    if let Some(c0) = r.fitted_c0 {
        rep = rep.with("fitted_c0", c0);
    }
    if let Some(e) = r.equality_residual {
        rep = rep.with("equality_residual", e);
    }
    let worst = r.violations.first().or(r.argmin.as_ref());
    if let Some(s) = worst {
        rep = rep.worst(s.record());
    }
    rep
}

pub fn product_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let factors: Vec<Manifold> = opts
        .factors
        .as_deref()
        .unwrap_or("S2,S2")
        .split(',')
        .map(str::parse)
        .collect::<Result<_>>()?;
    if factors.len() != 2 {
        return Err(Error::Parse("--factors takes exactly two manifolds".into()));
    }
    let (cp, cm) = (Cost::half_square(&factors[0]), Cost::half_square(&factors[1]));
    let product = Manifold::product(factors.clone())?;
    let name = product.to_string();

    let start = Instant::now();
    let tol = opts.tolerance("cross_additivity", 2e-4)?;
    let n = opts.count(100, 30);
    let records = (0..n as u64)
        .into_par_iter()
        .map(|i| product_additivity(&cp, &cm, opts.seed, i))
        .collect::<Result<Vec<_>>>()?;
    out.reports.push(
        VerificationReport::new(
            "cross_additivity",
            "cross(p+ + p-, pbar+ + pbar-) = cross+(p+, pbar+) + cross-(p-, pbar-) for c = c+ + c-",
            Polarity::Holds,
        )
        .stats(records.iter().map(|r| r.defect))
        .worst(argmax(&records, |r| r.defect))
        .tolerance(tol)
        .with("manifold", &name)
        .verdict(records.iter().all(|r| r.defect <= tol))
        .timed(start),
    );

    let start = Instant::now();
    let c = Cost::half_square(&product);
    let r = classify(&c, &opts.spec(40, 20), Claim::A3s)?;
    let zero_cross = r
        .violations
        .iter()
        .filter(|s| s.h_value.abs() <= NULL_TOL && s.cross_value.abs() <= r.tolerance)
        .count();
    out.reports.push(
        classification_report(
            "a3s_fails",
            "a product of two costs is never strictly regular: some h-null pair has zero cross-curvature",
            Polarity::ViolationExhibited,
            &r,
            zero_cross > 0,
            start,
        )
        .with("zero_cross_null_pairs", zero_cross),
    );

    let start = Instant::now();
    let r = classify(&c, &opts.spec(40, 20), Claim::A3w)?;
    out.reports.push(classification_report(
        "a3w",
        "cross >= 0 on h-null pairs",
        Polarity::Holds,
        &r,
        r.pass,
        start,
    ));

    let nonneg: Vec<Manifold> = if opts.factors.is_some() {
        vec![product.clone()]
    } else {
        ["S2xS2", "S2xR1", "S3xS5"].iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    for m in nonneg {
        let start = Instant::now();
        let r = classify(&Cost::half_square(&m), &opts.spec(40, 15), Claim::NonNegCross)?;
        out.reports.push(classification_report(
            "nonneg_cross",
            "cross >= 0 on all pairs for products of non-negatively cross-curved factors",
            Polarity::Holds,
            &r,
            r.pass,
            start,
        ));
    }

    let start = Instant::now();
    let seeds = opts.count(500, 100);
    let cons = (0..seeds as u64)
        .into_par_iter()
        .map(|s| null_construction(&cp, &cm, MinusVectors::EImage, opts.seed.wrapping_add(s)))
        .collect::<Result<Vec<_>>>()?;
    let tol = opts.tolerance("null_construction", 1e-6)?;
    out.reports.push(
        VerificationReport::new(
            "null_construction",
            "balancing E-image vectors of non-negatively cross-curved factors to an h-null pair gives cross >= 0",
            Polarity::Holds,
        )
        .stats(cons.iter().map(|c| c.cross))
        .tolerance(tol)
        .with("manifold", &name)
        .with("max_abs_h", fold_max(cons.iter().map(|c| c.pair.h_value.abs())))
        .verdict(cons.iter().all(|c| c.cross >= -tol))
        .timed(start),
    );
    Ok(out)
}

// ---------------------------------------------------------------- submersions

pub fn submersion_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let subs = match (&opts.total, &opts.base) {
        (Some(t), Some(b)) => vec![Submersion::from_names(t, b)?],
        (None, None) => vec![Submersion::hopf(1)?, Submersion::hopf(2)?],
        _ => return Err(Error::Parse("--total and --base go together".into())),
    };
    let n = opts.count(50, 20);
    let h_tol = opts.tolerance("metric_lift", 1e-8)?;
    let slack_tol = opts.tolerance("oneill", 1e-5)?;
    let f_tol = opts.tolerance("f_nonneg", 1e-10)?;
    let mut table = Table::new(&["m", "cross_base", "cross_total", "h_base", "h_total", "f_min"]);
    for sub in subs {
        let m = match sub.base.kind() {
            crate::manifold::ManifoldKind::ComplexProjective { m } => *m,
            _ => unreachable!("only Hopf submersions are built"),
        };
        let name = format!("{}->{}", sub.total, sub.base);

        let start = Instant::now();
        let recs = sub.oneill_sweep(opts.seed, n)?;
        let elapsed = start;
        for r in &recs {
            table.rows.push(vec![
                Some(m as f64),
                Some(r.cross_base),
                Some(r.cross_total),
                Some(r.h_base),
                Some(r.h_total),
                Some(r.f_min),
            ]);
        }
        let h_dev = |r: &crate::constructions::OneillRecord| (r.h_base - r.h_total).abs();
        out.reports.push(
            VerificationReport::new("metric_lift", "h_B(v + vbar) = h_M(w + wbar) for the lifted vectors", Polarity::Holds)
                .stats(recs.iter().map(h_dev))
                .worst(argmax(&recs, h_dev))
                .tolerance(h_tol)
                .with("manifold", &name)
                .verdict(recs.iter().all(|r| h_dev(r) <= h_tol))
                .timed(elapsed),
        );
        out.reports.push(
            VerificationReport::new("oneill", "cross_B(v, vbar) >= cross_M(w, wbar)", Polarity::Holds)
                .stats(recs.iter().map(|r| r.slack()))
                .worst(argmax(&recs, |r| -r.slack()))
                .tolerance(slack_tol)
                .with("manifold", &name)
                .verdict(recs.iter().all(|r| r.slack() >= -slack_tol))
                .timed(elapsed),
        );
        out.reports.push(
            VerificationReport::new(
                "f_nonneg",
                "c_M(x~(s), xbar~(t)) - c_B(x(s), xbar(t)) >= 0 around the lifted pair",
                Polarity::Holds,
            )
            .stats(recs.iter().map(|r| r.f_min))
            .worst(argmax(&recs, |r| -r.f_min))
            .tolerance(f_tol)
            .with("manifold", &name)
            .verdict(recs.iter().all(|r| r.f_min >= -f_tol))
            .timed(elapsed),
        );

        let start = Instant::now();
        out.reports.push(lift_report(&sub, &name, opts, n)?.timed(start));

        let start = Instant::now();
        let probe = cpn_curvature_probe(m, n, opts.seed)?;
        let base = sub.base.to_string();
        let (pass, band) = if m == 1 {
            let tol = opts.tolerance("sectional_curvature", 0.02)?;
            (probe.estimates.iter().all(|k| (k / 4.0 - 1.0).abs() <= tol), tol)
        } else {
            let tol = opts.tolerance("sectional_curvature", 0.02)?;
            let inside = probe.estimates.iter().all(|&k| k >= 1.0 - tol && k <= 4.0 * (1.0 + tol));
            (inside && probe.max - probe.min >= 2.5, tol)
        };
        out.reports.push(
            VerificationReport::new(
                "sectional_curvature",
                "sectional curvatures of the Fubini-Study metric lie in [1, 4], with 4 on complex lines",
                Polarity::Holds,
            )
            .stats(probe.estimates.iter().copied())
            .tolerance(band)
            .with("manifold", &base)
            .with("spread", probe.max - probe.min)
            .with(
                "max_error_vs_exact",
                fold_max(probe.estimates.iter().zip(&probe.exact).map(|(e, x)| (e - x).abs() / x)),
            )
            .verdict(pass)
            .timed(start),
        );

        let start = Instant::now();
        let r = classify(&Cost::half_square(&sub.base), &opts.spec(40, 15), Claim::A3s)?;
        out.reports.push(classification_report(
            "a3s",
            "cross > 0 on h-null pairs with p, pbar nonzero",
            Polarity::Holds,
            &r,
            r.pass,
            start,
        ));
    }
    if opts.table {
        out.table = Some(table);
    }
    Ok(out)
}

fn lift_report(sub: &Submersion, name: &str, opts: &SuiteOptions, n: usize) -> Result<VerificationReport> {
    let iso_tol = opts.tolerance("horizontal_lift", 1e-9)?;
    let defects = (0..n as u64)
        .into_par_iter()
        .map(|i| -> Result<[f64; 3]> {
            let mut rng = rng_for(opts.seed ^ 0x4c1f7, i);
            let b = sub.base.random_point(&mut rng);
            let v = sub.base.random_unit_tangent(&b, &mut rng) * rng.random_range(0.1..1.4);
            let lifted = sub.horizontal_lift_vector(&b, &v, &b)?;
            let iso = (lifted.norm() - v.norm()).abs();
            let end_total = sub.project(&sub.total.exp_raw(&b, &lifted, CUT_MARGIN)?);
            let end_base = sub.base.exp_raw(&b, &v, CUT_MARGIN)?;
            let exp_dev = sub.base.dist_raw(&end_total, &end_base);
            let (x, xbar) = random_pair(&sub.base, PairBounds::default(), &mut rng);
            let pair = sub.horizontal_lift_pair(&x, &xbar)?;
            Ok([iso, exp_dev, (pair.base_distance - pair.total_distance).abs()])
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = |k: usize| fold_max(defects.iter().map(|d| d[k]));
    let pass = worst(0) <= 1e-12 && worst(1) <= iso_tol && worst(2) <= 1e-10;
    Ok(VerificationReport::new(
        "horizontal_lift",
        "d pi is an isometry on horizontal vectors, pi(exp v~) = exp v, and lifted pairs keep their distance",
        Polarity::Holds,
    )
    .stats(defects.iter().map(|d| d[0].max(d[1]).max(d[2])))
    .tolerance(iso_tol)
    .with("manifold", name)
    .with("max_norm_defect", worst(0))
    .with("max_exp_defect", worst(1))
    .with("max_distance_defect", worst(2))
    .verdict(pass))
}

// ---------------------------------------------------------------- cross

pub fn cross_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let claims = match &opts.claim {
        Some(c) => vec![Claim::parse(c)?],
        None => vec![Claim::NonNegCross, Claim::A3w, Claim::A3s, Claim::AlmostPositive],
    };
    for m in named_manifolds(opts, &["S2"])? {
        let c = cost_on(opts, &m)?;
        for &claim in &claims {
            let start = Instant::now();
            let r = classify(&c, &opts.spec(40, 20), claim)?;
            let anchor = match claim {
                Claim::NonNegCross => "cross(p, pbar) >= 0 for all p, pbar",
                Claim::A3w => "cross(p, pbar) >= 0 when h(p + pbar, p + pbar) = 0",
                Claim::A3s => "cross(p, pbar) > 0 when h(p + pbar, p + pbar) = 0 and p, pbar != 0",
                Claim::AlmostPositive => {
                    "cross >= c0 (eps^2 + epsbar^2) with eps, epsbar the angles to the connecting geodesic"
                }
            };
            out.reports
                .push(classification_report(claim.id(), anchor, Polarity::Holds, &r, r.pass, start));
        }
    }
    out.reports.extend(calibration_reports(opts)?);
    Ok(out)
}

fn calibration_reports(opts: &SuiteOptions) -> Result<Vec<VerificationReport>> {
    let mut reps = Vec::new();
    let s2 = Manifold::sphere(2)?;
    let c = Cost::half_square(&s2);

    let start = Instant::now();
    let tol = opts.tolerance("diagonal_limit", 1e-3)?;
    let values = (0..opts.count(20, 10) as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng_for(opts.seed, i);
            let x = s2.random_point(&mut rng);
            let p = s2.random_unit_tangent(&x, &mut rng);
            let q = s2.random_unit_tangent(&x, &mut rng);
            let q = (&q - &p * p.dot(&q)).normalize();
            let v = s2.random_unit_tangent(&x, &mut rng) * crate::constructions::DIAGONAL_OFFSET;
            let xbar = s2.exp_raw(&x, &v, STENCIL_GUARD)?;
            // parallel transport of q along the short geodesic
            let pbar = &q - (&x + &xbar) * (q.dot(&xbar) / (1.0 + x.dot(&xbar)));
            Ok(cross_raw(&c, &x, &xbar, &p, &pbar)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    reps.push(
        VerificationReport::new(
            "diagonal_limit",
            "cross(p, pbar) -> 4/3 sec(p, pbar) as xbar -> x, for orthonormal p, pbar",
            Polarity::Holds,
        )
        .stats(values.iter().copied())
        .tolerance(tol)
        .with("manifold", "S2")
        .verdict(values.iter().all(|v| (v - 4.0 / 3.0).abs() <= tol))
        .timed(start),
    );

    let start = Instant::now();
    let tol = opts.tolerance("euclidean_zero", 1e-7)?;
    let r3 = Manifold::euclidean(3)?;
    let ce = Cost::half_square(&r3);
    let values = (0..opts.count(50, 20) as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = rng_for(opts.seed, i);
            let (x, xbar) = random_pair(&r3, PairBounds::default(), &mut rng);
            let p = r3.random_unit_tangent(&x, &mut rng) * rng.random_range(0.2..2.0);
            let pbar = r3.random_unit_tangent(&xbar, &mut rng) * rng.random_range(0.2..2.0);
            Ok(cross_raw(&ce, &x, &xbar, &p, &pbar)?.value)
        })
        .collect::<Result<Vec<_>>>()?;
    reps.push(
        VerificationReport::new("euclidean_zero", "cross = 0 for the quadratic cost", Polarity::Holds)
            .stats(values.iter().copied())
            .tolerance(tol)
            .with("manifold", "R3")
            .verdict(values.iter().all(|v| v.abs() <= tol))
            .timed(start),
    );

    let start = Instant::now();
    let tol = opts.tolerance("geodesic_zero", 1e-6)?;
    let values = (0..opts.count(50, 20) as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = rng_for(opts.seed, i);
            let (x, xbar) = random_pair(&s2, PairBounds::default(), &mut rng);
            let p = s2.log_raw(&x, &xbar, STENCIL_GUARD)?;
            let pbar = -s2.log_raw(&xbar, &x, STENCIL_GUARD)?;
            let cross = cross_raw(&c, &x, &xbar, &p, &pbar)?.value;
            let d = s2.dist_raw(&x, &xbar);
            let h = c.h_raw(&x, &xbar, &p, &pbar, STENCIL_GUARD)?;
            Ok((cross, (h - d * d).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let h_dev = fold_max(values.iter().map(|v| v.1));
    reps.push(
        VerificationReport::new(
            "geodesic_zero",
            "cross vanishes on the endpoint velocities of the connecting geodesic, where h = dist^2",
            Polarity::Holds,
        )
        .stats(values.iter().map(|v| v.0))
        .tolerance(tol)
        .with("manifold", "S2")
        .with("max_h_minus_dist_sq", h_dev)
        .verdict(values.iter().all(|v| v.0.abs() <= tol) && h_dev <= 1e-8)
        .timed(start),
    );
    Ok(reps)
}

// ---------------------------------------------------------------- sliding mountain

const SLIDING_DEFAULTS: [&str; 4] = ["S2", "S2xS2", "S2xR1", "CP1"];

/// Candidate probe points per scenario, before the cut-locus filter.
pub const PROBES: usize = 16;

fn convexity_report(claim: &str, anchor: &str, r: &sliding::ConvexityReport, name: &str, start: Instant) -> VerificationReport {
    let mut rep = VerificationReport::new(claim, anchor, Polarity::Holds)
        .tolerance(sliding::CONVEXITY_TOL)
        .with("manifold", name)
        .with("scenarios", r.scenarios)
        .with("scale", r.scale)
        .with("threshold", r.threshold)
        .worst(r)
        .verdict(r.pass)
        .timed(start);
    rep.n_samples = r.probes;
    rep.min = Some(r.min_margin);
    if let Some(sd) = r.min_second_difference {
        rep = rep.with("min_second_difference", sd);
    }
    rep
}

pub fn dasm_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    for m in named_manifolds(opts, &SLIDING_DEFAULTS)? {
        let start = Instant::now();
        let c = cost_on(opts, &m)?;
        let scenarios = sliding::random_scenarios(&c, opts.count(200, 40), PROBES, opts.seed)?;
        let r = sliding::check_dasm(&scenarios)?;
        out.reports.push(convexity_report(
            "dasm",
            "f_t(y) <= max(f_0(y), f_1(y)) along c-segments",
            &r,
            &m.to_string(),
            start,
        ));
    }
    Ok(out)
}

pub fn time_convexity_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let g0_tol = opts.tolerance("g_diagnostics", 1e-8)?;
    for m in named_manifolds(opts, &SLIDING_DEFAULTS)? {
        let start = Instant::now();
        let c = cost_on(opts, &m)?;
        let scenarios = sliding::random_scenarios(&c, opts.count(200, 40), PROBES, opts.seed)?;
        let r = sliding::check_time_convexity(&scenarios)?;
        out.reports.push(convexity_report(
            "time_convexity",
            "f_t(y) <= (1 - t) f_0(y) + t f_1(y) along c-segments",
            &r,
            &m.to_string(),
            start,
        ));

        let start = Instant::now();
        let g = sliding::g_summary(&scenarios, opts.seed)?;
        // the summary value is the worst of the three checks, each divided by its bound
        let g1_tol = 1e-6;
        let worst = (g.max_abs_g0 / g0_tol)
            .max(g.max_abs_g_prime / g1_tol)
            .max(-g.min_g_second / g1_tol);
        let mut rep = VerificationReport::new(
            "g_diagnostics",
            "g(s) = d^2/dt^2 f_t(x(s)) along an h-geodesic has g(0) = g'(0) = 0 and g'' >= 0",
            Polarity::Holds,
        )
        .tolerance(1.0)
        .with("manifold", m.to_string())
        .with("g0_tolerance", g0_tol)
        .with("g_prime_tolerance", g1_tol)
        .with("max_abs_g0", g.max_abs_g0)
        .with("max_abs_g_prime", g.max_abs_g_prime)
        .with("min_g_second", g.min_g_second)
        .verdict(worst <= 1.0)
        .timed(start);
        rep.n_samples = g.records;
        rep.max = Some(worst);
        out.reports.push(rep);
    }
    Ok(out)
}

// ---------------------------------------------------------------- counterexample

#[derive(Serialize)]
struct CounterexampleRecord {
    x: Vec<f64>,
    xbar: Vec<f64>,
    p: Vec<f64>,
    pbar: Vec<f64>,
    h: f64,
    cross: f64,
    cross_plus: f64,
    cross_minus: f64,
    lambda: f64,
}

pub fn counterexample_suite(opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let dims = match opts.dim {
        Some(d) => vec![d],
        None => vec![1, 2],
    };
    let h_tol = opts.tolerance("log_product_a3w", NULL_TOL)?;
    for dim in dims {
        let name = format!("R{dim}xR{dim}");
        let start = Instant::now();
        let ce = log_product_counterexample(dim, opts.seed)?;
        let cons = &ce.construction;
        let rec = CounterexampleRecord {
            x: cons.pair.x.iter().copied().collect(),
            xbar: cons.pair.xbar.iter().copied().collect(),
            p: cons.pair.p.iter().copied().collect(),
            pbar: cons.pair.pbar.iter().copied().collect(),
            h: ce.h_value(),
            cross: ce.cross(),
            cross_plus: cons.cross_plus,
            cross_minus: cons.cross_minus,
            lambda: cons.pair.balance.lambda,
        };
        let pass = ce.h_value().abs() <= h_tol && ce.cross() <= -1e-3 && ce.is_violation();
        out.reports.push(
            VerificationReport::new(
                "log_product_a3w",
                "the sum of two -log|x - xbar| costs has an h-null pair with negative cross-curvature",
                Polarity::ViolationExhibited,
            )
            .stats([ce.cross()])
            .worst(rec)
            .tolerance(h_tol)
            .with("manifold", &name)
            .with("h", ce.h_value())
            .with("factor_cross_negative", cons.cross_plus < 0.0 && cons.cross_minus < 0.0)
            .verdict(pass)
            .timed(start),
        );

        let start = Instant::now();
        let r = Manifold::euclidean(dim)?;
        let c = Cost::log_euclidean(&r)?;
        let tol = opts.tolerance("log_quadratic", 1e-6)?;
        let devs = (0..opts.count(50, 20) as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let mut rng = rng_for(opts.seed ^ 0x106, i);
                let x = ManifoldPoint::random(&r, &mut rng);
                let p = TangentVector::new(&x, r.random_unit_tangent(x.coords(), &mut rng))?;
                let q0 = r.random_unit_tangent(x.coords(), &mut rng) * rng.random_range(0.5..2.0);
                let q = r.random_unit_tangent(x.coords(), &mut rng) * 0.2;
                let report = alternative_a3_concavity(&c, &x, &p, &q0, &q, 5)?;
                let mut worst: f64 = 0.0;
                for (t, phi) in report.t.iter().zip(&report.phi) {
                    let exact = log_cost_quadratic(&(&q0 + &q * *t), p.coords())?;
                    worst = worst.max((phi - exact).abs());
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        out.reports.push(
            VerificationReport::new(
                "log_quadratic",
                "D^2_x c(x, c-exp_x q)[p, p] = 2 <q, p>^2 - |p|^2 |q|^2 for c = -log|x - xbar|",
                Polarity::Holds,
            )
            .stats(devs.iter().copied())
            .tolerance(tol)
            .with("manifold", format!("R{dim}"))
            .verdict(devs.iter().all(|d| *d <= tol))
            .timed(start),
        );

        let start = Instant::now();
        let v = sliding::log_product_dasm_violation(dim, opts.seed)?;
        let mut rep = VerificationReport::new(
            "dasm_violation",
            "the maximum principle f_t <= max(f_0, f_1) fails for the sum of two -log|x - xbar| costs",
            Polarity::ViolationExhibited,
        )
        .tolerance(sliding::CONVEXITY_TOL)
        .with("manifold", &name)
        .with("threshold", v.report.threshold)
        .worst(&v.report)
        .verdict(!v.report.pass)
        .timed(start);
        rep.n_samples = v.report.probes;
        rep.min = Some(v.report.min_margin);
        out.reports.push(rep);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_only_loosen() {
        let mut o = SuiteOptions::default();
        o.tolerances.insert("oneill".into(), 1e-4);
        assert_eq!(o.tolerance("oneill", 1e-5).unwrap(), 1e-4);
        o.tolerances.insert("oneill".into(), 1e-6);
        assert!(o.tolerance("oneill", 1e-5).is_err());
        o.tolerances.insert("oneill".into(), f64::NAN);
        assert!(o.tolerance("oneill", 1e-5).is_err());
        assert_eq!(o.tolerance("other", 3.0).unwrap(), 3.0);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("torus", &SuiteOptions::default()).is_err());
    }

    #[test]
    fn scan_rows_are_lexicographic() {
        let rows = sphere_scan([2, 2, 2], false).unwrap();
        assert_eq!(rows.len(), 16);
        let keys: Vec<_> = rows.iter().map(|r| (r.rho, r.theta, r.psi, r.w_perp)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }
}
