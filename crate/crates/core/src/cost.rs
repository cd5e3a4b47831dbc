//! Transportation costs on `M x M`, the cross-difference matrix that defines
//! the pseudo-metric `h`, cost-exponentials, c-segments and h-geodesics.
//!
//! Covectors are identified with tangent vectors through the metric. All
//! built-in costs are symmetric, `c(x, y) = c(y, x)`, so every operation in
//! the second slot is the first-slot operation with the points exchanged.
//!
//! Sign convention: with `E[i][j] = -d^2 c / dx^i dxbar^j` in orthonormal
//! frames, `h(p + pbar, p + pbar) = p^T E pbar`. For the half-squared
//! distance on Euclidean space `E` is the identity and the value on the
//! endpoint velocities of a segment is its squared length.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;
use crate::manifold::{Manifold, ManifoldKind, ManifoldPoint, TangentVector, CUT_MARGIN};

/// Smooth, strictly convex, strictly increasing profile `f` of a radial cost
/// `c = f(dist)`, shipped with `f'` and `(f')^{-1}`.
#[derive(Clone, Copy)]
pub struct RadialProfile {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
    pub df_inv: fn(f64) -> f64,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialProfile({})", self.name)
    }
}

impl PartialEq for RadialProfile {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

fn identity(x: f64) -> f64 {
    x
}

fn half_square(x: f64) -> f64 {
    0.5 * x * x
}

fn cosh_minus_one(x: f64) -> f64 {
    // cosh(x) - 1 = 2 sinh(x/2)^2, without cancellation near 0
    let s = (0.5 * x).sinh();
    2.0 * s * s
}

impl RadialProfile {
    pub const HALF_SQUARE: RadialProfile = RadialProfile {
        name: "half-square",
        f: half_square,
        df: identity,
        df_inv: identity,
    };

    pub const COSH: RadialProfile = RadialProfile {
        name: "cosh",
        f: cosh_minus_one,
        df: f64::sinh,
        df_inv: f64::asinh,
    };

    pub fn registered() -> &'static [RadialProfile] {
        &[Self::HALF_SQUARE, Self::COSH]
    }

    pub fn by_name(name: &str) -> Option<RadialProfile> {
        Self::registered().iter().copied().find(|p| p.name == name)
    }

    /// Checks `f' > 0` and `f'' > 0` (by finite differences of `f'`) and the
    /// inverse pair on a grid of `(0, max]`.
    pub fn validate(&self, max: f64) -> Result<()> {
        let n = 200;
        let mut prev = (self.df)(0.0);
        for k in 1..=n {
            let r = max * k as f64 / n as f64;
            let d = (self.df)(r);
            if !(d > 0.0 && d > prev) {
                return Err(Error::domain(format!(
                    "profile '{}' is not strictly convex and increasing at {r}",
                    self.name
                )));
            }
            let back = (self.df_inv)(d);
            if (back - r).abs() > 1e-9 * (1.0 + r) {
                return Err(Error::domain(format!(
                    "profile '{}': (f')^-1 does not invert f' at {r}",
                    self.name
                )));
            }
            prev = d;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    Radial(RadialProfile),
    LogEuclidean,
    /// Additive cost on a product, one summand per block of factors.
    Sum(Vec<Cost>),
}

#[derive(Debug, PartialEq)]
struct CostInner {
    kind: CostKind,
    manifold: Manifold,
}

/// A cost function together with the manifold it lives on (source and
/// target coincide for every built-in cost).
#[derive(Debug, Clone, PartialEq)]
pub struct Cost(Arc<CostInner>);

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            CostKind::Radial(p) if *p == RadialProfile::HALF_SQUARE => f.write_str("half-square"),
            CostKind::Radial(p) => write!(f, "radial:{}", p.name),
            CostKind::LogEuclidean => f.write_str("log"),
            CostKind::Sum(parts) => {
                f.write_str("sum(")?;
                for (i, c) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Cost {
    pub fn half_square(manifold: &Manifold) -> Self {
        Self::from_parts(CostKind::Radial(RadialProfile::HALF_SQUARE), manifold)
    }

    pub fn radial(manifold: &Manifold, profile: RadialProfile) -> Result<Self> {
        profile.validate(std::f64::consts::PI)?;
        Ok(Self::from_parts(CostKind::Radial(profile), manifold))
    }

    /// `c(x, xbar) = -log |x - xbar|` on Euclidean space.
    pub fn log_euclidean(manifold: &Manifold) -> Result<Self> {
        if !matches!(manifold.kind(), ManifoldKind::Euclidean { .. }) {
            return Err(Error::domain(format!(
                "the log cost needs a Euclidean manifold, got {manifold}"
            )));
        }
        Ok(Self::from_parts(CostKind::LogEuclidean, manifold))
    }

    /// Additive cost `c1(x1, xbar1) + c2(x2, xbar2) + ...` on the product of
    /// the summands' manifolds.
    pub fn sum(parts: Vec<Cost>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::domain("a sum cost needs at least two summands"));
        }
        let manifold = Manifold::product(parts.iter().map(|c| c.manifold().clone()).collect())?;
        Ok(Self::from_parts(CostKind::Sum(parts), &manifold))
    }

    /// Parses `half-square`, `log` or `radial:<profile>`.
    pub fn parse(manifold: &Manifold, spec: &str) -> Result<Self> {
        match spec.trim() {
            "half-square" => Ok(Self::half_square(manifold)),
            "log" => Self::log_euclidean(manifold),
            other => {
                let name = other
                    .strip_prefix("radial:")
                    .ok_or_else(|| Error::Parse(format!("unknown cost '{other}'")))?;
                let profile = RadialProfile::by_name(name)
                    .ok_or_else(|| Error::Parse(format!("unknown radial profile '{name}'")))?;
                Self::radial(manifold, profile)
            }
        }
    }

    fn from_parts(kind: CostKind, manifold: &Manifold) -> Self {
        Cost(Arc::new(CostInner {
            kind,
            manifold: manifold.clone(),
        }))
    }

    pub fn kind(&self) -> &CostKind {
        &self.0.kind
    }

    pub fn manifold(&self) -> &Manifold {
        &self.0.manifold
    }

    fn summands(&self) -> Vec<(Cost, usize, usize)> {
        match self.kind() {
            CostKind::Sum(parts) => {
                let mut off = 0;
                parts
                    .iter()
                    .map(|c| {
                        let len = c.manifold().ambient_dim();
                        let item = (c.clone(), off, len);
                        off += len;
                        item
                    })
                    .collect()
            }
            _ => vec![(self.clone(), 0, self.manifold().ambient_dim())],
        }
    }

    fn check_pair(&self, x: &ManifoldPoint, xbar: &ManifoldPoint) -> Result<()> {
        if x.manifold() != self.manifold() || xbar.manifold() != self.manifold() {
            return Err(Error::domain(format!(
                "cost on {} evaluated at points of {} and {}",
                self.manifold(),
                x.manifold(),
                xbar.manifold()
            )));
        }
        Ok(())
    }

    /// Distance from `(x, xbar)` to the nearest singularity of the cost: the
    /// cut locus of a sphere-like factor, or the diagonal for the log cost.
    pub fn room_raw(&self, x: &DVector<f64>, xbar: &DVector<f64>) -> f64 {
        match self.kind() {
            CostKind::Radial(_) => {
                let m = self.manifold();
                m.factors()
                    .iter()
                    .zip(m.factor_distances(x, xbar))
                    .filter_map(|(f, d)| f.manifold.cut_limit().map(|l| l - d))
                    .fold(f64::INFINITY, f64::min)
            }
            CostKind::LogEuclidean => (x - xbar).norm(),
            CostKind::Sum(_) => self
                .summands()
                .iter()
                .map(|(c, off, len)| {
                    c.room_raw(&x.rows(*off, *len).into_owned(), &xbar.rows(*off, *len).into_owned())
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Cost value on raw coordinates, refused within `guard` of the cut locus.
    pub fn eval_raw(&self, x: &DVector<f64>, xbar: &DVector<f64>, guard: f64) -> Result<f64> {
        match self.kind() {
            CostKind::Radial(p) => {
                let m = self.manifold();
                m.check_margin(x, xbar, guard)?;
                Ok((p.f)(m.dist_raw(x, xbar)))
            }
            CostKind::LogEuclidean => {
                let d = (x - xbar).norm();
                if d == 0.0 {
                    return Err(Error::SingularCost);
                }
                Ok(-d.ln())
            }
            CostKind::Sum(_) => {
                let mut total = 0.0;
                for (c, off, len) in self.summands() {
                    total += c.eval_raw(
                        &x.rows(off, len).into_owned(),
                        &xbar.rows(off, len).into_owned(),
                        guard,
                    )?;
                }
                Ok(total)
            }
        }
    }

    /// `-D_x c(x, xbar)`, as a tangent vector at `x`. By symmetry,
    /// `-D_xbar c(x, xbar)` is `neg_grad_raw(xbar, x)`.
    pub fn neg_grad_raw(&self, x: &DVector<f64>, xbar: &DVector<f64>, guard: f64) -> Result<DVector<f64>> {
        match self.kind() {
            CostKind::Radial(p) => {
                let m = self.manifold();
                let log = m.log_raw(x, xbar, guard)?;
                let rho = m.dist_raw(x, xbar);
                if rho == 0.0 {
                    return Ok(DVector::zeros(x.len()));
                }
                Ok(log * ((p.df)(rho) / rho))
            }
            CostKind::LogEuclidean => {
                let d = x - xbar;
                let r2 = d.norm_squared();
                if r2 == 0.0 {
                    return Err(Error::SingularCost);
                }
                Ok(d / r2)
            }
            CostKind::Sum(_) => {
                let mut out = DVector::zeros(x.len());
                for (c, off, len) in self.summands() {
                    let g = c.neg_grad_raw(
                        &x.rows(off, len).into_owned(),
                        &xbar.rows(off, len).into_owned(),
                        guard,
                    )?;
                    out.rows_mut(off, len).copy_from(&g);
                }
                Ok(out)
            }
        }
    }

    /// The c-exponential: the point `xbar` with `-D_x c(x, xbar) = p`.
    pub fn c_exp_raw(&self, x: &DVector<f64>, p: &DVector<f64>, guard: f64) -> Result<DVector<f64>> {
        match self.kind() {
            CostKind::Radial(prof) => {
                let np = p.norm();
                if np == 0.0 {
                    return Ok(x.clone());
                }
                let r = (prof.df_inv)(np);
                self.manifold().exp_raw(x, &(p * (r / np)), guard)
            }
            CostKind::LogEuclidean => {
                let n2 = p.norm_squared();
                if n2 == 0.0 {
                    return Err(Error::SingularCost);
                }
                Ok(x - p / n2)
            }
            CostKind::Sum(_) => {
                let mut out = DVector::zeros(x.len());
                for (c, off, len) in self.summands() {
                    let y = c.c_exp_raw(
                        &x.rows(off, len).into_owned(),
                        &p.rows(off, len).into_owned(),
                        guard,
                    )?;
                    out.rows_mut(off, len).copy_from(&y);
                }
                Ok(out)
            }
        }
    }

    /// Bilinear form `p^T E pbar = -D_x D_xbar c [p, pbar]` on ambient
    /// tangent vectors, as the derivative of the closed-form `-D_x c` along the
    /// geodesic `exp_xbar(t pbar)`.
    pub fn h_raw(&self, x: &DVector<f64>, xbar: &DVector<f64>, p: &DVector<f64>, pbar: &DVector<f64>, guard: f64) -> Result<f64> {
        Ok(p.dot(&self.e_apply(x, xbar, pbar, guard)?))
    }

    /// `E pbar` as an ambient tangent vector at `x`.
    fn e_apply(&self, x: &DVector<f64>, xbar: &DVector<f64>, pbar: &DVector<f64>, guard: f64) -> Result<DVector<f64>> {
        let n = pbar.norm();
        if n == 0.0 {
            return Ok(DVector::zeros(x.len()));
        }
        let m = self.manifold();
        let scale = m.dist_raw(x, xbar);
        let h = fd::first_step(scale) / n;
        fd::derivative_vec(
            |t| {
                let y = m.exp_raw(xbar, &(pbar * t), guard)?;
                self.neg_grad_raw(x, &y, guard)
            },
            h,
        )
    }

    /// Cross-difference matrix in the orthonormal frames of `x` and `xbar`.
    pub fn cross_difference_raw(&self, x: &DVector<f64>, xbar: &DVector<f64>, guard: f64) -> Result<CrossDifference> {
        let m = self.manifold();
        let frame_x = m.frame(x);
        let frame_xbar = m.frame(xbar);
        let n = m.intrinsic_dim();
        let mut e = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.e_apply(x, xbar, &frame_xbar.column(j).into_owned(), guard)?;
            e.set_column(j, &(frame_x.transpose() * col));
        }
        let det = e.determinant();
        let scale = e.amax().max(1.0).powi(n as i32);
        Ok(CrossDifference {
            degenerate: det.abs() < 1e-10 * scale,
            det,
            matrix: e,
            frame_x,
            frame_xbar,
        })
    }
}

/// A covector, identified with a tangent vector through the metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVector(TangentVector);

impl CotangentVector {
    pub fn new(base: &ManifoldPoint, coords: DVector<f64>) -> Result<Self> {
        TangentVector::new(base, coords).map(Self)
    }

    pub fn from_tangent(v: TangentVector) -> Self {
        Self(v)
    }

    pub fn to_tangent(&self) -> &TangentVector {
        &self.0
    }

    pub fn base(&self) -> &ManifoldPoint {
        self.0.base()
    }

    pub fn coords(&self) -> &DVector<f64> {
        self.0.coords()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn raw(base: &ManifoldPoint, coords: DVector<f64>) -> Self {
        Self(TangentVector::from_raw(base, coords))
    }
}

/// `E[i][j] = -d^2 c / dx^i dxbar^j` in the frames `frame_x`, `frame_xbar`
/// (columns are orthonormal ambient tangent vectors).
#[derive(Debug, Clone)]
pub struct CrossDifference {
    pub matrix: DMatrix<f64>,
    pub frame_x: DMatrix<f64>,
    pub frame_xbar: DMatrix<f64>,
    pub det: f64,
    /// Non-degeneracy (twist) failure: `|det| < 1e-10 * scale`.
    pub degenerate: bool,
}

impl CrossDifference {
    /// `p^T E pbar` for ambient tangent vectors.
    pub fn pair(&self, p: &DVector<f64>, pbar: &DVector<f64>) -> f64 {
        let a = self.frame_x.transpose() * p;
        let b = self.frame_xbar.transpose() * pbar;
        a.dot(&(&self.matrix * b))
    }

    /// `E` as an ambient `ambient_dim x ambient_dim` operator from `T_xbar` to `T_x`.
    pub fn apply_matrix(&self) -> DMatrix<f64> {
        &self.frame_x * &self.matrix * self.frame_xbar.transpose()
    }

    /// `E pbar` as an ambient vector at `x`.
    pub fn apply(&self, pbar: &DVector<f64>) -> DVector<f64> {
        &self.frame_x * (&self.matrix * (self.frame_xbar.transpose() * pbar))
    }

    /// `E^T p` as an ambient vector at `xbar`.
    pub fn apply_transpose(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.frame_xbar * (self.matrix.transpose() * (self.frame_x.transpose() * p))
    }
}

pub fn cost_eval(c: &Cost, x: &ManifoldPoint, xbar: &ManifoldPoint) -> Result<f64> {
    c.check_pair(x, xbar)?;
    c.eval_raw(x.coords(), xbar.coords(), CUT_MARGIN)
}

/// `D_x c(x, xbar)`.
pub fn grad_x_cost(c: &Cost, x: &ManifoldPoint, xbar: &ManifoldPoint) -> Result<CotangentVector> {
    c.check_pair(x, xbar)?;
    let g = c.neg_grad_raw(x.coords(), xbar.coords(), CUT_MARGIN)?;
    Ok(CotangentVector::raw(x, -g))
}

/// `D_xbar c(x, xbar)`.
pub fn grad_xbar_cost(c: &Cost, x: &ManifoldPoint, xbar: &ManifoldPoint) -> Result<CotangentVector> {
    c.check_pair(x, xbar)?;
    let g = c.neg_grad_raw(xbar.coords(), x.coords(), CUT_MARGIN)?;
    Ok(CotangentVector::raw(xbar, -g))
}

pub fn cross_difference_matrix(c: &Cost, x: &ManifoldPoint, xbar: &ManifoldPoint) -> Result<CrossDifference> {
    c.check_pair(x, xbar)?;
    c.cross_difference_raw(x.coords(), xbar.coords(), CUT_MARGIN)
}

/// `h(p + pbar, p + pbar) = p^T E pbar`.
pub fn h_quadratic(
    c: &Cost,
    x: &ManifoldPoint,
    xbar: &ManifoldPoint,
    p: &TangentVector,
    pbar: &TangentVector,
) -> Result<f64> {
    c.check_pair(x, xbar)?;
    c.h_raw(x.coords(), xbar.coords(), p.coords(), pbar.coords(), CUT_MARGIN)
}

pub fn c_exp(c: &Cost, x: &ManifoldPoint, p: &CotangentVector) -> Result<ManifoldPoint> {
    c.check_pair(x, x)?;
    let y = c.c_exp_raw(x.coords(), p.coords(), CUT_MARGIN)?;
    Ok(ManifoldPoint::from_raw(c.manifold(), y))
}

/// `c_exp(x, (1 - t) p0 + t p1)`; the whole segment must stay in the domain.
pub fn c_segment(
    c: &Cost,
    x: &ManifoldPoint,
    p0: &CotangentVector,
    p1: &CotangentVector,
    t: f64,
) -> Result<ManifoldPoint> {
    const CHECKS: usize = 16;
    for k in 0..=CHECKS {
        let s = k as f64 / CHECKS as f64;
        c.c_exp_raw(x.coords(), &(p0.coords() * (1.0 - s) + p1.coords() * s), CUT_MARGIN)?;
    }
    let q = p0.coords() * (1.0 - t) + p1.coords() * t;
    Ok(ManifoldPoint::from_raw(c.manifold(), c.c_exp_raw(x.coords(), &q, CUT_MARGIN)?))
}

const NEWTON_TOL: f64 = 1e-10;
/// Relative velocity defect accepted when Newton stagnates above [`NEWTON_TOL`].
const NEWTON_ACCEPT: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 50;

impl Cost {
    /// Raw form of [`solve_h_velocity`]: the covector `u` at `xbar` such that
    /// `s -> c_exp(xbar, -D_xbar c(x, xbar) + s u)` leaves `x` with velocity `p`.
    pub fn solve_h_velocity_raw(
        &self,
        x: &DVector<f64>,
        xbar: &DVector<f64>,
        p: &DVector<f64>,
        guard: f64,
    ) -> Result<DVector<f64>> {
        let m = self.manifold();
        let np = p.norm();
        if np == 0.0 {
            return Ok(DVector::zeros(x.len()));
        }
        let anchor = self.neg_grad_raw(xbar, x, guard)?;
        let h = fd::first_step(anchor.norm());
        let velocity = |u: &DVector<f64>| -> Result<DVector<f64>> {
            let nu = u.norm();
            if nu == 0.0 {
                return Ok(DVector::zeros(x.len()));
            }
            let step = h / nu;
            let v = fd::derivative_vec(
                |s| {
                    let y = self.c_exp_raw(xbar, &(&anchor + u * s), guard)?;
                    Ok(m.align(x, &y))
                },
                step,
            )?;
            Ok(m.project_tangent(x, &v))
        };

        let frame_x = m.frame(x);
        let frame_xbar = m.frame(xbar);
        let n = m.intrinsic_dim();
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = velocity(&frame_xbar.column(j).into_owned())?;
            jac.set_column(j, &(frame_x.transpose() * col));
        }
        let sv = jac.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 1e-12 * smax) {
            return Err(Error::Degeneracy(format!(
                "c-exp Jacobian has condition number {:.3e}",
                smax / smin
            )));
        }
        let lu = jac.lu();
        let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
            let coeff = lu
                .solve(&(frame_x.transpose() * rhs))
                .ok_or_else(|| Error::Degeneracy("singular c-exp Jacobian".into()))?;
            Ok(&frame_xbar * coeff)
        };

        let mut u = solve(p)?;
        let mut defect = (velocity(&u)? - p).norm();
        'newton: for _ in 0..NEWTON_MAX_ITER {
            if defect <= NEWTON_TOL * (1.0 + np) {
                return Ok(u);
            }
            let correction = solve(&(velocity(&u)? - p))?;
            let mut damping = 1.0;
            loop {
                let trial = &u - &correction * damping;
                let trial_defect = (velocity(&trial)? - p).norm();
                if trial_defect < defect {
                    u = trial;
                    defect = trial_defect;
                    break;
                }
                if damping < 1e-6 {
                    // the finite-difference velocity has hit its noise floor
                    break 'newton;
                }
                damping *= 0.5;
            }
        }
        if defect <= NEWTON_ACCEPT * np {
            return Ok(u);
        }
        Err(Error::Convergence {
            iterations: NEWTON_MAX_ITER,
            defect,
        })
    }
}

/// Covector `u*` at `xbar` such that the h-geodesic
/// `s -> c_exp(xbar, qbar* + s u*)`, `qbar* = -D_xbar c(x, xbar)`, has
/// velocity `p` at `s = 0`.
pub fn solve_h_velocity(
    c: &Cost,
    x: &ManifoldPoint,
    xbar: &ManifoldPoint,
    p: &TangentVector,
) -> Result<CotangentVector> {
    c.check_pair(x, xbar)?;
    p.base().same_manifold(x)?;
    let u = c.solve_h_velocity_raw(x.coords(), xbar.coords(), p.coords(), CUT_MARGIN)?;
    Ok(CotangentVector::raw(xbar, u))
}

/// Which slot of `M x M` the h-geodesic moves in; the other slot is frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `s -> (c_exp(xbar, ...), xbar)`: the first slot moves.
    Source,
    /// `s -> (x, c_exp(x, ...))`: the second slot moves (a c-segment).
    Target,
}

/// A null h-geodesic with one slot frozen at `fixed_point`:
/// `s -> c_exp(fixed_point, anchor + s direction)`.
#[derive(Debug, Clone)]
pub struct HGeodesic {
    pub cost: Cost,
    pub fixed_point: ManifoldPoint,
    pub anchor: CotangentVector,
    pub direction: CotangentVector,
    pub side: Side,
}

impl HGeodesic {
    /// The h-geodesic through `(x, xbar)` moving `x` with initial velocity `p`.
    pub fn through(c: &Cost, x: &ManifoldPoint, xbar: &ManifoldPoint, p: &TangentVector) -> Result<Self> {
        let direction = solve_h_velocity(c, x, xbar, p)?;
        let anchor = CotangentVector::raw(xbar, c.neg_grad_raw(xbar.coords(), x.coords(), CUT_MARGIN)?);
        Ok(Self {
            cost: c.clone(),
            fixed_point: xbar.clone(),
            anchor,
            direction,
            side: Side::Source,
        })
    }

    /// The c-segment `t -> c_exp(x, (1 - t) p0 + t p1)` from `x`.
    pub fn segment(c: &Cost, x: &ManifoldPoint, p0: &CotangentVector, p1: &CotangentVector) -> Self {
        Self {
            cost: c.clone(),
            fixed_point: x.clone(),
            anchor: p0.clone(),
            direction: CotangentVector::raw(x, p1.coords() - p0.coords()),
            side: Side::Target,
        }
    }

    pub fn point(&self, s: f64) -> Result<ManifoldPoint> {
        self.point_guarded(s, CUT_MARGIN)
    }

    pub(crate) fn point_guarded(&self, s: f64, guard: f64) -> Result<ManifoldPoint> {
        let q = self.anchor.coords() + self.direction.coords() * s;
        let y = self.cost.c_exp_raw(self.fixed_point.coords(), &q, guard)?;
        Ok(ManifoldPoint::from_raw(self.cost.manifold(), y))
    }
}
