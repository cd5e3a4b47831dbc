//! Model Riemannian manifolds: the round unit sphere `S^n`, Euclidean space
//! `R^l`, complex projective space `CP^m` (as the Hopf quotient of
//! `S^{2m+1}`), and finite products of these.
//!
//! Points and tangent vectors are stored in ambient coordinates. For `CP^m`
//! a point is a unit vector of `C^{m+1}` stored as interleaved `(re, im)`
//! pairs, gauge-fixed so that the first coordinate of largest modulus is real
//! and nonnegative; tangent vectors are horizontal, i.e. real-orthogonal to
//! both `x` and `i x`.
//!
//! Every sphere-like factor carries a cut-locus limit (`pi` for spheres,
//! `pi/2` for `CP^m`). Public operations refuse to work within
//! [`CUT_MARGIN`] of that limit; finite-difference stencils are allowed to
//! reach into the band and are only refused within [`STENCIL_GUARD`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Safety margin (radians) kept from the cut locus on every sphere-like factor.
pub const CUT_MARGIN: f64 = 0.05;

/// Hard guard used while evaluating finite-difference stencils.
pub const STENCIL_GUARD: f64 = 0.005;

/// Tolerance on the unit-norm constraint of sphere and `CP^m` points.
pub const POINT_TOL: f64 = 1e-12;

/// Tolerance on tangency / horizontality of tangent vectors.
pub const TANGENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Sphere { n: usize },
    Euclidean { l: usize },
    Product(Vec<Manifold>),
    ComplexProjective { m: usize },
}

#[derive(Debug, PartialEq)]
struct Inner {
    kind: ManifoldKind,
    ambient_dim: usize,
    intrinsic_dim: usize,
}

/// Descriptor of a model manifold. Cheap to clone.
#[derive(Clone)]
pub struct Manifold(Arc<Inner>);

impl PartialEq for Manifold {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Manifold({self})")
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            ManifoldKind::Sphere { n } => write!(f, "S{n}"),
            ManifoldKind::Euclidean { l } => write!(f, "R{l}"),
            ManifoldKind::ComplexProjective { m } => write!(f, "CP{m}"),
            ManifoldKind::Product(factors) => {
                for (i, factor) in factors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "{factor}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    /// Parses descriptors such as `S2`, `R3`, `CP2`, `S2xS2`, `S3xS5xR2`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.trim().split('x').collect();
        let mut factors = Vec::with_capacity(tokens.len());
        for token in tokens {
            factors.push(parse_atom(token)?);
        }
        if factors.len() == 1 {
            Ok(factors.pop().expect("one factor"))
        } else {
            Manifold::product(factors)
        }
    }
}

fn parse_atom(token: &str) -> Result<Manifold> {
    let bad = || Error::Parse(format!("unknown manifold factor '{token}'"));
    let (ctor, digits): (fn(usize) -> Result<Manifold>, &str) =
        if let Some(rest) = token.strip_prefix("CP") {
            (Manifold::complex_projective, rest)
        } else if let Some(rest) = token.strip_prefix('S') {
            (Manifold::sphere, rest)
        } else if let Some(rest) = token.strip_prefix('R') {
            (Manifold::euclidean, rest)
        } else {
            return Err(bad());
        };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let dim: usize = digits.parse().map_err(|_| bad())?;
    ctor(dim)
}

/// One factor of a (possibly trivial) product, with its coordinate offsets.
#[derive(Debug, Clone)]
pub struct Factor {
    pub manifold: Manifold,
    pub ambient_offset: usize,
    pub intrinsic_offset: usize,
}

fn seg(v: &DVector<f64>, off: usize, len: usize) -> DVector<f64> {
    v.rows(off, len).into_owned()
}

impl Manifold {
    fn from_kind(kind: ManifoldKind) -> Self {
        let (ambient_dim, intrinsic_dim) = match &kind {
            ManifoldKind::Sphere { n } => (n + 1, *n),
            ManifoldKind::Euclidean { l } => (*l, *l),
            ManifoldKind::ComplexProjective { m } => (2 * (m + 1), 2 * m),
            ManifoldKind::Product(fs) => (
                fs.iter().map(Manifold::ambient_dim).sum(),
                fs.iter().map(Manifold::intrinsic_dim).sum(),
            ),
        };
        Manifold(Arc::new(Inner {
            kind,
            ambient_dim,
            intrinsic_dim,
        }))
    }

    pub fn sphere(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("sphere dimension must be at least 1"));
        }
        Ok(Self::from_kind(ManifoldKind::Sphere { n }))
    }

    pub fn euclidean(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("Euclidean dimension must be at least 1"));
        }
        Ok(Self::from_kind(ManifoldKind::Euclidean { l }))
    }

    pub fn complex_projective(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("CP^m needs m >= 1"));
        }
        Ok(Self::from_kind(ManifoldKind::ComplexProjective { m }))
    }

    /// Riemannian product. Nested products are flattened.
    pub fn product(factors: Vec<Manifold>) -> Result<Self> {
        let mut flat = Vec::with_capacity(factors.len());
        for f in factors {
            match f.kind() {
                ManifoldKind::Product(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(f),
            }
        }
        if flat.len() < 2 {
            return Err(Error::domain("a product needs at least two factors"));
        }
        Ok(Self::from_kind(ManifoldKind::Product(flat)))
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.0.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.0.intrinsic_dim
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind(), ManifoldKind::Product(_))
    }

    /// The factors of a product; a non-product manifold is its own single factor.
    pub fn factors(&self) -> Vec<Factor> {
        match self.kind() {
            ManifoldKind::Product(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                let (mut a, mut i) = (0, 0);
                for f in fs {
                    out.push(Factor {
                        manifold: f.clone(),
                        ambient_offset: a,
                        intrinsic_offset: i,
                    });
                    a += f.ambient_dim();
                    i += f.intrinsic_dim();
                }
                out
            }
            _ => vec![Factor {
                manifold: self.clone(),
                ambient_offset: 0,
                intrinsic_offset: 0,
            }],
        }
    }

    /// Distance to the cut locus of this (non-product) factor, if any.
    pub fn cut_limit(&self) -> Option<f64> {
        match self.kind() {
            ManifoldKind::Sphere { .. } => Some(PI),
            ManifoldKind::ComplexProjective { .. } => Some(FRAC_PI_2),
            _ => None,
        }
    }

    /// Splits ambient coordinates into per-factor pieces.
    pub fn split(&self, v: &DVector<f64>) -> Vec<DVector<f64>> {
        self.factors()
            .iter()
            .map(|f| seg(v, f.ambient_offset, f.manifold.ambient_dim()))
            .collect()
    }

    /// Inverse of [`Manifold::split`].
    pub fn join(&self, parts: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.ambient_dim());
        for (f, p) in self.factors().iter().zip(parts) {
            out.rows_mut(f.ambient_offset, f.manifold.ambient_dim())
                .copy_from(p);
        }
        out
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::domain(format!(
                "{self}: expected {} ambient coordinates, got {}",
                self.ambient_dim(),
                v.len()
            )));
        }
        Ok(())
    }

    /// Normalises (and for `CP^m` gauge-fixes) raw coordinates into a valid point.
    pub fn canonical_point(&self, coords: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(coords)?;
        match self.kind() {
            ManifoldKind::Euclidean { .. } => Ok(coords.clone()),
            ManifoldKind::Sphere { .. } => {
                let n = coords.norm();
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::domain("cannot normalise a zero vector"));
                }
                Ok(coords / n)
            }
            ManifoldKind::ComplexProjective { .. } => {
                let n = coords.norm();
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::domain("cannot normalise a zero vector"));
                }
                Ok(gauge(&(coords / n)))
            }
            ManifoldKind::Product(_) => {
                let parts = self
                    .factors()
                    .iter()
                    .zip(self.split(coords))
                    .map(|(f, p)| f.manifold.canonical_point(&p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.join(&parts))
            }
        }
    }

    /// Checks the point constraint without modifying the coordinates.
    pub fn check_point(&self, coords: &DVector<f64>) -> Result<()> {
        self.check_len(coords)?;
        match self.kind() {
            ManifoldKind::Euclidean { .. } => {}
            ManifoldKind::Sphere { .. } | ManifoldKind::ComplexProjective { .. } => {
                let dev = (coords.norm() - 1.0).abs();
                if dev > POINT_TOL {
                    return Err(Error::domain(format!(
                        "{self}: point norm deviates from 1 by {dev:.3e}"
                    )));
                }
            }
            ManifoldKind::Product(_) => {
                for (f, p) in self.factors().iter().zip(self.split(coords)) {
                    f.manifold.check_point(&p)?;
                }
            }
        }
        Ok(())
    }

    /// Orthogonal projection of an ambient vector onto the tangent
    /// (horizontal, for `CP^m`) space at `x`.
    pub fn project_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self.kind() {
            ManifoldKind::Euclidean { .. } => v.clone(),
            ManifoldKind::Sphere { .. } => v - x * x.dot(v),
            ManifoldKind::ComplexProjective { .. } => {
                let ix = times_i(x);
                v - x * x.dot(v) - &ix * ix.dot(v)
            }
            ManifoldKind::Product(_) => {
                let parts: Vec<_> = self
                    .factors()
                    .iter()
                    .zip(self.split(x).iter().zip(self.split(v)))
                    .map(|(f, (xp, vp))| f.manifold.project_tangent(xp, &vp))
                    .collect();
                self.join(&parts)
            }
        }
    }

    /// Largest violation of the tangency constraint of `v` at `x`.
    pub fn tangency_defect(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (v - self.project_tangent(x, v)).amax()
    }

    /// Deterministic orthonormal frame of the tangent space at `x`, as the
    /// columns of an `ambient_dim x intrinsic_dim` matrix (Gram-Schmidt on the
    /// projected ambient basis, in index order).
    pub fn frame(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (amb, int) = (self.ambient_dim(), self.intrinsic_dim());
        let mut frame = DMatrix::zeros(amb, int);
        match self.kind() {
            ManifoldKind::Product(_) => {
                for (f, xp) in self.factors().iter().zip(self.split(x)) {
                    let sub = f.manifold.frame(&xp);
                    frame
                        .view_mut(
                            (f.ambient_offset, f.intrinsic_offset),
                            (f.manifold.ambient_dim(), f.manifold.intrinsic_dim()),
                        )
                        .copy_from(&sub);
                }
            }
            _ => {
                let mut count = 0;
                for k in 0..amb {
                    if count == int {
                        break;
                    }
                    let mut e = DVector::zeros(amb);
                    e[k] = 1.0;
                    let mut v = self.project_tangent(x, &e);
                    // two passes of modified Gram-Schmidt
                    for _ in 0..2 {
                        for j in 0..count {
                            let c = frame.column(j).dot(&v);
                            v -= frame.column(j) * c;
                        }
                    }
                    let n = v.norm();
                    if n > 1e-6 {
                        frame.set_column(count, &(v / n));
                        count += 1;
                    }
                }
                debug_assert_eq!(count, int, "frame construction lost rank");
            }
        }
        frame
    }

    /// Riemannian exponential. Fails if a sphere-like factor's vector is longer
    /// than its cut limit minus `guard`.
    pub fn exp_raw(&self, x: &DVector<f64>, v: &DVector<f64>, guard: f64) -> Result<DVector<f64>> {
        match self.kind() {
            ManifoldKind::Euclidean { .. } => Ok(x + v),
            ManifoldKind::Sphere { .. } => sphere_exp(x, v, PI - guard),
            ManifoldKind::ComplexProjective { .. } => {
                Ok(gauge(&sphere_exp(x, v, FRAC_PI_2 - guard)?))
            }
            ManifoldKind::Product(_) => {
                let parts = self
                    .factors()
                    .iter()
                    .zip(self.split(x).iter().zip(self.split(v)))
                    .map(|(f, (xp, vp))| f.manifold.exp_raw(xp, &vp, guard))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.join(&parts))
            }
        }
    }

    /// Point and velocity of the geodesic `t -> exp_x(t v)`.
    pub fn geodesic(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        t: f64,
        guard: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        match self.kind() {
            ManifoldKind::Euclidean { .. } => Ok((x + v * t, v.clone())),
            ManifoldKind::Sphere { .. } => sphere_geodesic(x, v, t, PI - guard),
            ManifoldKind::ComplexProjective { .. } => {
                let (y, dy) = sphere_geodesic(x, v, t, FRAC_PI_2 - guard)?;
                let (re, im) = gauge_phase(&y);
                Ok((cscale(&y, re, im), cscale(&dy, re, im)))
            }
            ManifoldKind::Product(_) => {
                let mut points = Vec::new();
                let mut velocities = Vec::new();
                for (f, (xp, vp)) in self
                    .factors()
                    .iter()
                    .zip(self.split(x).iter().zip(self.split(v)))
                {
                    let (y, dy) = f.manifold.geodesic(xp, &vp, t, guard)?;
                    points.push(y);
                    velocities.push(dy);
                }
                Ok((self.join(&points), self.join(&velocities)))
            }
        }
    }

    /// Riemannian logarithm, refused within `guard` of the cut locus.
    pub fn log_raw(&self, x: &DVector<f64>, y: &DVector<f64>, guard: f64) -> Result<DVector<f64>> {
        match self.kind() {
            ManifoldKind::Euclidean { .. } => Ok(y - x),
            ManifoldKind::Sphere { .. } => sphere_log(x, y, PI - guard),
            ManifoldKind::ComplexProjective { .. } => {
                let z = cinner(x, y);
                let modulus = z.0.hypot(z.1);
                if modulus < 1e-300 {
                    return Err(Error::CutLocusProximity {
                        distance: FRAC_PI_2,
                        limit: FRAC_PI_2 - guard,
                    });
                }
                let aligned = cscale(y, z.0 / modulus, -z.1 / modulus);
                let v = sphere_log(x, &aligned, FRAC_PI_2 - guard)?;
                // re-project: alignment leaves a vertical residue at rounding level
                Ok(self.project_tangent(x, &v))
            }
            ManifoldKind::Product(_) => {
                let parts = self
                    .factors()
                    .iter()
                    .zip(self.split(x).iter().zip(self.split(y)))
                    .map(|(f, (xp, yp))| f.manifold.log_raw(xp, &yp, guard))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.join(&parts))
            }
        }
    }

    /// Geodesic distance. Exactly symmetric in its arguments.
    pub fn dist_raw(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self.kind() {
            ManifoldKind::Euclidean { .. } => (x - y).norm(),
            ManifoldKind::Sphere { .. } => sphere_dist(x, y),
            ManifoldKind::ComplexProjective { .. } => {
                // average of the two aligned evaluations; IEEE addition commutes
                cp_dist_oriented(x, y) * 0.5 + cp_dist_oriented(y, x) * 0.5
            }
            ManifoldKind::Product(_) => self
                .factor_distances(x, y)
                .iter()
                .map(|d| d * d)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Per-factor geodesic distances.
    pub fn factor_distances(&self, x: &DVector<f64>, y: &DVector<f64>) -> Vec<f64> {
        self.factors()
            .iter()
            .zip(self.split(x).iter().zip(self.split(y)))
            .map(|(f, (xp, yp))| f.manifold.dist_raw(xp, &yp))
            .collect()
    }

    /// Refuses pairs closer than `guard` to the cut locus in any factor.
    pub fn check_margin(&self, x: &DVector<f64>, y: &DVector<f64>, guard: f64) -> Result<()> {
        for (f, (xp, yp)) in self
            .factors()
            .iter()
            .zip(self.split(x).iter().zip(self.split(y)))
        {
            if let Some(limit) = f.manifold.cut_limit() {
                let d = f.manifold.dist_raw(xp, &yp);
                if d > limit - guard {
                    return Err(Error::CutLocusProximity {
                        distance: d,
                        limit: limit - guard,
                    });
                }
            }
        }
        Ok(())
    }

    /// Rotates the fibre representative of `y` so that it is phase-aligned
    /// with `reference` (`CP^m` factors only; identity elsewhere). Aligned
    /// representatives vary smoothly, which finite differences need.
    pub fn align(&self, reference: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        match self.kind() {
            ManifoldKind::ComplexProjective { .. } => align_phase(reference, y),
            ManifoldKind::Product(_) => {
                let parts: Vec<_> = self
                    .factors()
                    .iter()
                    .zip(self.split(reference).iter().zip(self.split(y)))
                    .map(|(f, (r, yp))| f.manifold.align(r, &yp))
                    .collect();
                self.join(&parts)
            }
            _ => y.clone(),
        }
    }

    /// Tangent vector at `base` given `y_plus`/`y_minus` on a curve through
    /// `base` at parameters `+h`/`-h` (central difference).
    pub fn central_velocity(
        &self,
        base: &DVector<f64>,
        y_plus: &DVector<f64>,
        y_minus: &DVector<f64>,
        h: f64,
    ) -> DVector<f64> {
        let d = (self.align(base, y_plus) - self.align(base, y_minus)) / (2.0 * h);
        self.project_tangent(base, &d)
    }

    /// Random point: uniform on spheres and `CP^m`, standard normal on `R^l`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let g = gaussian(self.ambient_dim(), rng);
        match self.kind() {
            ManifoldKind::Euclidean { .. } => g,
            _ => self
                .canonical_point(&g)
                .unwrap_or_else(|_| self.random_point(rng)),
        }
    }

    /// Random unit tangent vector at `x`.
    pub fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        loop {
            let v = self.project_tangent(x, &gaussian(self.ambient_dim(), rng));
            let n = v.norm();
            if n > 1e-8 {
                return v / n;
            }
        }
    }

    /// Random tangent vector at `x` whose component in every sphere-like factor
    /// has length uniform in `[min_len, limit - CUT_MARGIN - room]`; Euclidean
    /// components have length uniform in `[min_len, euclid_max]`.
    pub fn random_tangent_within<R: Rng + ?Sized>(
        &self,
        x: &DVector<f64>,
        min_len: f64,
        room: f64,
        euclid_max: f64,
        rng: &mut R,
    ) -> DVector<f64> {
        let parts: Vec<_> = self
            .factors()
            .iter()
            .zip(self.split(x))
            .map(|(f, xp)| {
                let dir = f.manifold.random_unit_tangent(&xp, rng);
                let hi = match f.manifold.cut_limit() {
                    Some(limit) => limit - CUT_MARGIN - room,
                    None => euclid_max,
                };
                let len = min_len + (hi - min_len).max(0.0) * rng.random::<f64>();
                dir * len
            })
            .collect();
        self.join(&parts)
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn sphere_exp(x: &DVector<f64>, v: &DVector<f64>, limit: f64) -> Result<DVector<f64>> {
    let nv = v.norm();
    if nv > limit {
        return Err(Error::CutLocusProximity {
            distance: nv,
            limit,
        });
    }
    if nv == 0.0 {
        return Ok(x.clone());
    }
    let y = x * nv.cos() + v * (nv.sin() / nv);
    let n = y.norm();
    Ok(y / n)
}

fn sphere_geodesic(
    x: &DVector<f64>,
    v: &DVector<f64>,
    t: f64,
    limit: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let nv = v.norm();
    let len = (t * nv).abs();
    if len > limit {
        return Err(Error::CutLocusProximity {
            distance: len,
            limit,
        });
    }
    if nv == 0.0 {
        return Ok((x.clone(), v.clone()));
    }
    let (s, c) = (t * nv).sin_cos();
    let y = x * c + v * (s / nv);
    let dy = x * (-nv * s) + v * c;
    Ok((y, dy))
}

fn sphere_log(x: &DVector<f64>, y: &DVector<f64>, limit: f64) -> Result<DVector<f64>> {
    let rho = sphere_dist(x, y);
    if rho > limit {
        return Err(Error::CutLocusProximity {
            distance: rho,
            limit,
        });
    }
    let w = y - x * x.dot(y);
    let s = w.norm();
    if s == 0.0 {
        return Ok(DVector::zeros(x.len()));
    }
    Ok(w * (rho / s))
}

/// `2 atan2(|x - y|, |x + y|)`: accurate near both coincident and antipodal
/// points, and exactly symmetric.
fn sphere_dist(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mut minus = 0.0;
    let mut plus = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

fn cp_dist_oriented(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    sphere_dist(x, &align_phase(x, y))
}

/// Complex inner product `<a, b> = sum conj(a_k) b_k` of interleaved vectors.
pub(crate) fn cinner(a: &DVector<f64>, b: &DVector<f64>) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..a.len() / 2 {
        let (ar, ai) = (a[2 * k], a[2 * k + 1]);
        let (br, bi) = (b[2 * k], b[2 * k + 1]);
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    (re, im)
}

/// Multiplies an interleaved complex vector by the scalar `re + i im`.
pub(crate) fn cscale(v: &DVector<f64>, re: f64, im: f64) -> DVector<f64> {
    let mut out = v.clone();
    for k in 0..v.len() / 2 {
        let (a, b) = (v[2 * k], v[2 * k + 1]);
        out[2 * k] = a * re - b * im;
        out[2 * k + 1] = a * im + b * re;
    }
    out
}

/// `i v` for an interleaved complex vector.
pub(crate) fn times_i(v: &DVector<f64>) -> DVector<f64> {
    cscale(v, 0.0, 1.0)
}

fn align_phase(reference: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let (re, im) = cinner(reference, y);
    let modulus = re.hypot(im);
    if modulus < 1e-300 {
        return y.clone();
    }
    cscale(y, re / modulus, -im / modulus)
}

/// Gauge fix: the first coordinate whose modulus is (up to 1e-12 relative)
/// the largest becomes real and nonnegative. Idempotent.
pub(crate) fn gauge(v: &DVector<f64>) -> DVector<f64> {
    let (re, im) = gauge_phase(v);
    let mut out = cscale(v, re, im);
    // pin the reference coordinate so that re-gauging is exactly the identity
    if let Some(k) = gauge_index(v) {
        out[2 * k] = v[2 * k].hypot(v[2 * k + 1]);
        out[2 * k + 1] = 0.0;
    }
    out
}

fn gauge_index(v: &DVector<f64>) -> Option<usize> {
    let m = v.len() / 2;
    let moduli: Vec<f64> = (0..m).map(|k| v[2 * k].hypot(v[2 * k + 1])).collect();
    let max = moduli.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    moduli.iter().position(|&r| r >= max * (1.0 - 1e-12))
}

/// The unit complex factor applied by [`gauge`].
pub(crate) fn gauge_phase(v: &DVector<f64>) -> (f64, f64) {
    match gauge_index(v) {
        None => (1.0, 0.0),
        Some(k) => {
            let r = v[2 * k].hypot(v[2 * k + 1]);
            (v[2 * k] / r, -v[2 * k + 1] / r)
        }
    }
}

/// A point on a model manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: DVector<f64>,
}

impl ManifoldPoint {
    /// Validates the point constraint; `CP^m` coordinates are gauge-fixed.
    pub fn new(manifold: &Manifold, coords: DVector<f64>) -> Result<Self> {
        manifold.check_point(&coords)?;
        let coords = match manifold.kind() {
            ManifoldKind::Euclidean { .. } => coords,
            _ => manifold.canonical_point(&coords)?,
        };
        Ok(Self {
            manifold: manifold.clone(),
            coords,
        })
    }

    /// Normalises arbitrary nonzero coordinates onto the manifold.
    pub fn normalized(manifold: &Manifold, coords: DVector<f64>) -> Result<Self> {
        let coords = manifold.canonical_point(&coords)?;
        Ok(Self {
            manifold: manifold.clone(),
            coords,
        })
    }

    pub fn from_slice(manifold: &Manifold, coords: &[f64]) -> Result<Self> {
        Self::new(manifold, DVector::from_column_slice(coords))
    }

    pub fn random<R: Rng + ?Sized>(manifold: &Manifold, rng: &mut R) -> Self {
        Self {
            manifold: manifold.clone(),
            coords: manifold.random_point(rng),
        }
    }

    pub(crate) fn from_raw(manifold: &Manifold, coords: DVector<f64>) -> Self {
        Self {
            manifold: manifold.clone(),
            coords,
        }
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub(crate) fn same_manifold(&self, other: &ManifoldPoint) -> Result<()> {
        if self.manifold != other.manifold {
            return Err(Error::domain(format!(
                "points live on different manifolds ({} vs {})",
                self.manifold, other.manifold
            )));
        }
        Ok(())
    }
}

/// A tangent vector, carried with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    coords: DVector<f64>,
}

impl TangentVector {
    /// Validates tangency (horizontality for `CP^m`) within [`TANGENT_TOL`].
    pub fn new(base: &ManifoldPoint, coords: DVector<f64>) -> Result<Self> {
        let m = base.manifold();
        m.check_len(&coords)?;
        let defect = m.tangency_defect(base.coords(), &coords);
        if defect > TANGENT_TOL * (1.0 + coords.amax()) {
            return Err(Error::domain(format!(
                "vector is not tangent at the base point (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            base: base.clone(),
            coords,
        })
    }

    pub fn from_slice(base: &ManifoldPoint, coords: &[f64]) -> Result<Self> {
        Self::new(base, DVector::from_column_slice(coords))
    }

    /// Projects an arbitrary ambient vector onto the tangent space.
    pub fn projected(base: &ManifoldPoint, ambient: &DVector<f64>) -> Result<Self> {
        base.manifold().check_len(ambient)?;
        Ok(Self {
            base: base.clone(),
            coords: base.manifold().project_tangent(base.coords(), ambient),
        })
    }

    pub fn zero(base: &ManifoldPoint) -> Self {
        Self {
            base: base.clone(),
            coords: DVector::zeros(base.manifold().ambient_dim()),
        }
    }

    pub(crate) fn from_raw(base: &ManifoldPoint, coords: DVector<f64>) -> Self {
        Self {
            base: base.clone(),
            coords,
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            base: self.base.clone(),
            coords: &self.coords * factor,
        }
    }

    pub(crate) fn at(&self, x: &ManifoldPoint) -> Result<()> {
        x.same_manifold(&self.base)?;
        if (x.coords() - self.base.coords()).amax() > 1e-12 {
            return Err(Error::domain("tangent vector is based at a different point"));
        }
        Ok(())
    }
}

/// Riemannian inner product (the ambient dot product on every model manifold).
pub fn inner(x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    u.at(x)?;
    v.at(x)?;
    Ok(u.coords().dot(v.coords()))
}

/// Riemannian exponential, refused within [`CUT_MARGIN`] of the cut locus.
pub fn exp_map(x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    v.at(x)?;
    let m = x.manifold();
    let y = m.exp_raw(x.coords(), v.coords(), CUT_MARGIN)?;
    Ok(ManifoldPoint::from_raw(m, y))
}

/// Riemannian logarithm, refused within [`CUT_MARGIN`] of the cut locus.
pub fn log_map(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
    x.same_manifold(y)?;
    let v = x.manifold().log_raw(x.coords(), y.coords(), CUT_MARGIN)?;
    Ok(TangentVector::from_raw(x, v))
}

pub fn dist(x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
    x.same_manifold(y)?;
    Ok(x.manifold().dist_raw(x.coords(), y.coords()))
}
