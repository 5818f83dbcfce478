//! Analytic convex bodies and the scalar geometry around them.
//!
//! Bodies are described by [`BodySpec`]; every family has an exact (or
//! certified-accurate) support function, a membership test and, where the
//! origin is interior, a Minkowski functional. The free functions cover ball
//! volumes, cap volumes and areas, the constant `C_α`, and the bump profile
//! used by the lower-bound family.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::vector::{dot, mat_t_vec, mat_vec, norm, rank};

/// Tolerance for accepting a caller-supplied vector as a unit direction.
pub const UNIT_TOL: f64 = 1e-9;

/// A unit vector of `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts `coords` if its norm is within `1e-9` of one, then renormalises.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if coords.is_empty() || !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitDirection { norm: n });
        }
        Ok(Self(coords.into_iter().map(|c| c / n).collect()))
    }

    /// Normalises any nonzero vector.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        let n = norm(coords);
        if coords.is_empty() || n == 0.0 || !n.is_finite() {
            return Err(Error::NonUnitDirection { norm: n });
        }
        Ok(Self(coords.iter().map(|c| c / n).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Direction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Anything with a support function on `R^d`.
///
/// `support_raw` is the positively homogeneous extension: callers may pass
/// any vector, and `support_raw(λx) = λ·support_raw(x)` for `λ ≥ 0`.
pub trait SupportFunction {
    fn dim(&self) -> usize;
    fn support_raw(&self, x: &[f64]) -> f64;
    /// Upper bound on `max |y|` over the set, which is a Lipschitz constant of
    /// the support function.
    fn lipschitz(&self) -> f64;
}

/// Analytic description of a full-dimensional convex body.
///
/// The JSON form (with the `serde` feature) is internally tagged by `kind`:
///
/// ```json
/// {"kind": "ball", "center": [0, 0], "radius": 0.7}
/// {"kind": "ellipsoid", "center": [0, 0], "semi_axes": [2, 1], "rotation": [[1, 0], [0, 1]]}
/// {"kind": "polytope_v", "vertices": [[1, 1], [-1, 1], [-1, -1], [1, -1]]}
/// {"kind": "bump_ball", "radius": 1, "bump_scale": 0.2, "amplitude": 0.02, "bump_direction": [0, 1]}
/// ```
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `center + rotation · diag(semi_axes) · B_d`.
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
        rotation: Vec<Vec<f64>>,
    },
    PolytopeV {
        vertices: Vec<Vec<f64>>,
    },
    /// Centered ball of radius `radius` with a smooth dent of depth
    /// `amplitude · bump_scale²` carved around the pole `radius · bump_direction`.
    BumpBall {
        radius: f64,
        bump_scale: f64,
        amplitude: f64,
        bump_direction: Vec<f64>,
    },
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl BodySpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let b = Self::Ball { center, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>, rotation: Vec<Vec<f64>>) -> Result<Self> {
        let b = Self::Ellipsoid { center, semi_axes, rotation };
        b.validate()?;
        Ok(b)
    }

    /// Axis-aligned ellipsoid.
    pub fn ellipsoid_axis_aligned(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        let d = semi_axes.len();
        let rotation = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::ellipsoid(center, semi_axes, rotation)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let b = Self::PolytopeV { vertices };
        b.validate()?;
        Ok(b)
    }

    /// The square / cube `[-s, s]^d`.
    pub fn cube(d: usize, s: f64) -> Result<Self> {
        let vertices = (0..(1usize << d))
            .map(|mask| (0..d).map(|k| if mask >> k & 1 == 1 { s } else { -s }).collect())
            .collect();
        Self::polytope(vertices)
    }

    pub fn bump_ball(radius: f64, bump_scale: f64, amplitude: f64, bump_direction: Vec<f64>) -> Result<Self> {
        let b = Self::BumpBall { radius, bump_scale, amplitude, bump_direction };
        b.validate()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } | Self::Ellipsoid { center, .. } => center.len(),
            Self::PolytopeV { vertices } => vertices.first().map_or(0, Vec::len),
            Self::BumpBall { bump_direction, .. } => bump_direction.len(),
        }
    }

    /// Checks the structural invariants of the family.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidBody(msg.into()));
        match self {
            Self::Ball { center, radius } => {
                if center.is_empty() || !finite(center) {
                    return invalid("ball center must be a finite nonempty vector");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid("ball radius must be positive");
                }
            }
            Self::Ellipsoid { center, semi_axes, rotation } => {
                let d = center.len();
                if d == 0 || !finite(center) || semi_axes.len() != d {
                    return invalid("ellipsoid center and semi_axes must have equal nonzero length");
                }
                if semi_axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return invalid("ellipsoid semi-axes must be positive");
                }
                if rotation.len() != d || rotation.iter().any(|r| r.len() != d || !finite(r)) {
                    return invalid("ellipsoid rotation must be a d×d matrix");
                }
                for i in 0..d {
                    for j in 0..d {
                        let qtq: f64 = (0..d).map(|k| rotation[k][i] * rotation[k][j]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        if (qtq - want).abs() > 1e-9 {
                            return invalid("ellipsoid rotation must be orthogonal");
                        }
                    }
                }
            }
            Self::PolytopeV { vertices } => {
                let d = self.dim();
                if d == 0 || vertices.iter().any(|v| v.len() != d || !finite(v)) {
                    return invalid("polytope vertices must share a nonzero dimension");
                }
                if vertices.len() < d + 1 {
                    return invalid("polytope needs at least d+1 vertices");
                }
                let diffs: Vec<Vec<f64>> = vertices[1..]
                    .iter()
                    .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
                    .collect();
                let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
                if rank(&diffs, 1e-12 * scale) < d {
                    return invalid("polytope vertices are not affinely spanning");
                }
            }
            Self::BumpBall { radius, bump_scale, amplitude, bump_direction } => {
                if !(radius.is_finite() && *radius > 0.0 && *radius <= 1.0) {
                    return invalid("bump ball radius must lie in (0, 1]");
                }
                if !(bump_scale.is_finite() && *bump_scale > 0.0 && *bump_scale <= 1.0) {
                    return invalid("bump scale must lie in (0, 1]");
                }
                if !(amplitude.is_finite() && *amplitude > 0.0) {
                    return invalid("bump amplitude must be positive");
                }
                if amplitude * bump_scale * bump_scale >= *radius {
                    return invalid("bump depth must be smaller than the radius");
                }
                let n = norm(bump_direction);
                if bump_direction.is_empty() || (n - 1.0).abs() > UNIT_TOL {
                    return invalid("bump direction must be a unit vector");
                }
            }
        }
        Ok(())
    }

    /// Support function at a unit direction.
    pub fn support(&self, u: &Direction) -> Result<f64> {
        self.check_dim(u.len())?;
        Ok(self.support_raw(u))
    }

    /// Support function at a raw slice, rejecting vectors that are not unit.
    pub fn support_checked(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u.len())?;
        let n = norm(u);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitDirection { norm: n });
        }
        Ok(self.support_raw(u))
    }

    /// Width in direction `u`: `h(u) + h(-u)`.
    pub fn width_function(&self, u: &Direction) -> Result<f64> {
        Ok(self.support(u)? + self.support(&u.neg())?)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        let expected = self.dim();
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Membership test, with a relative tolerance of `1e-12` on the boundary.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Self::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius * (1.0 + 1e-12)
            }
            Self::Ellipsoid { center, semi_axes, rotation } => {
                let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let local = mat_t_vec(rotation, &y);
                let q: f64 = local.iter().zip(semi_axes).map(|(l, a)| (l / a) * (l / a)).sum();
                q <= 1.0 + 1e-12
            }
            Self::PolytopeV { vertices } => {
                let facets = polytope_facets(vertices);
                let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
                facets.iter().all(|f| dot(&f.normal, x) <= f.offset + 1e-12 * scale)
            }
            Self::BumpBall { radius, bump_scale, amplitude, bump_direction } => {
                let r2 = dot(x, x);
                if r2 > radius * radius * (1.0 + 1e-12) {
                    return false;
                }
                let along = dot(x, bump_direction);
                if along <= 0.0 {
                    return true;
                }
                let rho = libm::sqrt((r2 - along * along).max(0.0));
                if rho >= 0.5 * radius * bump_scale {
                    return true;
                }
                let lower = bump_boundary_offset(*radius, *bump_scale, *amplitude, rho);
                radius - along >= lower - 1e-12
            }
        }
    }

    /// A canonical interior point: the center for balls, ellipsoids and bump
    /// balls, the vertex centroid for polytopes.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Ball { center, .. } | Self::Ellipsoid { center, .. } => center.clone(),
            Self::PolytopeV { vertices } => {
                let d = self.dim();
                let mut c = vec![0.0; d];
                for v in vertices {
                    for (ci, vi) in c.iter_mut().zip(v) {
                        *ci += vi;
                    }
                }
                c.iter().map(|ci| ci / vertices.len() as f64).collect()
            }
            Self::BumpBall { bump_direction, .. } => vec![0.0; bump_direction.len()],
        }
    }

    /// `max |x|` over the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            Self::Ball { center, radius } => norm(center) + radius,
            Self::Ellipsoid { center, semi_axes, .. } => {
                norm(center) + semi_axes.iter().copied().fold(0.0, f64::max)
            }
            Self::PolytopeV { vertices } => vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
            Self::BumpBall { radius, .. } => *radius,
        }
    }

    /// Whether the body lies in the closed unit ball.
    pub fn is_unit_class(&self) -> bool {
        self.circumradius() <= 1.0 + 1e-12
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            hi[k] = self.support_raw(&e);
            e[k] = -1.0;
            lo[k] = -self.support_raw(&e);
        }
        (lo, hi)
    }

    /// Certified rolling radius: the radius of a ball that rolls freely inside
    /// the body. Known analytically for balls and ellipsoids only.
    pub fn rolling_radius(&self) -> Option<f64> {
        match self {
            Self::Ball { radius, .. } => Some(*radius),
            Self::Ellipsoid { semi_axes, .. } => {
                let min = semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
                let max = semi_axes.iter().copied().fold(0.0, f64::max);
                Some(min * min / max)
            }
            _ => None,
        }
    }

    /// d-volume, where it has a closed form.
    pub fn volume(&self) -> Option<f64> {
        let d = self.dim() as u32;
        match self {
            Self::Ball { radius, .. } => Some(ball_volume(d) * libm::pow(*radius, d as f64)),
            Self::Ellipsoid { semi_axes, .. } => Some(ball_volume(d) * semi_axes.iter().product::<f64>()),
            _ => None,
        }
    }

    /// Minkowski functional `min{λ ≥ 0 : x ∈ λK}`. Requires the origin to be
    /// an interior point.
    pub fn minkowski_functional(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        match self {
            Self::Ball { center, radius } => quadratic_gauge(x, center, *radius),
            Self::Ellipsoid { center, semi_axes, rotation } => {
                let to_local = |v: &[f64]| -> Vec<f64> {
                    mat_t_vec(rotation, v).iter().zip(semi_axes).map(|(l, a)| l / a).collect()
                };
                quadratic_gauge(&to_local(x), &to_local(center), 1.0)
            }
            Self::PolytopeV { vertices } => {
                let facets = polytope_facets(vertices);
                let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
                if facets.iter().any(|f| f.offset <= 1e-12 * scale) {
                    return Err(Error::OriginNotInterior);
                }
                Ok(facets.iter().map(|f| dot(&f.normal, x) / f.offset).fold(0.0, f64::max))
            }
            Self::BumpBall { radius, bump_scale, amplitude, .. } => {
                let n = norm(x);
                if n == 0.0 {
                    return Ok(0.0);
                }
                // B(0, R - αδ²) ⊆ body ⊆ B(0, R) brackets the gauge.
                let mut lo = n / radius;
                let mut hi = n / (radius - amplitude * bump_scale * bump_scale);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let y: Vec<f64> = x.iter().map(|c| c / mid).collect();
                    if self.contains(&y) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// The polar body, for centered balls and ellipsoids.
    pub fn polar_body(&self) -> Result<BodySpec> {
        match self {
            Self::Ball { center, radius } if norm(center) == 0.0 => {
                BodySpec::ball(center.clone(), 1.0 / radius)
            }
            Self::Ellipsoid { center, semi_axes, rotation } if norm(center) == 0.0 => BodySpec::ellipsoid(
                center.clone(),
                semi_axes.iter().map(|a| 1.0 / a).collect(),
                rotation.clone(),
            ),
            _ => Err(Error::Unsupported("polar body")),
        }
    }

    /// Image under `x ↦ scale · rotation · x + translation`.
    pub fn similarity_image(&self, scale: f64, rotation: &[Vec<f64>], translation: &[f64]) -> Result<BodySpec> {
        if !(scale > 0.0) {
            return Err(Error::OutOfRange { name: "scale", value: scale });
        }
        let map = |v: &[f64]| -> Vec<f64> {
            mat_vec(rotation, v).iter().zip(translation).map(|(r, t)| scale * r + t).collect()
        };
        match self {
            Self::Ball { center, radius } => BodySpec::ball(map(center), scale * radius),
            Self::Ellipsoid { center, semi_axes, rotation: q } => {
                let d = center.len();
                let rq: Vec<Vec<f64>> = (0..d)
                    .map(|i| (0..d).map(|j| (0..d).map(|k| rotation[i][k] * q[k][j]).sum()).collect())
                    .collect();
                BodySpec::ellipsoid(map(center), semi_axes.iter().map(|a| a * scale).collect(), rq)
            }
            Self::PolytopeV { vertices } => BodySpec::polytope(vertices.iter().map(|v| map(v)).collect()),
            Self::BumpBall { .. } => Err(Error::Unsupported("similarity image")),
        }
    }
}

/// Gauge of `B(center, radius)` at `x`: positive root of
/// `λ²(R² − |c|²) + 2λ⟨x,c⟩ − |x|² = 0`.
fn quadratic_gauge(x: &[f64], center: &[f64], radius: f64) -> Result<f64> {
    let c2 = dot(center, center);
    let a = radius * radius - c2;
    if a <= 0.0 {
        return Err(Error::OriginNotInterior);
    }
    let xc = dot(x, center);
    let x2 = dot(x, x);
    if x2 == 0.0 {
        return Ok(0.0);
    }
    Ok((-xc + libm::sqrt(xc * xc + a * x2)) / a)
}

impl SupportFunction for BodySpec {
    fn dim(&self) -> usize {
        BodySpec::dim(self)
    }

    fn support_raw(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ball { center, radius } => dot(x, center) + radius * norm(x),
            Self::Ellipsoid { center, semi_axes, rotation } => {
                let local = mat_t_vec(rotation, x);
                let s: f64 = local.iter().zip(semi_axes).map(|(l, a)| (l * a) * (l * a)).sum();
                dot(x, center) + libm::sqrt(s)
            }
            Self::PolytopeV { vertices } => {
                vertices.iter().map(|v| dot(v, x)).fold(f64::NEG_INFINITY, f64::max)
            }
            Self::BumpBall { radius, bump_scale, amplitude, bump_direction } => {
                let n = norm(x);
                if n == 0.0 {
                    return 0.0;
                }
                let c = dot(x, bump_direction) / n;
                n * bump_ball_support(*radius, *bump_scale, *amplitude, c)
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        self.circumradius()
    }
}

/// Lower-boundary height of the bump ball at tangential distance `rho` from
/// the pole, measured inward from the tangent plane at the pole.
pub(crate) fn bump_boundary_offset(radius: f64, scale: f64, amplitude: f64, rho: f64) -> f64 {
    let rho = rho.min(radius);
    radius - libm::sqrt(radius * radius - rho * rho)
        + amplitude * scale * scale * bump_profile(2.0 * rho / (radius * scale))
}

/// Support of the bump ball at a unit direction making cosine `c` with the
/// bump direction.
fn bump_ball_support(radius: f64, scale: f64, amplitude: f64, c: f64) -> f64 {
    let c = c.clamp(-1.0, 1.0);
    let sin_g0 = 0.5 * scale;
    let cos_g0 = libm::sqrt(1.0 - sin_g0 * sin_g0);
    if c <= cos_g0 {
        return radius;
    }
    let s = libm::sqrt((1.0 - c * c).max(0.0));
    // Unperturbed sphere outside the bump window: R cos(γ0 − β).
    let sphere = radius * (cos_g0 * c + sin_g0 * s);
    let rho_max = 0.5 * radius * scale;
    let g = |rho: f64| c * (radius - bump_boundary_offset(radius, scale, amplitude, rho)) + s * rho;
    const GRID: usize = 512;
    let step = rho_max / GRID as f64;
    let (mut best_k, mut best) = (0usize, g(0.0));
    for k in 1..=GRID {
        let v = g(k as f64 * step);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    // Golden-section polish on the bracketing grid cells.
    let mut a = best_k.saturating_sub(1) as f64 * step;
    let mut b = (best_k + 1).min(GRID) as f64 * step;
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..100 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        }
        if b - a < 1e-16 {
            break;
        }
    }
    best.max(f1).max(f2).max(sphere)
}

/// A facet `⟨normal, x⟩ ≤ offset` with unit normal.
#[derive(Debug, Clone)]
pub(crate) struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Facets of the hull of a small vertex set, by brute force over d-subsets.
/// Intended for the analytic polytope bodies (a handful of vertices).
pub(crate) fn polytope_facets(vertices: &[Vec<f64>]) -> Vec<Facet> {
    let d = vertices[0].len();
    let m = vertices.len();
    let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut facets: Vec<Facet> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        if let Some(mut normal) = hyperplane_normal(vertices, &idx) {
            let mut offset = dot(&normal, &vertices[idx[0]]);
            let side: Vec<f64> = vertices.iter().map(|v| dot(&normal, v) - offset).collect();
            let above = side.iter().any(|s| *s > tol);
            let below = side.iter().any(|s| *s < -tol);
            if !(above && below) {
                if above {
                    normal.iter_mut().for_each(|c| *c = -*c);
                    offset = -offset;
                }
                let dup = facets.iter().any(|f| {
                    (f.offset - offset).abs() <= tol
                        && f.normal.iter().zip(&normal).all(|(a, b)| (a - b).abs() <= 1e-9)
                });
                if !dup {
                    facets.push(Facet { normal, offset });
                }
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return facets;
            }
            i -= 1;
            if idx[i] < m - d + i {
                idx[i] += 1;
                for j in (i + 1)..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unit normal of the affine hull of `d` points (generalised cross product).
fn hyperplane_normal(vertices: &[Vec<f64>], idx: &[usize]) -> Option<Vec<f64>> {
    let d = idx.len();
    let base = &vertices[idx[0]];
    if d == 1 {
        return Some(vec![1.0]);
    }
    let rows: Vec<Vec<f64>> = idx[1..]
        .iter()
        .map(|&i| vertices[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let mut normal = vec![0.0; d];
    for (k, nk) in normal.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| *v).collect())
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *nk = sign * crate::vector::det(&minor);
    }
    let n = norm(&normal);
    let scale: f64 = rows.iter().map(|r| norm(r)).product::<f64>().max(1e-300);
    if n <= 1e-12 * scale {
        return None;
    }
    Some(normal.iter().map(|c| c / n).collect())
}

/// `(h_K(x), ‖x‖_{K°})` for a centered ball or ellipsoid. The two entries agree
/// by polar duality; the second is computed from the explicit polar body.
pub fn polar_support_identity_check(body: &BodySpec, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: x.len() });
    }
    let polar = body.polar_body()?;
    Ok((body.support_raw(x), polar.minkowski_functional(x)?))
}

/// Volume `β_p` of the unit ball of `R^p` (`β_0 = 1`).
pub fn ball_volume(p: u32) -> f64 {
    let half = p as f64 / 2.0;
    libm::pow(PI, half) / libm::tgamma(half + 1.0)
}

/// Surface area `A_d = d·β_d` of `S^{d-1}`.
pub fn sphere_area(d: u32) -> f64 {
    d as f64 * ball_volume(d)
}

/// Volume of the cap of height `eps` of a `d`-ball of radius `r`, by adaptive
/// quadrature of `∫_0^eps (x(2r−x))^{(d−1)/2} β_{d−1} dx`.
pub fn cap_volume_ball(d: u32, r: f64, eps: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::OutOfRange { name: "d", value: 0.0 });
    }
    if !(r > 0.0) {
        return Err(Error::OutOfRange { name: "r", value: r });
    }
    if !(0.0..=2.0 * r).contains(&eps) {
        return Err(Error::OutOfRange { name: "eps", value: eps });
    }
    let beta = ball_volume(d - 1);
    let power = (d as f64 - 1.0) / 2.0;
    let tol = 1e-12 * libm::pow(r, d as f64).max(1e-300);
    // symmetric integrand: split at the equator to keep the refinement local
    let f = |x: f64| beta * libm::pow((x * (2.0 * r - x)).max(0.0), power);
    let v = if eps <= r {
        integrate(f, 0.0, eps, tol)
    } else {
        integrate(f, 0.0, r, 0.5 * tol) + integrate(f, r, eps, 0.5 * tol)
    };
    Ok(v)
}

/// Surface area of the cap of height `eps ≤ r` of the sphere of radius `r` in
/// `R^d`: `A_{d−1} r^{d−1} ∫_0^θ sin^{d−2}φ dφ` with `sin²θ = eps(2r−eps)/r²`.
///
/// This is the `t = sin²φ` form of `∫_0^{eps(2r−eps)/r²} t^{(d−3)/2}(1−t)^{−1/2} dt`,
/// normalised so that the half sphere has half the total area.
pub fn cap_area_sphere(d: u32, r: f64, eps: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::OutOfRange { name: "d", value: d as f64 });
    }
    if !(r > 0.0) {
        return Err(Error::OutOfRange { name: "r", value: r });
    }
    if !(0.0..=r).contains(&eps) {
        return Err(Error::OutOfRange { name: "eps", value: eps });
    }
    let t_max = (eps * (2.0 * r - eps) / (r * r)).clamp(0.0, 1.0);
    let theta = libm::asin(libm::sqrt(t_max));
    let k = d - 2;
    let integral = integrate(|phi| libm::pow(libm::sin(phi), k as f64), 0.0, theta, 1e-14);
    Ok(sphere_measure(d - 1) * libm::pow(r, (d - 1) as f64) * integral)
}

/// Area of `S^{k-1}`, with the 0-sphere counted as two points.
fn sphere_measure(k: u32) -> f64 {
    k as f64 * ball_volume(k)
}

/// `C_α = inf_{t>0} (1+t)^α / (1+t^α) = min(1, 2^{α−1})`.
///
/// For `α ≥ 1` the ratio tends to 1 as `t → 0` and never drops below it; for
/// `α < 1` the symmetry `t ↔ 1/t` puts the minimiser at `t = 1`.
pub fn c_alpha(alpha: f64) -> f64 {
    libm::pow(2.0, alpha - 1.0).min(1.0)
}

/// Grid minimisation of `(1+t)^α / (1+t^α)` over log-spaced `t ∈ [1e-8, 1e8]`.
/// Cross-check for [`c_alpha`].
pub fn c_alpha_grid(alpha: f64, points: usize) -> f64 {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let t = libm::pow(10.0, -8.0 + 16.0 * i as f64 / (points - 1) as f64);
            libm::pow(1.0 + t, alpha) / (1.0 + libm::pow(t, alpha))
        })
        .fold(f64::INFINITY, f64::min)
}

fn g_step(x: f64) -> f64 {
    if x > 0.0 {
        libm::exp(-1.0 / x)
    } else {
        0.0
    }
}

/// `η(x) = e⁴ g(2x−1) g(2−2x)` with `g(x) = exp(−1/x)` for `x > 0`, else 0.
///
/// Supported on `(1/2, 1)`, smooth, with maximum `η(3/4) = 1`.
pub fn bump_eta(x: f64) -> f64 {
    libm::exp(4.0) * g_step(2.0 * x - 1.0) * g_step(2.0 - 2.0 * x)
}

/// Radial bump profile centred at the origin: `bump_eta(3/4 + |s|/4)`, which
/// equals `exp(4 − 4/(1−s²))` on `|s| < 1` and vanishes elsewhere. Its maximum
/// is `bump_profile(0) = 1`.
pub fn bump_profile(s: f64) -> f64 {
    bump_eta(0.75 + 0.25 * s.abs())
}

/// First and second derivatives of [`bump_profile`] for `s ≥ 0`.
pub(crate) fn bump_profile_derivatives(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let w = 1.0 - s * s;
    let e = bump_profile(s);
    let d1 = -8.0 * s / (w * w) * e;
    let d2 = e * (64.0 * s * s / (w * w * w * w) - 8.0 / (w * w) - 32.0 * s * s / (w * w * w));
    (d1, d2)
}

/// Extreme principal curvatures `(min, max)` of the bump-ball boundary over
/// the bump window, sampled at `samples` radii. Outside the window the
/// boundary is the sphere, with curvature `1/radius`.
///
/// The lower boundary is the graph `y = φ(ρ)`; its radial curvature is
/// `φ''/(1+φ'²)^{3/2}` and, for `d ≥ 3`, the rotational one is
/// `φ'/(ρ√(1+φ'²))`. The body is convex iff both are `≥ 0`.
pub fn bump_curvature_range(d: usize, radius: f64, scale: f64, amplitude: f64, samples: usize) -> (f64, f64) {
    let rho_max = 0.5 * radius * scale;
    let k = 2.0 / (radius * scale);
    let depth = amplitude * scale * scale;
    let mut lo = 1.0 / radius;
    let mut hi = 1.0 / radius;
    for i in 0..=samples.max(1) {
        let rho = rho_max * i as f64 / samples.max(1) as f64;
        let (e1, e2) = bump_profile_derivatives(k * rho);
        let root = libm::sqrt(radius * radius - rho * rho);
        let d1 = rho / root + depth * k * e1;
        let d2 = radius * radius / (root * root * root) + depth * k * k * e2;
        let g = 1.0 + d1 * d1;
        let radial = d2 / (g * libm::sqrt(g));
        lo = lo.min(radial);
        hi = hi.max(radial);
        if d >= 3 {
            let rot = if rho == 0.0 { radial } else { d1 / (rho * libm::sqrt(g)) };
            lo = lo.min(rot);
            hi = hi.max(rot);
        }
    }
    (lo, hi)
}

/// Largest bump amplitude keeping every principal curvature in
/// `[0, 1/rolling]`, by bisection on [`bump_curvature_range`].
pub fn max_bump_amplitude(d: usize, radius: f64, scale: f64, rolling: f64) -> f64 {
    let ok = |a: f64| {
        let (lo, hi) = bump_curvature_range(d, radius, scale, a, 4000);
        lo >= 0.0 && hi <= 1.0 / rolling
    };
    if !ok(0.0) {
        return 0.0;
    }
    let (mut a, mut b) = (0.0, radius / (scale * scale));
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if ok(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// `|G₀ ∖ G(u)|` for the bump ball: the bump thickness
/// `α δ² η(2|t|/(Rδ))` integrated over the tangential disk `|t| < Rδ/2`,
/// i.e. `α δ^{d+1} R^{d−1} 2^{1−d} · k β_k ∫₀¹ η(s) s^{k−1} ds` with `k = d−1`.
pub fn bump_volume_defect(d: usize, radius: f64, scale: f64, amplitude: f64) -> f64 {
    let k = d as u32 - 1;
    let radial = integrate(
        |s| bump_profile(s) * libm::pow(s, k as f64 - 1.0),
        0.0,
        1.0,
        1e-14,
    );
    let shell = if k == 0 { 1.0 } else { k as f64 * ball_volume(k) };
    amplitude * libm::pow(scale, d as f64 + 1.0) * libm::pow(radius, k as f64) / libm::pow(2.0, k as f64)
        * shell
        * radial
}
