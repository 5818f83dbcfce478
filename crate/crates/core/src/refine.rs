//! Branch-and-bound bracket for `sup_u (h_K(u) − h_hull(u))`.
//!
//! The sphere is split into cube-sphere cells (radial projections of boxes on
//! the faces of `[-1, 1]^d`). Each cell sits inside a spherical cap around its
//! center. The deficit at the center is a lower bound for the supremum; for any
//! hull point `x`, `h_K(u) − ⟨u, x⟩ ≥ h_K(u) − h_hull(u)`, and the maximum of
//! the left side over a cap has a closed form for the analytic families. Cells
//! whose upper bound cannot beat the best lower bound are discarded; the rest
//! are split until the bracket closes.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{BodySpec, SupportFunction};
use crate::hull::HullSupport;
use crate::vector::{dist, dot, mat_t_vec, norm};

/// Stopping rule and budget.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefineOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cells evaluated before giving up on the tolerance.
    pub max_cells: usize,
    /// Uniform splits of each face before branching.
    pub initial_depth: u32,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-3, max_cells: 2_000_000, initial_depth: 3 }
    }
}

/// `lower ≤ sup ≤ upper`; `lower` is attained at `argmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupBracket {
    pub lower: f64,
    pub upper: f64,
    pub argmax: Vec<f64>,
    pub cells: usize,
}

const MAX_ANCHORS: usize = 6;

struct Cell {
    face: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    upper: f64,
    theta: f64,
    anchors: Vec<usize>,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

fn face_point(d: usize, face: usize, coords: &[f64]) -> Vec<f64> {
    let axis = face / 2;
    let sign = if face.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut p = Vec::with_capacity(d);
    let mut it = coords.iter();
    for k in 0..d {
        if k == axis {
            p.push(sign);
        } else {
            p.push(*it.next().expect("d-1 face coordinates"));
        }
    }
    let n = norm(&p);
    p.iter_mut().for_each(|x| *x /= n);
    p
}

/// `sup ⟨u, w⟩` over the cap of angular radius `theta` around unit `c`.
fn cap_max_linear(w: &[f64], c: &[f64], theta: f64) -> f64 {
    let wn = norm(w);
    if wn == 0.0 {
        return 0.0;
    }
    let angle = libm::acos((dot(w, c) / wn).clamp(-1.0, 1.0));
    wn * libm::cos((angle - theta).max(0.0))
}

/// `sup (h_K(u) − ⟨u, x⟩)` over the cap, or an upper bound for it.
fn cap_bound(body: &BodySpec, x: &[f64], c: &[f64], theta: f64) -> f64 {
    let chord = 2.0 * libm::sin(0.5 * theta);
    match body {
        BodySpec::Ball { center, radius } => {
            let w: Vec<f64> = center.iter().zip(x).map(|(a, b)| a - b).collect();
            radius + cap_max_linear(&w, c, theta)
        }
        BodySpec::Ellipsoid { center, semi_axes, rotation } => {
            let w: Vec<f64> = center.iter().zip(x).map(|(a, b)| a - b).collect();
            let local = mat_t_vec(rotation, c);
            let s: f64 = local.iter().zip(semi_axes).map(|(l, a)| (l * a) * (l * a)).sum();
            let a_max = semi_axes.iter().copied().fold(0.0, f64::max);
            cap_max_linear(&w, c, theta) + libm::sqrt(s) + a_max * chord
        }
        BodySpec::PolytopeV { vertices } => vertices
            .iter()
            .map(|v| {
                let w: Vec<f64> = v.iter().zip(x).map(|(a, b)| a - b).collect();
                cap_max_linear(&w, c, theta)
            })
            .fold(f64::NEG_INFINITY, f64::max),
        BodySpec::BumpBall { .. } => {
            let lip = body.circumradius() + dist(x, &body.center()) + norm(&body.center());
            body.support_raw(c) - dot(c, x) + chord * lip
        }
    }
}

struct Search<'a> {
    body: &'a BodySpec,
    hull: &'a HullSupport,
    d: usize,
    lower: f64,
    argmax: Vec<f64>,
    cells: usize,
}

impl Search<'_> {
    fn make_cell(
        &mut self,
        face: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
        parent_upper: f64,
        parent_anchors: &[usize],
    ) -> Result<Cell> {
        self.cells += 1;
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let c = face_point(self.d, face, &mid);
        let m = self.d - 1;
        let mut theta: f64 = 0.0;
        let mut corner = vec![0.0; m];
        for mask in 0..(1usize << m) {
            for k in 0..m {
                corner[k] = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
            }
            let p = face_point(self.d, face, &corner);
            theta = theta.max(2.0 * libm::asin((0.5 * dist(&p, &c)).min(1.0)));
        }
        let (hv, x) = self.hull.support_position(&c, parent_anchors);
        let gap = self.body.support_raw(&c) - hv;
        if gap < -1e-9 {
            return Err(Error::NotNested { deficit: gap });
        }
        if gap > self.lower {
            self.lower = gap;
            self.argmax = c.clone();
        }
        let mut anchors: Vec<usize> = Vec::with_capacity(MAX_ANCHORS);
        anchors.push(x);
        for &a in parent_anchors {
            if anchors.len() == MAX_ANCHORS {
                break;
            }
            if !anchors.contains(&a) {
                anchors.push(a);
            }
        }
        let mut upper = parent_upper;
        for &a in &anchors {
            upper = upper.min(cap_bound(self.body, self.hull.point(a), &c, theta));
        }
        Ok(Cell { face, lo, hi, upper: upper.max(gap.max(0.0)), theta, anchors })
    }
}

/// Brackets `sup_{u ∈ S^{d−1}} (h_body(u) − h_hull(u))`.
///
/// Stops once `upper ≤ lower + abs_tol + rel_tol·lower`, or after
/// `max_cells` evaluations with a looser (still valid) bracket.
pub fn refine_sup_deficit(body: &BodySpec, hull: &HullSupport, opts: &RefineOptions) -> Result<SupBracket> {
    let d = body.dim();
    if hull.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: hull.dim() });
    }
    let mut search = Search { body, hull, d, lower: 0.0, argmax: vec![0.0; d], cells: 0 };
    let tol = |lower: f64| opts.abs_tol + opts.rel_tol * lower;
    let per_axis = 1usize << opts.initial_depth;
    let m = d - 1;
    let mut heap = BinaryHeap::new();
    for face in 0..2 * d {
        for code in 0..per_axis.pow(m as u32) {
            let mut c = code;
            let mut lo = vec![0.0; m];
            let mut hi = vec![0.0; m];
            for k in 0..m {
                let i = c % per_axis;
                c /= per_axis;
                lo[k] = -1.0 + 2.0 * i as f64 / per_axis as f64;
                hi[k] = -1.0 + 2.0 * (i + 1) as f64 / per_axis as f64;
            }
            heap.push(search.make_cell(face, lo, hi, f64::INFINITY, &[])?);
        }
    }
    let mut pruned: f64 = 0.0;
    let upper = loop {
        let Some(top) = heap.pop() else {
            break pruned.max(search.lower);
        };
        if top.upper <= search.lower + tol(search.lower) || search.cells >= opts.max_cells || top.theta == 0.0 {
            if top.theta == 0.0 && top.upper > search.lower + tol(search.lower) {
                // degenerate cell: its bound is its exact value
                pruned = pruned.max(top.upper);
                continue;
            }
            break top.upper.max(pruned);
        }
        for mask in 0..(1usize << m) {
            let mut lo = top.lo.clone();
            let mut hi = top.hi.clone();
            for k in 0..m {
                let mid = 0.5 * (top.lo[k] + top.hi[k]);
                if mask >> k & 1 == 1 {
                    lo[k] = mid;
                } else {
                    hi[k] = mid;
                }
            }
            let child = search.make_cell(top.face, lo, hi, top.upper, &top.anchors)?;
            if child.upper <= search.lower + tol(search.lower) {
                pruned = pruned.max(child.upper);
            } else {
                heap.push(child);
            }
        }
    };
    Ok(SupBracket { lower: search.lower, upper: upper.max(search.lower), argmax: search.argmax, cells: search.cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::build_net;
    use crate::rng::{stream_rng, uniform_direction};
    use crate::samplers::{sample, Mode};
    use core::f64::consts::PI;

    #[test]
    fn regular_polygon_exact() {
        let body = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        for m in [4usize, 16, 64, 1000] {
            let pts: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / m as f64 + 0.1;
                    vec![libm::cos(t), libm::sin(t)]
                })
                .collect();
            let hull = HullSupport::new(&pts).unwrap();
            let exact = 1.0 - libm::cos(PI / m as f64);
            let opts = RefineOptions { rel_tol: 1e-6, ..RefineOptions::default() };
            let b = refine_sup_deficit(&body, &hull, &opts).unwrap();
            assert!(b.lower <= exact * (1.0 + 1e-12) && b.upper >= exact * (1.0 - 1e-12), "{m}: {b:?}");
            assert!(b.upper - b.lower <= 1e-6 * exact + 1e-12);
        }
    }

    #[test]
    fn brackets_dense_sweep() {
        let bodies = [
            BodySpec::ball(vec![0.1, 0.0, -0.1], 0.8).unwrap(),
            BodySpec::ellipsoid_axis_aligned(vec![0.0, 0.1, 0.0], vec![0.7, 0.4, 0.5]).unwrap(),
            BodySpec::cube(3, 0.5).unwrap(),
        ];
        let net = build_net(3, 0.04, 1).unwrap();
        for (i, body) in bodies.iter().enumerate() {
            let cloud = sample(body, Mode::Interior, 400, i as u64).unwrap();
            let hull = HullSupport::new(&cloud.points).unwrap();
            let b = refine_sup_deficit(body, &hull, &RefineOptions::default()).unwrap();
            let sweep = net
                .directions()
                .iter()
                .map(|u| body.support_raw(u) - hull.eval(u))
                .fold(0.0, f64::max);
            assert!(sweep <= b.upper + 1e-12, "{i}: sweep {sweep} above {b:?}");
            assert!(b.lower <= b.upper);
            let mut rng = stream_rng(3, 3);
            for _ in 0..2000 {
                let u = uniform_direction(&mut rng, 3);
                assert!(body.support_raw(&u) - hull.eval(&u) <= b.upper + 1e-12);
            }
        }
    }
}
