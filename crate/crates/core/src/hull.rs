//! Support function of the convex hull of a point cloud.
//!
//! `h_{conv(X)}(u) = max_i ⟨u, X_i⟩`, answered by a kd-tree whose nodes carry
//! two bounds on every point below them: the bounding box support
//! `Σ_k max(u_k lo_k, u_k hi_k)`, and a cone bound from the angular radius of
//! the node's directions around an axis together with its norm range. Boxes
//! are tight for flat clusters, cones for clusters on a curved surface.
//! Subtrees whose bound cannot beat the current best are skipped.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::SupportFunction;
use crate::vector::norm;

const LEAF: usize = 8;

#[derive(Debug, Clone)]
struct Node {
    start: u32,
    end: u32,
    /// Children, or `u32::MAX` for a leaf.
    left: u32,
    right: u32,
}

/// Hull support evaluator over a fixed point set.
#[derive(Debug, Clone)]
pub struct HullSupport {
    d: usize,
    /// Points in tree order, row-major.
    coords: Vec<f64>,
    /// Original index of each stored point.
    ids: Vec<u32>,
    nodes: Vec<Node>,
    /// Node bounding boxes, `2·d` values per node (lo then hi).
    boxes: Vec<f64>,
    /// Per node: unit axis, `cos φ`, `sin φ`, smallest and largest norm.
    cones: Vec<f64>,
    radius: f64,
}

impl HullSupport {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let d = first.len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut hs = Self {
            d,
            coords: Vec::with_capacity(points.len() * d),
            ids: Vec::new(),
            nodes: Vec::new(),
            boxes: Vec::new(),
            cones: Vec::new(),
            radius: 0.0,
        };
        let norms: Vec<f64> = points.iter().map(|p| norm(p)).collect();
        hs.radius = norms.iter().copied().fold(0.0, f64::max);
        hs.build(points, &norms, &mut order, 0);
        for &i in &order {
            hs.coords.extend_from_slice(&points[i as usize]);
        }
        hs.ids = order;
        Ok(hs)
    }

    fn build(&mut self, points: &[Vec<f64>], norms: &[f64], order: &mut [u32], offset: usize) -> u32 {
        let d = self.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in order.iter() {
            for (k, &x) in points[i as usize].iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: offset as u32,
            end: (offset + order.len()) as u32,
            left: u32::MAX,
            right: u32::MAX,
        });
        self.boxes.extend_from_slice(&lo);
        self.boxes.extend_from_slice(&hi);
        self.push_cone(points, norms, order);
        if order.len() > LEAF {
            let axis = (0..d)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = order.len() / 2;
            order.select_nth_unstable_by(mid, |&a, &b| {
                points[a as usize][axis].total_cmp(&points[b as usize][axis])
            });
            let (l, r) = order.split_at_mut(mid);
            let left = self.build(points, norms, l, offset);
            let right = self.build(points, norms, r, offset + mid);
            self.nodes[id as usize].left = left;
            self.nodes[id as usize].right = right;
        }
        id
    }

    fn push_cone(&mut self, points: &[Vec<f64>], norms: &[f64], order: &[u32]) {
        let d = self.d;
        let mut axis = vec![0.0; d];
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        let mut degenerate = false;
        for &i in order {
            let p = &points[i as usize];
            let r = norms[i as usize];
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            if r == 0.0 {
                degenerate = true;
            } else {
                axis.iter_mut().zip(p).for_each(|(a, x)| *a += x / r);
            }
        }
        let an = norm(&axis);
        let mut cos_phi = -1.0f64;
        if !degenerate && an > 0.0 {
            axis.iter_mut().for_each(|a| *a /= an);
            cos_phi = order
                .iter()
                .map(|&i| {
                    let p = &points[i as usize];
                    p.iter().zip(&axis).map(|(a, b)| a * b).sum::<f64>() / norms[i as usize]
                })
                .fold(1.0, f64::min)
                .clamp(-1.0, 1.0);
        }
        let sin_phi = libm::sqrt(1.0 - cos_phi * cos_phi);
        self.cones.extend_from_slice(&axis);
        self.cones.extend_from_slice(&[cos_phi, sin_phi, rmin, rmax]);
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn box_bound(&self, node: usize, u: &[f64]) -> f64 {
        let b = &self.boxes[node * 2 * self.d..(node + 1) * 2 * self.d];
        let (lo, hi) = b.split_at(self.d);
        u.iter().zip(lo).zip(hi).map(|((u, l), h)| (u * l).max(u * h)).sum()
    }

    /// `rmax·|u|` inside the cone; outside, `|x| cos∠(u, x) ≤ r cos(a − φ)`
    /// with `r` the largest norm when the cosine is positive, the smallest
    /// otherwise.
    fn cone_bound(&self, node: usize, u: &[f64], un: f64) -> f64 {
        let c = &self.cones[node * (self.d + 4)..(node + 1) * (self.d + 4)];
        let (axis, rest) = c.split_at(self.d);
        let (cos_phi, sin_phi, rmin, rmax) = (rest[0], rest[1], rest[2], rest[3]);
        if un == 0.0 {
            return 0.0;
        }
        let ca = (u.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>() / un).clamp(-1.0, 1.0);
        if ca >= cos_phi {
            return rmax * un;
        }
        let sa = libm::sqrt(1.0 - ca * ca);
        // slack covers rounding in the stored angle
        let cos_gap = (ca * cos_phi + sa * sin_phi + 1e-12).min(1.0);
        if cos_gap >= 0.0 {
            rmax * un * cos_gap
        } else {
            rmin * un * cos_gap
        }
    }

    fn value_at(&self, pos: usize, u: &[f64]) -> f64 {
        self.coords[pos * self.d..(pos + 1) * self.d].iter().zip(u).map(|(a, b)| a * b).sum()
    }

    /// `(max_i ⟨u, X_i⟩, stored position of the maximiser)`, seeded with the best of the `hints` positions, which
    /// tightens pruning from the first node.
    fn query_from(&self, u: &[f64], hints: &[usize]) -> (f64, usize) {
        let d = self.d;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0usize;
        for &h in hints {
            let v = self.value_at(h, u);
            if v > best {
                best = v;
                arg = h;
            }
        }
        let un = norm(u);
        let node_bound = |node: usize| self.box_bound(node, u).min(self.cone_bound(node, u, un));
        let mut stack: Vec<(u32, f64)> = Vec::with_capacity(64);
        stack.push((0, node_bound(0)));
        while let Some((n, bound)) = stack.pop() {
            if bound <= best {
                continue;
            }
            let node = &self.nodes[n as usize];
            if node.left == u32::MAX {
                for pos in node.start as usize..node.end as usize {
                    let p = &self.coords[pos * d..(pos + 1) * d];
                    let v: f64 = p.iter().zip(u).map(|(a, b)| a * b).sum();
                    if v > best {
                        best = v;
                        arg = pos;
                    }
                }
            } else {
                let bl = node_bound(node.left as usize);
                let br = node_bound(node.right as usize);
                // push the more promising child last so it is explored first
                if bl > br {
                    stack.push((node.right, br));
                    stack.push((node.left, bl));
                } else {
                    stack.push((node.left, bl));
                    stack.push((node.right, br));
                }
            }
        }
        (best, arg)
    }

    /// `max_i ⟨u, X_i⟩` for any vector `u`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.query_from(u, &[]).0
    }

    /// The support value together with a maximising point.
    pub fn support_point(&self, u: &[f64]) -> (f64, &[f64]) {
        let (v, pos) = self.query_from(u, &[]);
        (v, self.point(pos))
    }

    /// `(h(u), position)` of a maximiser; `hints` are positions of candidate
    /// maximisers and change only the running time.
    pub(crate) fn support_position(&self, u: &[f64], hints: &[usize]) -> (f64, usize) {
        self.query_from(u, hints)
    }

    pub(crate) fn point(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.d..(pos + 1) * self.d]
    }
}

impl SupportFunction for HullSupport {
    fn dim(&self) -> usize {
        self.d
    }

    fn support_raw(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn lipschitz(&self) -> f64 {
        self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, uniform_direction};
    use crate::vector::dot;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tree_matches_linear_scan(seed in 0u64..10_000, n in 1usize..400, d in 1usize..5) {
            let mut rng = stream_rng(seed, 1);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| uniform_direction(&mut rng, d)
                .into_iter().map(|x| x * 0.7).collect()).collect();
            let hs = HullSupport::new(&pts).unwrap();
            for _ in 0..20 {
                let u = uniform_direction(&mut rng, d);
                let scan = pts.iter().map(|p| dot(p, &u)).fold(f64::NEG_INFINITY, f64::max);
                let (v, p) = hs.support_point(&u);
                prop_assert_eq!(v, scan);
                prop_assert_eq!(dot(p, &u), scan);
            }
        }

        #[test]
        fn tree_matches_scan_with_mixed_norms(seed in 0u64..10_000, n in 1usize..400, d in 1usize..5, scale in 0.1f64..3.0) {
            let mut rng = stream_rng(seed, 2);
            let mut pts: Vec<Vec<f64>> = (0..n).map(|k| {
                let r = if k % 3 == 0 { 1.0 } else { 0.2 + (k % 7) as f64 * 0.1 };
                uniform_direction(&mut rng, d).into_iter().map(|x| x * r + 0.3).collect()
            }).collect();
            pts.push(vec![0.0; d]);
            let hs = HullSupport::new(&pts).unwrap();
            for _ in 0..20 {
                let u: Vec<f64> = uniform_direction(&mut rng, d).into_iter().map(|x| x * scale).collect();
                let scan = pts.iter().map(|p| dot(p, &u)).fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(hs.eval(&u), scan);
            }
        }
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(matches!(HullSupport::new(&[]), Err(Error::EmptyCloud)));
    }
}
