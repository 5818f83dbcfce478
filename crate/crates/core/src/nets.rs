//! δ-packings of the unit sphere, the residual decomposition of a direction
//! over a net, and the chaining certificate for sup-norm deficits.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, uniform_direction};
use crate::vector::{dist, dot, norm};

/// Construction knobs for [`build_net_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetOptions {
    /// Consecutive rejections that end the greedy phase. `None` means
    /// `ceil(50 / δ^{d−1})`.
    pub rejection_streak: Option<usize>,
    /// Hard cap on the number of net points.
    pub max_points: usize,
    /// Random probes used for the covering-radius estimate.
    pub covering_probes: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self { rejection_streak: None, max_points: 1_000_000, covering_probes: 20_000 }
    }
}

/// Dense uniform grid over `[-1, 1]^d` with per-cell linked lists of ids.
#[derive(Debug, Clone)]
struct CellGrid {
    d: usize,
    side: f64,
    per_dim: usize,
    head: Vec<u32>,
    next: Vec<u32>,
}

const GRID_CELLS: usize = 1 << 22;
const NIL: u32 = u32::MAX;
const MAX_GRID_DIM: usize = 16;

impl CellGrid {
    fn new(d: usize, delta: f64) -> Self {
        let cap = if d > MAX_GRID_DIM {
            1.0
        } else {
            libm::floor(libm::pow(GRID_CELLS as f64, 1.0 / d.max(1) as f64)).max(1.0)
        };
        let per_dim = libm::ceil(2.0 / delta).min(cap).max(1.0) as usize;
        let side = 2.0 / per_dim as f64;
        Self { d, side, per_dim, head: vec![NIL; per_dim.pow(d as u32)], next: Vec::new() }
    }

    fn coord(&self, x: f64) -> i64 {
        (libm::floor((x + 1.0) / self.side) as i64).clamp(0, self.per_dim as i64 - 1)
    }

    /// Ids must be inserted as `0, 1, 2, …`.
    fn insert(&mut self, x: &[f64], id: u32) {
        debug_assert_eq!(id as usize, self.next.len());
        let mut c = 0usize;
        for &v in x {
            c = c * self.per_dim + self.coord(v) as usize;
        }
        self.next.push(self.head[c]);
        self.head[c] = id;
    }

    /// Calls `f` on every id in cells within `reach` cells of `x`'s cell
    /// until it returns `true`. Returns whether it did.
    fn any_near(&self, x: &[f64], reach: i64, mut f: impl FnMut(u32) -> bool) -> bool {
        if self.d > MAX_GRID_DIM {
            return (0..self.next.len() as u32).any(f);
        }
        let m = self.per_dim as i64;
        let mut lo = [0i64; MAX_GRID_DIM];
        let mut hi = [0i64; MAX_GRID_DIM];
        for (k, &v) in x.iter().enumerate() {
            let c = self.coord(v);
            lo[k] = (c - reach).max(0);
            hi[k] = (c + reach).min(m - 1);
        }
        let mut idx = lo;
        loop {
            let mut c = 0usize;
            for &i in &idx[..self.d] {
                c = c * self.per_dim + i as usize;
            }
            let mut id = self.head[c];
            while id != NIL {
                if f(id) {
                    return true;
                }
                id = self.next[id as usize];
            }
            let mut k = 0;
            loop {
                if k == self.d {
                    return false;
                }
                if idx[k] < hi[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo[k];
                k += 1;
            }
        }
    }

    fn for_each_near(&self, x: &[f64], reach: i64, mut f: impl FnMut(u32)) {
        self.any_near(x, reach, |i| {
            f(i);
            false
        });
    }

    fn reach_for(&self, radius: f64) -> i64 {
        libm::ceil(radius / self.side) as i64
    }
}

/// A δ-packing of `S^{d−1}` that is also (verified) a δ-covering.
#[derive(Debug, Clone)]
pub struct SphereNet {
    dim: usize,
    delta: f64,
    seed: u64,
    directions: Vec<Vec<f64>>,
    covering_radius_estimate: f64,
    grid: CellGrid,
}

impl PartialEq for SphereNet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.delta == other.delta
            && self.seed == other.seed
            && self.directions == other.directions
            && self.covering_radius_estimate == other.covering_radius_estimate
    }
}

impl SphereNet {
    /// Reassembles a net from stored parts, re-checking unit norms and the
    /// packing property.
    pub fn from_parts(
        dim: usize,
        delta: f64,
        seed: u64,
        directions: Vec<Vec<f64>>,
        covering_radius_estimate: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::OutOfRange { name: "delta", value: delta });
        }
        let mut net = Self::empty(dim, delta, seed);
        for u in directions {
            if u.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: u.len() });
            }
            let n = norm(&u);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::NonUnitDirection { norm: n });
            }
            if let Some((_, dd)) = net.nearest_within(&u, delta) {
                if dd < delta {
                    return Err(Error::InvalidArgument("net directions violate the packing distance".into()));
                }
            }
            net.push(u);
        }
        net.covering_radius_estimate = covering_radius_estimate;
        Ok(net)
    }

    fn empty(dim: usize, delta: f64, seed: u64) -> Self {
        Self {
            dim,
            delta,
            seed,
            directions: Vec::new(),
            covering_radius_estimate: f64::INFINITY,
            grid: CellGrid::new(dim, delta),
        }
    }

    fn push(&mut self, u: Vec<f64>) {
        self.grid.insert(&u, self.directions.len() as u32);
        self.directions.push(u);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn covering_radius_estimate(&self) -> f64 {
        self.covering_radius_estimate
    }

    /// Nearest net point among those within `radius` of `x`.
    fn nearest_within(&self, x: &[f64], radius: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.grid.for_each_near(x, self.grid.reach_for(radius), |i| {
            let dd = dist(x, &self.directions[i as usize]);
            if best.is_none_or(|(_, b)| dd < b) {
                best = Some((i as usize, dd));
            }
        });
        best.filter(|(_, dd)| *dd <= radius)
    }

    /// Index of and distance to the nearest net point.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut radius = self.delta;
        while radius < 1.0 {
            if let Some(hit) = self.nearest_within(x, radius) {
                return hit;
            }
            radius *= 2.0;
        }
        self.directions
            .iter()
            .enumerate()
            .map(|(i, v)| (i, dist(x, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY))
    }

    fn clear_of(&self, x: &[f64]) -> bool {
        let reach = self.grid.reach_for(self.delta);
        !self.grid.any_near(x, reach, |i| dist(x, &self.directions[i as usize]) < self.delta)
    }

    /// Largest nearest-point distance over `probes` seeded random directions.
    pub fn probe_covering_radius(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = stream_rng(seed, 0xC0FE);
        (0..probes)
            .map(|_| self.nearest(&uniform_direction(&mut rng, self.dim)).1)
            .fold(0.0, f64::max)
    }
}

/// Greedy maximal δ-packing of `S^{d−1}` with default options.
pub fn build_net(d: usize, delta: f64, seed: u64) -> Result<SphereNet> {
    build_net_with(d, delta, seed, &NetOptions::default())
}

/// Greedy maximal δ-packing of `S^{d−1}`.
///
/// Uniform candidates are accepted when at distance `≥ δ` from every accepted
/// point, until a streak of rejections. For `d ≤ 3` a completion pass then
/// inserts every spherical Voronoi vertex still farther than `δ` from the net,
/// which makes the packing maximal, hence a δ-covering.
pub fn build_net_with(d: usize, delta: f64, seed: u64, opts: &NetOptions) -> Result<SphereNet> {
    if d == 0 {
        return Err(Error::OutOfRange { name: "d", value: 0.0 });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::OutOfRange { name: "delta", value: delta });
    }
    let mut net = SphereNet::empty(d, delta, seed);
    if d == 1 {
        net.push(vec![1.0]);
        net.push(vec![-1.0]);
        net.covering_radius_estimate = 0.0;
        return Ok(net);
    }
    let mut rng: ChaCha8Rng = stream_rng(seed, 0);
    let streak = opts
        .rejection_streak
        .unwrap_or_else(|| libm::ceil(50.0 / libm::pow(delta, d as f64 - 1.0)) as usize)
        .max(1);
    let mut misses = 0usize;
    while misses < streak {
        let u = uniform_direction(&mut rng, d);
        if net.clear_of(&u) {
            if net.len() >= opts.max_points {
                return Err(Error::NetBudgetExceeded { budget: opts.max_points });
            }
            net.push(u);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    let mut vertex_radius: f64 = 0.0;
    for round in 0u64.. {
        if d <= 3 {
            vertex_radius = complete_packing(&mut net, opts.max_points)?;
        }
        // a posteriori probe; any uncovered direction found joins the net
        let mut rng = stream_rng(seed, 1 + round);
        let mut grew = false;
        for _ in 0..opts.covering_probes {
            let u = uniform_direction(&mut rng, d);
            if net.nearest(&u).1 > delta {
                if net.len() >= opts.max_points {
                    return Err(Error::NetBudgetExceeded { budget: opts.max_points });
                }
                net.push(u);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let probed = net.probe_covering_radius(opts.covering_probes, seed);
    net.covering_radius_estimate = probed.max(vertex_radius);
    Ok(net)
}

/// Repeatedly inserts uncovered Voronoi vertices. Returns the covering radius
/// over all examined vertices once no insertion happens.
fn complete_packing(net: &mut SphereNet, max_points: usize) -> Result<f64> {
    let d = net.dim;
    let delta = net.delta;
    let reach = 3.0 * delta;
    loop {
        let mut added = false;
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < net.len() {
            let a = net.directions[i].clone();
            let mut neigh: Vec<usize> = Vec::new();
            net.grid.for_each_near(&a, net.grid.reach_for(reach), |j| {
                let j = j as usize;
                if j > i && dist(&a, &net.directions[j]) <= reach {
                    neigh.push(j);
                }
            });
            let mut candidates: Vec<Vec<f64>> = Vec::new();
            if d == 2 {
                for &j in &neigh {
                    let m: Vec<f64> = a.iter().zip(&net.directions[j]).map(|(x, y)| x + y).collect();
                    let n = norm(&m);
                    if n > 1e-12 {
                        candidates.push(m.iter().map(|c| c / n).collect());
                    }
                }
            } else {
                for (p, &j) in neigh.iter().enumerate() {
                    for &k in &neigh[p + 1..] {
                        if let Some(v) = circumcenter3(&a, &net.directions[j], &net.directions[k]) {
                            candidates.push(v);
                        }
                    }
                }
            }
            for v in candidates {
                // v is equidistant from a and its partners; only a vertex
                // farther than δ from all three can be uncovered
                let r = dist(&v, &a);
                if r <= delta {
                    continue;
                }
                let (_, dd) = net.nearest(&v);
                if dd > delta {
                    if net.len() >= max_points {
                        return Err(Error::NetBudgetExceeded { budget: max_points });
                    }
                    net.push(v);
                    added = true;
                } else {
                    worst = worst.max(dd);
                }
            }
            i += 1;
        }
        if !added {
            return Ok(worst);
        }
    }
}

/// Point of `S²` equidistant from `a, b, c` on the same side as `a`.
fn circumcenter3(a: &[f64], b: &[f64], c: &[f64]) -> Option<Vec<f64>> {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
    let len = norm(&n);
    if len < 1e-14 {
        return None;
    }
    let s = if dot(&n, a) >= 0.0 { 1.0 / len } else { -1.0 / len };
    Some(n.iter().map(|x| x * s).collect())
}

/// `u = u0 − Σ δ_j u_j − residual`, with `δ_j = |r_j| ≤ δ^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub u0: Vec<f64>,
    pub terms: Vec<(f64, Vec<f64>)>,
    /// `|u − (u0 − Σ δ_j u_j)|`.
    pub residual_norm: f64,
}

impl Decomposition {
    /// `u0 − Σ δ_j u_j`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut v = self.u0.clone();
        for (c, uj) in &self.terms {
            for (vi, ui) in v.iter_mut().zip(uj) {
                *vi -= c * ui;
            }
        }
        v
    }
}

/// Residual decomposition of `u` over the net to `depth` terms.
///
/// `r_1 = u0 − u`, then `u_j = nearest(r_j/|r_j|)`, `δ_j = |r_j|`,
/// `r_{j+1} = r_j − δ_j u_j`. Each step shrinks the residual by at least the
/// covering radius, so `|r_{k+1}| ≤ δ^{k+1}`.
pub fn decompose(net: &SphereNet, u: &[f64], depth: usize) -> Result<Decomposition> {
    if u.len() != net.dim {
        return Err(Error::DimensionMismatch { expected: net.dim, got: u.len() });
    }
    let n = norm(u);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm: n });
    }
    let tol = net.delta * (1.0 + 1e-9);
    let (i0, d0) = net.nearest(u);
    if d0 > tol {
        return Err(Error::CoveringViolation { distance: d0, delta: net.delta });
    }
    let u0 = net.directions[i0].clone();
    let mut r: Vec<f64> = u0.iter().zip(u).map(|(a, b)| a - b).collect();
    let mut terms = Vec::with_capacity(depth);
    for _ in 0..depth {
        let rn = norm(&r);
        if rn == 0.0 {
            terms.push((0.0, u0.clone()));
            continue;
        }
        let dir: Vec<f64> = r.iter().map(|x| x / rn).collect();
        let (j, dj) = net.nearest(&dir);
        if dj > tol {
            return Err(Error::CoveringViolation { distance: dj, delta: net.delta });
        }
        let uj = net.directions[j].clone();
        for (ri, ui) in r.iter_mut().zip(&uj) {
            *ri -= rn * ui;
        }
        terms.push((rn, uj));
    }
    Ok(Decomposition { u0, terms, residual_norm: norm(&r) })
}

/// Net maximum of `h_big − h_small` and its chaining certificate
/// `2·max(net_sup, 4δ)`.
///
/// With both bodies in the unit ball the deficit is 2-Lipschitz, so the true
/// supremum lies in `[net_sup, net_sup + 2δ] ⊆ [net_sup, certified]`.
/// Deficits down to `-1e-9` are clamped to zero; anything lower is reported
/// as a nesting violation.
pub fn certified_sup_deficit<F, G>(net: &SphereNet, h_big: F, h_small: G) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let mut sup: f64 = 0.0;
    for u in &net.directions {
        let gap = h_big(u) - h_small(u);
        if gap < -1e-9 {
            return Err(Error::NotNested { deficit: gap });
        }
        sup = sup.max(gap);
    }
    Ok((sup, 2.0 * sup.max(4.0 * net.delta)))
}
