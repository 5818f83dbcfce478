//! Distances and functionals between a body and the hull of a sample, all
//! evaluated through support functions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{BodySpec, SupportFunction};
use crate::hull::HullSupport;
use crate::nets::{certified_sup_deficit, SphereNet};
use crate::rng::{stream_rng, uniform_direction};
use crate::samplers::SampleCloud;
use crate::vector::{dot, norm};

/// A net maximum and a certified upper bound for a supremum over the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceResult {
    pub net_value: f64,
    pub certified_upper: f64,
    pub net_delta: f64,
}

/// `L^p` exponent, `p ≥ 1`, or the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Norm {
    P(f64),
    Inf,
}

/// `max_i ⟨u, X_i⟩` by linear scan.
pub fn hull_support(cloud: &SampleCloud, u: &[f64]) -> Result<f64> {
    if cloud.points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let n = norm(u);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection { norm: n });
    }
    Ok(cloud.points.iter().map(|x| dot(u, x)).fold(f64::NEG_INFINITY, f64::max))
}

/// Hausdorff distance from the hull of `cloud` to `body` on `net`, with the
/// chaining certificate.
pub fn hausdorff_to_body(body: &BodySpec, cloud: &SampleCloud, net: &SphereNet) -> Result<DistanceResult> {
    check_dims(body, net)?;
    let hull = HullSupport::new(&cloud.points)?;
    let (net_value, certified_upper) =
        certified_sup_deficit(net, |u| body.support_raw(u), |u| hull.eval(u))?;
    Ok(DistanceResult { net_value, certified_upper, net_delta: net.delta() })
}

fn check_dims(body: &BodySpec, net: &SphereNet) -> Result<()> {
    if body.dim() != net.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: net.dim() });
    }
    Ok(())
}

/// `sup |h_a − h_b|` on the net, certified by `net + δ(L_a + L_b)`.
pub fn sup_norm_bracket<A, B>(a: &A, b: &B, net: &SphereNet) -> Result<DistanceResult>
where
    A: SupportFunction + ?Sized,
    B: SupportFunction + ?Sized,
{
    if a.dim() != net.dim() || b.dim() != net.dim() {
        return Err(Error::DimensionMismatch { expected: net.dim(), got: a.dim().max(b.dim()) });
    }
    let net_value = net
        .directions()
        .iter()
        .map(|u| (a.support_raw(u) - b.support_raw(u)).abs())
        .fold(0.0, f64::max);
    let reach = net.delta().max(net.covering_radius_estimate().min(2.0));
    Ok(DistanceResult {
        net_value,
        certified_upper: net_value + reach * (a.lipschitz() + b.lipschitz()),
        net_delta: net.delta(),
    })
}

/// Upper certificate for `d_L` at a fixed center: the largest relative
/// support deficit `1 − (h_hull − ⟨u,c⟩)/(h_body − ⟨u,c⟩)` over the net.
pub fn d_l_estimate(body: &BodySpec, center: &[f64], cloud: &SampleCloud, net: &SphereNet) -> Result<f64> {
    check_dims(body, net)?;
    d_l_estimate_on_directions(body, center, &cloud.points, net.directions())
}

/// [`d_l_estimate`] over arbitrary nonzero directions. The ratio is
/// homogeneous of degree zero, so directions need not be normalised; pushing
/// directions through `A^{−T}` makes the value invariant under `x ↦ Ax + b`.
pub fn d_l_estimate_on_directions(
    body: &BodySpec,
    center: &[f64],
    points: &[Vec<f64>],
    directions: &[Vec<f64>],
) -> Result<f64> {
    if center.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: center.len() });
    }
    let hull = HullSupport::new(points)?;
    let mut worst: f64 = 0.0;
    for u in directions {
        let shift = dot(u, center);
        let hb = body.support_raw(u) - shift;
        if !(hb > 0.0) {
            return Err(Error::NonPositiveSupport { value: hb });
        }
        let hh = hull.eval(u) - shift;
        worst = worst.max(1.0 - hh / hb);
    }
    Ok(worst)
}

/// Seeded Monte Carlo nodes on `S^{d−1}`, closed under `u ↦ −u`.
///
/// Reusing one instance across bodies gives common random numbers, and the
/// antipodal symmetry makes width-function norms consistent with support
/// norms on the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes: Vec<Vec<f64>>,
}

impl SphereQuadrature {
    /// `quad_n` nodes (rounded up to even) from stream 0 of `seed`.
    pub fn new(dim: usize, quad_n: usize, seed: u64) -> Result<Self> {
        if dim == 0 || quad_n == 0 {
            return Err(Error::InvalidArgument("quadrature needs d ≥ 1 and quad_n ≥ 1".into()));
        }
        let mut rng = stream_rng(seed, 0);
        let pairs = quad_n.div_ceil(2);
        let mut nodes = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let u = uniform_direction(&mut rng, dim);
            nodes.push(u.iter().map(|x| -x).collect());
            nodes.push(u);
        }
        Ok(Self { dim, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// `(mean |f|^p)^{1/p}` over the nodes.
    pub fn norm_p(&self, p: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
        let s: f64 = self.nodes.iter().map(|u| libm::pow(f(u).abs(), p)).sum();
        libm::pow(s / self.nodes.len() as f64, 1.0 / p)
    }

    /// Mean of `f` over the nodes.
    pub fn mean(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().map(|u| f(u)).sum::<f64>() / self.nodes.len() as f64
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::OutOfRange { name: "p", value: p });
    }
    Ok(())
}

/// `‖h_body − h_hull‖_{L^p(σ)}` by Monte Carlo quadrature.
pub fn lp_error(body: &BodySpec, cloud: &SampleCloud, p: f64, quad_n: usize, quad_seed: u64) -> Result<f64> {
    let quad = SphereQuadrature::new(body.dim(), quad_n, quad_seed)?;
    let hull = HullSupport::new(&cloud.points)?;
    lp_error_with(body, &hull, p, &quad)
}

/// [`lp_error`] on a prepared hull and quadrature.
pub fn lp_error_with<A, B>(a: &A, b: &B, p: f64, quad: &SphereQuadrature) -> Result<f64>
where
    A: SupportFunction + ?Sized,
    B: SupportFunction + ?Sized,
{
    check_p(p)?;
    if a.dim() != quad.dim() || b.dim() != quad.dim() {
        return Err(Error::DimensionMismatch { expected: quad.dim(), got: a.dim().max(b.dim()) });
    }
    Ok(quad.norm_p(p, |u| a.support_raw(u) - b.support_raw(u)))
}

/// A functional value; `upper` differs from `value` only for the sup norm,
/// where it carries the net certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FunctionalValue {
    pub value: f64,
    pub upper: f64,
}

/// `T_p = ‖h‖_p`. Finite `p` uses `quad`; `p = ∞` uses `net`.
pub fn functional_t<S: SupportFunction + ?Sized>(
    s: &S,
    norm: Norm,
    quad: &SphereQuadrature,
    net: &SphereNet,
) -> Result<FunctionalValue> {
    functional(s, norm, quad, net, false)
}

/// `S_p = ‖φ‖_p` with `φ(u) = h(u) + h(−u)`. Finite `p` uses `quad`;
/// `p = ∞` uses `net`.
pub fn functional_s<S: SupportFunction + ?Sized>(
    s: &S,
    norm: Norm,
    quad: &SphereQuadrature,
    net: &SphereNet,
) -> Result<FunctionalValue> {
    functional(s, norm, quad, net, true)
}

fn functional<S: SupportFunction + ?Sized>(
    s: &S,
    norm: Norm,
    quad: &SphereQuadrature,
    net: &SphereNet,
    width: bool,
) -> Result<FunctionalValue> {
    let eval = |u: &[f64]| -> f64 {
        if width {
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            s.support_raw(u) + s.support_raw(&neg)
        } else {
            s.support_raw(u)
        }
    };
    match norm {
        Norm::P(p) => {
            check_p(p)?;
            if s.dim() != quad.dim() {
                return Err(Error::DimensionMismatch { expected: quad.dim(), got: s.dim() });
            }
            let value = quad.norm_p(p, eval);
            Ok(FunctionalValue { value, upper: value })
        }
        Norm::Inf => {
            if s.dim() != net.dim() {
                return Err(Error::DimensionMismatch { expected: net.dim(), got: s.dim() });
            }
            let value = net.directions().iter().map(|u| eval(u).abs()).fold(0.0, f64::max);
            let lip = if width { 2.0 * s.lipschitz() } else { s.lipschitz() };
            Ok(FunctionalValue { value, upper: value + net.delta() * lip })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::build_net;
    use crate::samplers::{sample, Mode};
    use alloc::vec;
    use core::f64::consts::PI;

    fn polygon_cloud(m: usize) -> SampleCloud {
        let body = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let points = (0..m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                vec![libm::cos(t), libm::sin(t)]
            })
            .collect();
        SampleCloud { points, body, mode: Mode::Boundary, seed: 0 }
    }

    #[test]
    fn hull_support_examples() {
        let mut c = polygon_cloud(3);
        c.points = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(hull_support(&c, &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(hull_support(&c, &[-1.0, 0.0]).unwrap(), 0.0);
        c.points.clear();
        assert!(matches!(hull_support(&c, &[1.0, 0.0]), Err(Error::EmptyCloud)));
    }

    #[test]
    fn regular_polygon_hausdorff_and_dl() {
        let net = build_net(2, 0.01, 4).unwrap();
        let body = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        for m in [4usize, 16] {
            let c = polygon_cloud(m);
            let exact = 1.0 - libm::cos(PI / m as f64);
            let r = hausdorff_to_body(&body, &c, &net).unwrap();
            assert!(r.net_value <= exact + 1e-12 && r.net_value >= exact - 8.0 * 0.01);
            assert!(r.certified_upper >= exact);
            let dl = d_l_estimate(&body, &[0.0, 0.0], &c, &net).unwrap();
            assert!((dl - r.net_value).abs() < 1e-12);
        }
    }

    #[test]
    fn inscribed_square_l1_error() {
        // (4/π)∫₀^{π/4}(1 − cos t)dt = 1 − 2√2/π
        let c = polygon_cloud(4);
        let oracle = 1.0 - 2.0 * core::f64::consts::SQRT_2 / PI;
        let v = lp_error(&c.body, &c, 1.0, 1 << 16, 3).unwrap();
        assert!((v - oracle).abs() < 3e-3, "{v} vs {oracle}");
        assert!((oracle - 0.0997).abs() < 1e-4);
    }

    #[test]
    fn mean_width_of_square_by_cauchy() {
        let sq = BodySpec::cube(2, 1.0).unwrap();
        let quad = SphereQuadrature::new(2, 1 << 16, 8).unwrap();
        let net = build_net(2, 0.05, 0).unwrap();
        let s1 = functional_s(&sq, Norm::P(1.0), &quad, &net).unwrap().value;
        assert!((s1 - 8.0 / PI).abs() < 5e-3, "{s1}");
        let ball = BodySpec::ball(vec![0.3, -0.1], 0.4).unwrap();
        let s1 = functional_s(&ball, Norm::P(1.0), &quad, &net).unwrap().value;
        assert!((s1 - 0.8).abs() < 1e-12);
        let ball0 = BodySpec::ball(vec![0.0, 0.0], 0.4).unwrap();
        let t = functional_t(&ball0, Norm::Inf, &quad, &net).unwrap();
        assert!((t.value - 0.4).abs() < 1e-12 && t.upper >= 0.4);
    }

    #[test]
    fn p_monotone_and_nested() {
        let body = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cloud = sample(&body, Mode::Interior, 300, 1).unwrap();
        let quad = SphereQuadrature::new(2, 4096, 2).unwrap();
        let hull = HullSupport::new(&cloud.points).unwrap();
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 4.0, 8.0] {
            let v = lp_error_with(&body, &hull, p, &quad).unwrap();
            assert!(v >= last - 1e-15);
            last = v;
        }
    }
}
