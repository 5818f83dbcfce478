//! Seeded uniform samplers on and in the supported bodies.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{polytope_facets, BodySpec};
use crate::rng::{stream_rng, uniform_direction, uniform_in_ball};
use crate::vector::{dot, mat_vec, norm};

/// Sampling law: uniform on the body (volume) or on its boundary (area).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Mode {
    Interior,
    Boundary,
}

/// `n` i.i.d. points with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    pub points: Vec<Vec<f64>>,
    pub body: BodySpec,
    pub mode: Mode,
    pub seed: u64,
}

impl SampleCloud {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }
}

const MIN_EFFICIENCY: f64 = 1e-6;
const EFFICIENCY_WINDOW: u64 = 10_000_000;

/// Draws `n` points from stream 0 of `seed`.
pub fn sample(body: &BodySpec, mode: Mode, n: usize, seed: u64) -> Result<SampleCloud> {
    sample_with_rng(body, mode, n, seed, &mut stream_rng(seed, 0))
}

/// Draws `n` points from `rng`; `seed` is recorded as provenance only.
pub fn sample_with_rng<R: Rng + ?Sized>(
    body: &BodySpec,
    mode: Mode,
    n: usize,
    seed: u64,
    rng: &mut R,
) -> Result<SampleCloud> {
    body.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let d = body.dim();
    let mut points = Vec::with_capacity(n);
    match (body, mode) {
        (BodySpec::Ball { center, radius }, Mode::Interior) => {
            for _ in 0..n {
                let y = uniform_in_ball(rng, d);
                points.push(center.iter().zip(&y).map(|(c, v)| c + radius * v).collect());
            }
        }
        (BodySpec::Ball { center, radius }, Mode::Boundary) => {
            for _ in 0..n {
                let y = uniform_direction(rng, d);
                points.push(center.iter().zip(&y).map(|(c, v)| c + radius * v).collect());
            }
        }
        (BodySpec::Ellipsoid { center, semi_axes, rotation }, Mode::Interior) => {
            for _ in 0..n {
                let y = uniform_in_ball(rng, d);
                points.push(ellipsoid_map(center, semi_axes, rotation, &y));
            }
        }
        (BodySpec::Ellipsoid { center, semi_axes, rotation }, Mode::Boundary) => {
            // The area element of θ ↦ QSθ is det(S)·|S⁻¹θ|; accept in
            // proportion to it, normalised by its maximum 1/a_min.
            let a_min = semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
            let mut attempts = 0u64;
            while points.len() < n {
                let theta = uniform_direction(rng, d);
                let w: f64 = theta.iter().zip(semi_axes).map(|(t, a)| (t / a) * (t / a)).sum();
                let accept = a_min * libm::sqrt(w);
                attempts += 1;
                if rng.random::<f64>() < accept {
                    points.push(ellipsoid_map(center, semi_axes, rotation, &theta));
                }
                check_efficiency(points.len(), attempts)?;
            }
        }
        (BodySpec::PolytopeV { vertices }, Mode::Interior) => {
            let facets = polytope_facets(vertices);
            let scale = vertices.iter().map(|v| norm(v)).fold(1.0, f64::max);
            let (lo, hi) = body.bounding_box();
            let mut attempts = 0u64;
            while points.len() < n {
                let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
                attempts += 1;
                if facets.iter().all(|f| dot(&f.normal, &x) <= f.offset + 1e-12 * scale) {
                    points.push(x);
                }
                check_efficiency(points.len(), attempts)?;
            }
        }
        (BodySpec::BumpBall { radius, .. }, Mode::Interior) => {
            let mut attempts = 0u64;
            while points.len() < n {
                let x: Vec<f64> = uniform_in_ball(rng, d).into_iter().map(|v| v * radius).collect();
                attempts += 1;
                if body.contains(&x) {
                    points.push(x);
                }
                check_efficiency(points.len(), attempts)?;
            }
        }
        (_, Mode::Boundary) => return Err(Error::Unsupported("boundary sampling for this body")),
    }
    Ok(SampleCloud { points, body: body.clone(), mode, seed })
}

fn ellipsoid_map(center: &[f64], semi_axes: &[f64], rotation: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let scaled: Vec<f64> = y.iter().zip(semi_axes).map(|(v, a)| v * a).collect();
    mat_vec(rotation, &scaled).iter().zip(center).map(|(r, c)| c + r).collect()
}

fn check_efficiency(accepted: usize, attempts: u64) -> Result<()> {
    if attempts >= EFFICIENCY_WINDOW {
        let efficiency = accepted as f64 / attempts as f64;
        if efficiency < MIN_EFFICIENCY {
            return Err(Error::LowEfficiency { efficiency });
        }
    }
    Ok(())
}

/// Fraction of cloud points in the cap `{x : ⟨u,x⟩ ≥ h_body(u) − eps}`.
pub fn empirical_cap_probability(cloud: &SampleCloud, u: &[f64], eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::OutOfRange { name: "eps", value: eps });
    }
    let h = cloud.body.support_checked(u)?;
    Ok(cap_fraction(&cloud.points, u, h - eps))
}

pub(crate) fn cap_fraction(points: &[Vec<f64>], u: &[f64], level: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let hits = points.iter().filter(|x| dot(u, x) >= level).count();
    hits as f64 / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cap_volume_ball;
    use alloc::vec;

    #[test]
    fn deterministic_and_contained() {
        let bodies = [
            BodySpec::ball(vec![0.1, -0.2], 0.6).unwrap(),
            BodySpec::ellipsoid_axis_aligned(vec![0.0, 0.0, 0.0], vec![0.5, 0.3, 0.2]).unwrap(),
            BodySpec::cube(3, 0.5).unwrap(),
            BodySpec::bump_ball(1.0, 0.4, 0.03, vec![0.0, 1.0]).unwrap(),
        ];
        for body in &bodies {
            let a = sample(body, Mode::Interior, 2000, 42).unwrap();
            let b = sample(body, Mode::Interior, 2000, 42).unwrap();
            assert_eq!(a, b);
            assert!(a.points.iter().all(|x| body.contains(x)));
        }
    }

    #[test]
    fn boundary_points_on_boundary() {
        let e = BodySpec::ellipsoid_axis_aligned(vec![0.2, 0.0], vec![0.9, 0.3]).unwrap();
        let cloud = sample(&e, Mode::Boundary, 5000, 1).unwrap();
        for x in &cloud.points {
            let (a, b) = ((x[0] - 0.2) / 0.9, x[1] / 0.3);
            let q = a * a + b * b;
            assert!((q - 1.0).abs() < 1e-9);
        }
        let cube = BodySpec::cube(2, 1.0).unwrap();
        assert!(matches!(sample(&cube, Mode::Boundary, 3, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ellipsoid_is_pushforward_of_ball() {
        let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let rot = vec![vec![s, -s], vec![s, s]];
        let e = BodySpec::ellipsoid(vec![0.1, 0.2], vec![0.5, 0.2], rot.clone()).unwrap();
        let a = sample(&ball, Mode::Interior, 500, 9).unwrap();
        let b = sample(&e, Mode::Interior, 500, 9).unwrap();
        for (y, x) in a.points.iter().zip(&b.points) {
            assert_eq!(&ellipsoid_map(&[0.1, 0.2], &[0.5, 0.2], &rot, y), x);
        }
    }

    #[test]
    fn cap_probability_matches_cap_volume() {
        let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let n = 200_000;
        let cloud = sample(&ball, Mode::Interior, n, 5).unwrap();
        let p = cap_volume_ball(2, 1.0, 0.5).unwrap() / core::f64::consts::PI;
        let hat = empirical_cap_probability(&cloud, &[0.0, 1.0], 0.5).unwrap();
        let sd = libm::sqrt(p * (1.0 - p) / n as f64);
        assert!((hat - p).abs() < 4.0 * sd, "{hat} vs {p}");
        assert_eq!(empirical_cap_probability(&cloud, &[1.0, 0.0], 2.0).unwrap(), 1.0);
    }
}
