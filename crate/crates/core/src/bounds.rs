//! Class parameters `(α, L, ε₀)`, the uniform deviation bound for the hull
//! estimator, membership checks for `M(α, L, ε₀)` and the rate exponents.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, c_alpha, cap_area_sphere, cap_volume_ball, BodySpec, SupportFunction};
use crate::rng::{stream_rng, uniform_direction};
use crate::samplers::{cap_fraction, sample_with_rng, Mode};

/// Membership parameters: every width-`ε` cap has mass `≥ L·ε^α` for
/// `ε ≤ ε₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassParams {
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(rename = "L", alias = "big_l"))]
    pub big_l: f64,
    pub eps0: f64,
}

impl ClassParams {
    pub fn new(alpha: f64, big_l: f64, eps0: f64) -> Result<Self> {
        let p = Self { alpha, big_l, eps0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::OutOfRange { name: "alpha", value: self.alpha });
        }
        if !(self.big_l > 0.0 && self.big_l.is_finite()) {
            return Err(Error::OutOfRange { name: "L", value: self.big_l });
        }
        if !(self.eps0 > 0.0 && self.eps0 <= 1.0) {
            return Err(Error::OutOfRange { name: "eps0", value: self.eps0 });
        }
        Ok(())
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::OutOfRange { name: "r", value: r });
    }
    Ok(())
}

/// Uniform law on a body with rolling radius `r`:
/// `((d+1)/2, 2β_{d−1} r^{(d−1)/2} / (β_d (d+1)), r)`.
pub fn class_params_smooth(d: u32, r: f64) -> Result<ClassParams> {
    if d == 0 {
        return Err(Error::OutOfRange { name: "d", value: 0.0 });
    }
    check_r(r)?;
    let df = d as f64;
    let l = 2.0 * ball_volume(d - 1) * libm::pow(r, (df - 1.0) / 2.0) / (ball_volume(d) * (df + 1.0));
    ClassParams::new((df + 1.0) / 2.0, l, r)
}

/// Uniform law on the boundary of a body with rolling radius `r`:
/// `((d−1)/2, r^{(d−1)/2}, r)`.
pub fn class_params_boundary(d: u32, r: f64) -> Result<ClassParams> {
    if d < 2 {
        return Err(Error::OutOfRange { name: "d", value: d as f64 });
    }
    check_r(r)?;
    let half = (d as f64 - 1.0) / 2.0;
    ClassParams::new(half, libm::pow(r, half), r)
}

/// Sampling scenario whose hull converges at a known power of `ln n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RateFamily {
    SmoothInterior,
    PolytopeInterior,
    SmoothBoundary,
}

/// The `q = 1` exponent: `2/(d+1)`, `1/d` or `2/(d−1)`.
pub fn rate_exponent(family: RateFamily, d: u32) -> Result<f64> {
    let df = d as f64;
    match family {
        _ if d == 0 => Err(Error::OutOfRange { name: "d", value: 0.0 }),
        RateFamily::SmoothInterior => Ok(2.0 / (df + 1.0)),
        RateFamily::PolytopeInterior => Ok(1.0 / df),
        RateFamily::SmoothBoundary if d < 2 => Err(Error::OutOfRange { name: "d", value: df }),
        RateFamily::SmoothBoundary => Ok(2.0 / (df - 1.0)),
    }
}

/// Deviation bound for a fixed `(params, d, n)`:
/// `P[d_H ≥ threshold(x)] ≤ tail(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeviationBound {
    pub params: ClassParams,
    pub d: u32,
    pub n: u64,
    pub c_alpha: f64,
    pub tau1: f64,
    pub a_n: f64,
    pub b_n: f64,
}

impl DeviationBound {
    /// `2a_n + 2b_n·x`.
    pub fn threshold(&self, x: f64) -> f64 {
        2.0 * self.a_n + 2.0 * self.b_n * x
    }

    /// `min(1, 12^d exp(−C_α L x^α))`, evaluated at `(ε₀ − a_n)/b_n` once
    /// `a_n + b_n x` passes `ε₀`, and zero once it passes 1.
    pub fn tail(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        let reach = self.a_n + self.b_n * x;
        if reach > 1.0 {
            return 0.0;
        }
        let x_eff = if reach > self.params.eps0 {
            ((self.params.eps0 - self.a_n) / self.b_n).max(0.0)
        } else {
            x
        };
        let p = &self.params;
        let log_tail = self.d as f64 * libm::log(12.0) - self.c_alpha * p.big_l * libm::pow(x_eff, p.alpha);
        libm::exp(log_tail.min(0.0))
    }
}

/// `τ₁ = max(1, d/(C_α α L))`, `a_n = (τ₁ ln n / n)^{1/α}`, `b_n = n^{−1/α}`.
pub fn deviation_bound(params: &ClassParams, d: u32, n: u64) -> Result<DeviationBound> {
    params.validate()?;
    if n < 2 {
        return Err(Error::OutOfRange { name: "n", value: n as f64 });
    }
    if d == 0 {
        return Err(Error::OutOfRange { name: "d", value: 0.0 });
    }
    let ca = c_alpha(params.alpha);
    let tau1 = (d as f64 / (ca * params.alpha * params.big_l)).max(1.0);
    let nf = n as f64;
    let a_n = libm::pow(tau1 * libm::log(nf) / nf, 1.0 / params.alpha);
    let b_n = libm::pow(nf, -1.0 / params.alpha);
    Ok(DeviationBound { params: *params, d, n, c_alpha: ca, tau1, a_n, b_n })
}

/// Probe grid for [`check_class_membership`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipOptions {
    pub u_probes: usize,
    pub eps_grid: usize,
    pub n_mc: usize,
    pub seed: u64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self { u_probes: 64, eps_grid: 64, n_mc: 200_000, seed: 0 }
    }
}

/// Outcome of a membership check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipReport {
    /// `min μ(C)/(L ε^α)` over the probe grid.
    pub worst_ratio: f64,
    pub worst_eps: f64,
    pub worst_direction: Vec<f64>,
    /// Three binomial standard deviations relative to `L ε^α` at the worst
    /// probe; zero on the analytic path.
    pub slack: f64,
    pub analytic: bool,
    pub u_probes: usize,
    pub eps_grid: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub n_mc: usize,
    pub verdict: bool,
}

/// Log-spaced `ε` grid in `[1e−3·ε₀, ε₀]`.
fn eps_values(eps0: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    if count == 1 {
        return alloc::vec![eps0];
    }
    (0..count)
        .map(|i| eps0 * libm::pow(10.0, -3.0 + 3.0 * i as f64 / (count - 1) as f64))
        .collect()
}

/// Exact cap mass for the uniform law on a ball or its sphere.
fn ball_cap_mass(d: u32, radius: f64, mode: Mode, eps: f64) -> Result<f64> {
    let eps = eps.min(2.0 * radius);
    match mode {
        Mode::Interior => {
            Ok(cap_volume_ball(d, radius, eps)? / (ball_volume(d) * libm::pow(radius, d as f64)))
        }
        Mode::Boundary => {
            let total = crate::geometry::sphere_area(d) * libm::pow(radius, d as f64 - 1.0);
            if eps <= radius {
                Ok(cap_area_sphere(d, radius, eps)? / total)
            } else {
                Ok(1.0 - cap_area_sphere(d, radius, 2.0 * radius - eps)? / total)
            }
        }
    }
}

/// Checks `μ(C_K(u, ε)) ≥ L ε^α` on probe directions × a log-spaced `ε` grid.
///
/// Balls use exact cap masses; other bodies use the empirical cap frequency of
/// `n_mc` samples, allowing three binomial standard deviations.
pub fn check_class_membership(
    body: &BodySpec,
    mode: Mode,
    params: &ClassParams,
    opts: &MembershipOptions,
) -> Result<MembershipReport> {
    params.validate()?;
    body.validate()?;
    if opts.u_probes == 0 || opts.eps_grid == 0 {
        return Err(Error::InvalidArgument("probe grid must be nonempty".into()));
    }
    let d = body.dim();
    let eps = eps_values(params.eps0, opts.eps_grid);
    let mut dir_rng = stream_rng(opts.seed, 1);
    let directions: Vec<Vec<f64>> = (0..opts.u_probes).map(|_| uniform_direction(&mut dir_rng, d)).collect();
    let target = |e: f64| params.big_l * libm::pow(e, params.alpha);

    let mut report = MembershipReport {
        worst_ratio: f64::INFINITY,
        worst_eps: eps[0],
        worst_direction: directions[0].clone(),
        slack: 0.0,
        analytic: false,
        u_probes: opts.u_probes,
        eps_grid: opts.eps_grid,
        eps_min: eps[0],
        eps_max: *eps.last().unwrap_or(&params.eps0),
        n_mc: 0,
        verdict: true,
    };

    if let BodySpec::Ball { radius, .. } = body {
        // cap mass does not depend on the direction
        report.analytic = true;
        for &e in &eps {
            let ratio = ball_cap_mass(d as u32, *radius, mode, e)? / target(e);
            if ratio < report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_eps = e;
            }
        }
        report.verdict = report.worst_ratio >= 1.0;
        return Ok(report);
    }

    let cloud = sample_with_rng(body, mode, opts.n_mc, opts.seed, &mut stream_rng(opts.seed, 2))?;
    report.n_mc = opts.n_mc;
    let n = opts.n_mc as f64;
    for u in &directions {
        let h = body.support_raw(u);
        for &e in &eps {
            let t = target(e);
            let p_hat = cap_fraction(&cloud.points, u, h - e);
            let tc = t.min(1.0);
            let slack = 3.0 * libm::sqrt(tc * (1.0 - tc) / n) / t;
            let ratio = p_hat / t;
            if ratio < 1.0 - slack {
                report.verdict = false;
            }
            if ratio < report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_eps = e;
                report.worst_direction = u.clone();
                report.slack = slack;
            }
        }
    }
    Ok(report)
}

/// Largest `L` with `μ̂(C_K(u, ε)) ≥ L ε^α` on the probe grid, for fixed
/// `α` and `ε₀`. Used for bodies without analytic class constants.
pub fn fit_class_constant(
    body: &BodySpec,
    mode: Mode,
    alpha: f64,
    eps0: f64,
    opts: &MembershipOptions,
) -> Result<ClassParams> {
    let probe = ClassParams::new(alpha, 1.0, eps0)?;
    let report = check_class_membership(body, mode, &probe, opts)?;
    ClassParams::new(alpha, report.worst_ratio, eps0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn smooth_params_examples() {
        let p = class_params_smooth(2, 1.0).unwrap();
        assert_eq!(p.alpha, 1.5);
        assert!((p.big_l - 4.0 / (3.0 * PI)).abs() < 1e-14);
        let p = class_params_smooth(3, 1.0).unwrap();
        assert!((p.big_l - 0.375).abs() < 1e-14);
        let half = class_params_smooth(3, 0.25).unwrap();
        assert!((half.big_l - 0.375 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn boundary_params_examples() {
        let p = class_params_boundary(2, 1.0).unwrap();
        assert_eq!((p.alpha, p.big_l, p.eps0), (0.5, 1.0, 1.0));
        let p = class_params_boundary(3, 0.25).unwrap();
        // r^{(d-1)/2} at d = 3 is r itself
        assert_eq!((p.alpha, p.big_l, p.eps0), (1.0, 0.25, 0.25));
        let p = class_params_boundary(2, 0.04).unwrap();
        assert!((p.big_l - 0.2).abs() < 1e-15);
        assert!(class_params_boundary(1, 0.5).is_err());
    }

    #[test]
    fn rate_exponents() {
        assert_eq!(rate_exponent(RateFamily::SmoothInterior, 2).unwrap(), 2.0 / 3.0);
        assert_eq!(rate_exponent(RateFamily::PolytopeInterior, 2).unwrap(), 0.5);
        assert_eq!(rate_exponent(RateFamily::SmoothBoundary, 3).unwrap(), 1.0);
        assert!(rate_exponent(RateFamily::SmoothBoundary, 1).is_err());
    }

    #[test]
    fn deviation_examples() {
        let p = class_params_smooth(2, 1.0).unwrap();
        let b = deviation_bound(&p, 2, 10_000).unwrap();
        assert_eq!(b.tail(0.0), 1.0);
        // d/(C α L) = 2/(1.5·0.42441) > 1
        assert!((b.tau1 - 2.0 / (1.5 * p.big_l)).abs() < 1e-12);
        let expect = 144.0 * libm::exp(-p.big_l * libm::pow(20.0, 1.5));
        assert!((b.tail(20.0) - expect).abs() <= 1e-12 * expect);
        assert!((b.tail(20.0) - 4.7e-15).abs() < 0.1e-15);
        let far = (1.0 - b.a_n) / b.b_n + 1.0;
        assert_eq!(b.tail(far), 0.0);
    }

    #[test]
    fn ball_membership_is_exact() {
        let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = class_params_smooth(2, 1.0).unwrap();
        let opts = MembershipOptions { u_probes: 4, eps_grid: 100, ..Default::default() };
        let r = check_class_membership(&ball, Mode::Interior, &p, &opts).unwrap();
        assert!(r.analytic && r.verdict && r.worst_ratio >= 1.0);
        let inflated = ClassParams::new(p.alpha, 10.0 * p.big_l, p.eps0).unwrap();
        assert!(!check_class_membership(&ball, Mode::Interior, &inflated, &opts).unwrap().verdict);
    }
}
