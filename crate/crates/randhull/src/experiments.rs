//! Monte Carlo harness: convergence-rate fits, deviation-bound checks and the
//! lower-bound body family.
//!
//! Replication `r` at grid index `i` draws from stream `(i << 32) | r` of the
//! master seed, and results land in slots indexed by `r`, so reports do not
//! depend on the worker count or scheduling.

use anyhow::{anyhow, bail, ensure, Result};
use rand::Rng;
use randhull_core::estimators::{lp_error_with, sup_norm_bracket};
use randhull_core::geometry::{bump_curvature_range, bump_volume_defect, max_bump_amplitude};
use randhull_core::rng::stream_rng;
use randhull_core::vector::dist;
use randhull_core::{
    build_net, class_params_boundary, class_params_smooth, d_l_estimate_on_directions, deviation_bound,
    fit_class_constant, functional_s, functional_t, rate_exponent, refine_sup_deficit, sample_with_rng,
    BodySpec, ClassParams, DistanceResult, HullSupport, MembershipOptions, Mode, Norm, RateFamily,
    RefineOptions, SphereNet, SphereQuadrature, SupportFunction,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::{ExperimentConfig, FunctionalKind, HausdorffRoute, Metric};

/// Abscissa of the rate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateAxis {
    /// `log(ln n / n)`; slopes are positive.
    LogLnNOverN,
    /// `log n`; slopes are negative.
    LogN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u64,
    pub mean_metric_q: f64,
    pub stderr: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub metric: String,
    pub family: RateFamily,
    pub dim: usize,
    pub q: f64,
    pub master_seed: u64,
    pub axis: RateAxis,
    pub theoretical_slope: f64,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: Option<f64>,
    /// 95% Student-t half-width; absent with only two grid points.
    pub ci_half_width: Option<f64>,
    pub rows: Vec<RateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub x: f64,
    pub threshold: f64,
    pub empirical_survival: f64,
    pub theoretical_tail: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub n: u64,
    pub reps: usize,
    pub dim: usize,
    pub params: ClassParams,
    pub tau1: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub master_seed: u64,
    pub violations: usize,
    pub rows: Vec<DeviationRow>,
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t.max(1));
    }
    Ok(b.build()?)
}

/// Smallest net spacing used by default, by dimension; keeps nets to a few
/// thousand points.
fn net_delta_floor(d: usize) -> f64 {
    match d {
        0..=2 => 0.004,
        3 => 0.05,
        _ => 0.15,
    }
}

/// `min(1e−2, 0.1·(ln n/n)^{rate})`, floored per dimension.
pub fn default_net_delta(d: usize, family: RateFamily, n: u64) -> Result<f64> {
    let nf = n as f64;
    let a_n = (nf.ln() / nf).powf(rate_exponent(family, d as u32)?);
    Ok((0.1 * a_n).min(1e-2).max(net_delta_floor(d)))
}

/// Data shared by every replication at one grid point. Components the metric
/// does not use are minimal placeholders.
struct Shared {
    net: SphereNet,
    quad: SphereQuadrature,
    body_functional: f64,
}

fn prepare(cfg: &ExperimentConfig, n: u64) -> Result<Shared> {
    let d = cfg.body.dim();
    let needs_net = match cfg.metric {
        Metric::Hausdorff => cfg.hausdorff_route == HausdorffRoute::Net,
        Metric::Dl | Metric::Functional { p: None, .. } => true,
        _ => false,
    };
    let net = if needs_net {
        let delta = match cfg.net_delta {
            Some(v) => v,
            None => default_net_delta(d, cfg.family, n)?,
        };
        build_net(d, delta, cfg.master_seed)?
    } else {
        build_net(d, 1.0, cfg.master_seed)?
    };
    let quad_n = if cfg.metric.is_log_free() { cfg.quad_n } else { 2 };
    let quad = SphereQuadrature::new(d, quad_n, cfg.master_seed ^ 0x5155_4144)?;
    let mut shared = Shared { net, quad, body_functional: 0.0 };
    if let Metric::Functional { which, p } = cfg.metric {
        shared.body_functional = functional_value(&cfg.body, which, p, &shared)?;
    }
    Ok(shared)
}

fn functional_value<S: SupportFunction + ?Sized>(
    s: &S,
    which: FunctionalKind,
    p: Option<f64>,
    shared: &Shared,
) -> Result<f64> {
    let norm = p.map_or(Norm::Inf, Norm::P);
    let v = match which {
        FunctionalKind::T => functional_t(s, norm, &shared.quad, &shared.net)?,
        FunctionalKind::S => functional_s(s, norm, &shared.quad, &shared.net)?,
    };
    Ok(v.value)
}

/// Hausdorff bracket between `body` and the hull by branch and bound.
pub fn hausdorff_refined(body: &BodySpec, hull: &HullSupport, rel_tol: f64) -> Result<DistanceResult> {
    let opts = RefineOptions { rel_tol, ..RefineOptions::default() };
    let b = refine_sup_deficit(body, hull, &opts)?;
    Ok(DistanceResult { net_value: b.lower, certified_upper: b.upper, net_delta: 0.0 })
}

fn replicate(cfg: &ExperimentConfig, shared: &Shared, n: u64, stream: u64) -> Result<DistanceResult> {
    let mut rng = stream_rng(cfg.master_seed, stream);
    let cloud = sample_with_rng(&cfg.body, cfg.mode, n as usize, cfg.master_seed, &mut rng)?;
    let hull = HullSupport::new(&cloud.points)?;
    let exact = |v: f64| DistanceResult { net_value: v, certified_upper: v, net_delta: 0.0 };
    Ok(match cfg.metric {
        Metric::Hausdorff => match cfg.hausdorff_route {
            HausdorffRoute::Refine => hausdorff_refined(&cfg.body, &hull, cfg.refine_rel_tol)?,
            HausdorffRoute::Net => {
                let net = &shared.net;
                let (v, c) = randhull_core::certified_sup_deficit(
                    net,
                    |u| cfg.body.support_raw(u),
                    |u| hull.eval(u),
                )?;
                DistanceResult { net_value: v, certified_upper: c, net_delta: net.delta() }
            }
        },
        Metric::Dl => exact(d_l_estimate_on_directions(
            &cfg.body,
            &cfg.body.center(),
            &cloud.points,
            shared.net.directions(),
        )?),
        Metric::Lp { p } => exact(lp_error_with(&cfg.body, &hull, p, &shared.quad)?),
        Metric::Functional { which, p } => {
            exact((shared.body_functional - functional_value(&hull, which, p, shared)?).abs())
        }
    })
}

fn replications(
    cfg: &ExperimentConfig,
    shared: &Shared,
    n: u64,
    stream_base: u64,
    reps: usize,
    threads: Option<usize>,
) -> Result<Vec<DistanceResult>> {
    pool(threads)?.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|r| replicate(cfg, shared, n, stream_base | r))
            .collect()
    })
}

/// Ordinary least squares `y = a + b x`: `(b, a, se(b))`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, Option<f64>) {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = (x.len() > 2).then(|| {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (k - 2.0) / sxx).sqrt()
    });
    (slope, intercept, se)
}

/// Runs `reps` replications per grid point, averages `metric^q` and fits the
/// log-log slope.
pub fn run_rate_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<RateReport> {
    cfg.validate()?;
    ensure!(cfg.n_grid.len() >= 2, "need ≥ 2 grid points for slope");
    let d = cfg.body.dim();
    let exponent = rate_exponent(cfg.family, d as u32)?;
    let axis = if cfg.metric.is_log_free() { RateAxis::LogN } else { RateAxis::LogLnNOverN };
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let shared = prepare(cfg, n)?;
        let values = replications(cfg, &shared, n, (i as u64) << 32, cfg.reps, threads)?;
        let powered: Vec<f64> = values.iter().map(|v| v.net_value.powf(cfg.q)).collect();
        let k = powered.len() as f64;
        let mean = powered.iter().sum::<f64>() / k;
        let var = powered.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        ensure!(mean.is_finite() && mean > 0.0, "non-finite or zero mean metric at n = {n}");
        rows.push(RateRow { n, mean_metric_q: mean, stderr: (var / k).sqrt(), reps: cfg.reps });
    }
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| {
            let n = r.n as f64;
            match axis {
                RateAxis::LogLnNOverN => (n.ln() / n).ln(),
                RateAxis::LogN => n.ln(),
            }
        })
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_metric_q.ln()).collect();
    let (slope, intercept, se) = ols(&xs, &ys);
    let ci = se.map(|se| {
        let t = StudentsT::new(0.0, 1.0, xs.len() as f64 - 2.0).expect("positive degrees of freedom");
        t.inverse_cdf(0.975) * se
    });
    ensure!(slope.is_finite(), "fitted slope is not finite");
    let theoretical = match axis {
        RateAxis::LogLnNOverN => cfg.q * exponent,
        RateAxis::LogN => -cfg.q * exponent,
    };
    Ok(RateReport {
        metric: cfg.metric.label(),
        family: cfg.family,
        dim: d,
        q: cfg.q,
        master_seed: cfg.master_seed,
        axis,
        theoretical_slope: theoretical,
        slope,
        intercept,
        slope_stderr: se,
        ci_half_width: ci,
        rows,
    })
}

/// Class parameters implied by the family: smooth bodies use their rolling
/// radius (capped at 1), polytopes a fitted `L` at `α = d`.
pub fn default_class_params(cfg: &ExperimentConfig) -> Result<ClassParams> {
    let d = cfg.body.dim() as u32;
    let rolling = || -> Result<f64> {
        let r = cfg.body.rolling_radius().ok_or_else(|| anyhow!("body has no certified rolling radius"))?;
        Ok(r.min(1.0))
    };
    Ok(match cfg.family {
        RateFamily::SmoothInterior => class_params_smooth(d, rolling()?)?,
        RateFamily::SmoothBoundary => class_params_boundary(d, rolling()?)?,
        RateFamily::PolytopeInterior => {
            let opts = MembershipOptions { seed: cfg.master_seed, ..MembershipOptions::default() };
            fit_class_constant(&cfg.body, Mode::Interior, d as f64, 1.0, &opts)?
        }
    })
}

/// Compares the empirical survival of `d_H` at `2a_n + 2b_n x` with the
/// bound's tail on an `x` grid.
pub fn run_deviation_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<DeviationReport> {
    cfg.validate()?;
    ensure!(cfg.metric == Metric::Hausdorff, "deviation experiments measure the Hausdorff distance");
    let settings = cfg.deviation.as_ref().ok_or_else(|| anyhow!("config has no [deviation] section"))?;
    let d = cfg.body.dim();
    let params = match settings.params {
        Some(p) => p,
        None => default_class_params(cfg)?,
    };
    let bound = deviation_bound(&params, d as u32, settings.n)?;
    let x_grid = match &settings.x_grid {
        Some(g) => g.clone(),
        None => {
            let stop = ((1.0 - bound.a_n) / bound.b_n).max(1.0) * 1.05;
            let k = settings.x_points.max(2);
            (0..k).map(|i| stop * i as f64 / (k - 1) as f64).collect()
        }
    };
    ensure!(!x_grid.is_empty(), "x grid is empty");
    let shared = prepare(cfg, settings.n)?;
    let values = replications(cfg, &shared, settings.n, 0xDE << 56, cfg.reps, threads)?;
    let reps = values.len() as f64;
    let mut rows = Vec::with_capacity(x_grid.len());
    for &x in &x_grid {
        let threshold = bound.threshold(x);
        // the certified upper end makes the comparison conservative
        let hits = values.iter().filter(|v| v.certified_upper >= threshold).count();
        let empirical = hits as f64 / reps;
        let tail = bound.tail(x);
        let sd = (tail * (1.0 - tail) / reps).sqrt();
        rows.push(DeviationRow {
            x,
            threshold,
            empirical_survival: empirical,
            theoretical_tail: tail,
            violation: empirical > tail + 3.0 * sd,
        });
    }
    Ok(DeviationReport {
        n: settings.n,
        reps: cfg.reps,
        dim: d,
        params,
        tau1: bound.tau1,
        a_n: bound.a_n,
        b_n: bound.b_n,
        master_seed: cfg.master_seed,
        violations: rows.iter().filter(|r| r.violation).count(),
        rows,
    })
}

/// Inputs of [`build_lower_bound_family`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyOptions {
    pub dim: usize,
    pub radius: f64,
    pub delta: f64,
    pub amplitude: f64,
    /// Rolling radius the bump bodies must keep; reported, and required to
    /// be below `radius` when given.
    pub rolling: Option<f64>,
    pub seed: u64,
    /// Uniform points for the Monte Carlo volume of the defect region.
    pub mc_points: usize,
    /// Net spacing for the pairwise Hausdorff bracket.
    pub pair_net_delta: f64,
}

impl FamilyOptions {
    pub fn new(dim: usize, radius: f64, delta: f64, amplitude: f64) -> Self {
        Self {
            dim,
            radius,
            delta,
            amplitude,
            rolling: None,
            seed: 0,
            mc_points: 1_000_000,
            pair_net_delta: if dim <= 2 { 2e-3 } else { 0.03 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub dim: usize,
    pub radius: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub admissible_amplitude: Option<f64>,
    pub curvature_min: f64,
    pub curvature_max: f64,
    pub packing_size: usize,
    /// `N·δ^{d−1}`, bounded below for a packing of the sphere.
    pub packing_density: f64,
    pub volume_defect_exact: f64,
    pub volume_defect_mc: f64,
    pub volume_defect_mc_stderr: f64,
    pub pair: (usize, usize),
    pub pair_separation: f64,
    pub pair_hausdorff: DistanceResult,
    pub pair_hausdorff_expected: f64,
    pub containment_ok: bool,
}

/// `G₀ = B(0, R)` followed by the bump bodies `G(u_j)` over a δ-packing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundFamily {
    pub report: FamilyReport,
    pub bodies: Vec<BodySpec>,
}

/// Orthonormal basis of `u^⊥` by Gram–Schmidt on the coordinate axes.
fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in std::iter::once(u).chain(basis.iter().map(|b| b.as_slice())) {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 && basis.len() < d - 1 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Monte Carlo `|G₀ ∖ G(u)|` from a box around the bump window, in
/// tangential/normal coordinates. Returns `(estimate, standard error)`.
pub fn monte_carlo_volume_defect(g0: &BodySpec, g: &BodySpec, points: usize, seed: u64) -> Result<(f64, f64)> {
    let BodySpec::BumpBall { radius, bump_scale, amplitude, bump_direction } = g else {
        bail!("volume defect needs a bump body");
    };
    let d = bump_direction.len();
    let rho = 0.5 * radius * bump_scale;
    let y_max = radius - (radius * radius - rho * rho).sqrt() + amplitude * bump_scale * bump_scale;
    let basis = complement_basis(bump_direction);
    let box_volume = (2.0 * rho).powi(d as i32 - 1) * y_max;
    let mut rng = stream_rng(seed, 0);
    let mut hits = 0usize;
    let mut x = vec![0.0; d];
    for _ in 0..points {
        let y = y_max * rng.random::<f64>();
        x.iter_mut().zip(bump_direction).for_each(|(xi, ui)| *xi = (radius - y) * ui);
        for b in &basis {
            let t = rho * (2.0 * rng.random::<f64>() - 1.0);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += t * bi);
        }
        if g0.contains(&x) && !g.contains(&x) {
            hits += 1;
        }
    }
    let f = hits as f64 / points as f64;
    Ok((f * box_volume, box_volume * (f * (1.0 - f) / points as f64).sqrt()))
}

/// Builds the bump family over a δ-packing and checks its geometry: convexity,
/// containment `B(0, R − αδ²) ⊆ G(u) ⊆ G₀`, the volume defect against its
/// closed form, and the Hausdorff distance of a far-apart pair against `αδ²`.
pub fn build_lower_bound_family(opts: &FamilyOptions) -> Result<LowerBoundFamily> {
    let d = opts.dim;
    ensure!(d >= 2, "the lower-bound family needs d ≥ 2");
    ensure!(opts.radius > 0.0 && opts.radius <= 1.0, "radius must lie in (0, 1]");
    ensure!(opts.delta > 0.0 && opts.delta <= 1.0, "delta must lie in (0, 1]");
    if let Some(r) = opts.rolling {
        ensure!(r > 0.0 && r < opts.radius, "rolling radius must lie in (0, radius)");
    }
    let (curvature_min, curvature_max) = bump_curvature_range(d, opts.radius, opts.delta, opts.amplitude, 4000);
    ensure!(
        curvature_min >= 0.0,
        "convexity check failed: amplitude {} too large for delta {} (min curvature {curvature_min:.3e})",
        opts.amplitude,
        opts.delta
    );
    let admissible = opts.rolling.map(|r| max_bump_amplitude(d, opts.radius, opts.delta, r));
    let packing = build_net(d, opts.delta, opts.seed)?;
    let g0 = BodySpec::ball(vec![0.0; d], opts.radius)?;
    let mut bodies = vec![g0.clone()];
    for u in packing.directions() {
        bodies.push(BodySpec::bump_ball(opts.radius, opts.delta, opts.amplitude, u.clone())?);
    }

    let exact = bump_volume_defect(d, opts.radius, opts.delta, opts.amplitude);
    let (mc, se) = monte_carlo_volume_defect(&g0, &bodies[1], opts.mc_points, opts.seed)?;

    let dirs = packing.directions();
    let far = (1..dirs.len())
        .max_by(|&a, &b| dist(&dirs[0], &dirs[a]).total_cmp(&dist(&dirs[0], &dirs[b])))
        .ok_or_else(|| anyhow!("packing has a single direction"))?;
    let probe = build_net(d, opts.pair_net_delta, opts.seed ^ 0xFA)?;
    let pair_hausdorff = sup_norm_bracket(&bodies[1], &bodies[far + 1], &probe)?;
    let depth = opts.amplitude * opts.delta * opts.delta;

    let containment_ok = bodies[1..].iter().take(4).all(|g| {
        probe.directions().iter().all(|u| {
            let h = g.support_raw(u);
            h <= opts.radius + 1e-12 && h >= opts.radius - depth - 1e-12
        })
    });

    let report = FamilyReport {
        dim: d,
        radius: opts.radius,
        delta: opts.delta,
        amplitude: opts.amplitude,
        admissible_amplitude: admissible,
        curvature_min,
        curvature_max,
        packing_size: dirs.len(),
        packing_density: dirs.len() as f64 * opts.delta.powi(d as i32 - 1),
        volume_defect_exact: exact,
        volume_defect_mc: mc,
        volume_defect_mc_stderr: se,
        pair: (0, far),
        pair_separation: dist(&dirs[0], &dirs[far]),
        pair_hausdorff,
        pair_hausdorff_expected: depth,
        containment_ok,
    };
    Ok(LowerBoundFamily { report, bodies })
}

/// Output encoding of reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Reports that can be written as CSV rows and checked before emission.
pub trait Report: Serialize {
    fn csv_header() -> &'static [&'static str];
    fn csv_rows(&self) -> Vec<Vec<f64>>;
    /// Rejects reports that cannot be emitted.
    fn check(&self) -> Result<()>;
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    ensure!(values.into_iter().all(f64::is_finite), "report contains non-finite values");
    Ok(())
}

impl Report for RateReport {
    fn csv_header() -> &'static [&'static str] {
        &["n", "mean_metric_q", "stderr", "reps"]
    }

    fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.n as f64, r.mean_metric_q, r.stderr, r.reps as f64]).collect()
    }

    fn check(&self) -> Result<()> {
        ensure!(!self.rows.is_empty(), "rate report has no rows");
        check_finite(self.rows.iter().flat_map(|r| [r.mean_metric_q, r.stderr]))?;
        check_finite([self.slope, self.intercept, self.theoretical_slope])?;
        check_finite(self.slope_stderr.into_iter().chain(self.ci_half_width))
    }
}

impl Report for DeviationReport {
    fn csv_header() -> &'static [&'static str] {
        &["x", "threshold", "empirical_survival", "theoretical_tail"]
    }

    fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| vec![r.x, r.threshold, r.empirical_survival, r.theoretical_tail])
            .collect()
    }

    fn check(&self) -> Result<()> {
        ensure!(!self.rows.is_empty(), "deviation report has an empty x grid");
        check_finite(self.rows.iter().flat_map(|r| [r.x, r.threshold, r.empirical_survival, r.theoretical_tail]))?;
        check_finite([self.a_n, self.b_n, self.tau1])
    }
}

impl Report for FamilyReport {
    fn csv_header() -> &'static [&'static str] {
        &["delta", "packing_size", "packing_density", "volume_defect_exact", "volume_defect_mc", "pair_hausdorff"]
    }

    fn csv_rows(&self) -> Vec<Vec<f64>> {
        vec![vec![
            self.delta,
            self.packing_size as f64,
            self.packing_density,
            self.volume_defect_exact,
            self.volume_defect_mc,
            self.pair_hausdorff.net_value,
        ]]
    }

    fn check(&self) -> Result<()> {
        check_finite(self.csv_rows().into_iter().flatten())
    }
}

/// Encodes a report; identical reports give identical bytes.
pub fn render_report<R: Report>(report: &R, format: Format) -> Result<Vec<u8>> {
    report.check()?;
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(R::csv_header())?;
            for row in report.csv_rows() {
                w.write_record(row.iter().map(|v| format!("{v:?}")))?;
            }
            Ok(w.into_inner().map_err(|e| anyhow!("csv flush: {e}"))?)
        }
    }
}

/// Writes a report to `path`, or to standard output when `path` is `None`.
pub fn emit_report<R: Report>(report: &R, path: Option<&std::path::Path>, format: Format) -> Result<()> {
    let bytes = render_report(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| anyhow!("writing {}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}
