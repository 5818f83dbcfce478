//! Experiment configuration, read from TOML.
//!
//! ```toml
//! master_seed = 7
//! mode = "interior"
//! family = "smooth_interior"
//! n_grid = [1000, 3000, 10000]
//! reps = 50
//! q = 1.0
//!
//! [body]
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! [metric]
//! kind = "hausdorff"
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use randhull_core::{BodySpec, ClassParams, Mode, RateFamily};
use serde::{Deserialize, Serialize};

/// Which functional a `functional` metric targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionalKind {
    /// `T_p = ‖h‖_p`.
    T,
    /// `S_p = ‖φ‖_p`, the width function norm.
    S,
}

/// Distance or plug-in error measured per replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Hausdorff,
    Dl,
    Lp { p: f64 },
    /// `|F(K) − F(hull)|`; `p` absent means `p = ∞`.
    Functional { which: FunctionalKind, p: Option<f64> },
}

impl Metric {
    /// Finite-`p` metrics converge without the logarithmic factor.
    pub fn is_log_free(&self) -> bool {
        matches!(self, Metric::Lp { .. } | Metric::Functional { p: Some(_), .. })
    }

    pub fn label(&self) -> String {
        match self {
            Metric::Hausdorff => "hausdorff".into(),
            Metric::Dl => "dl".into(),
            Metric::Lp { p } => format!("lp({p})"),
            Metric::Functional { which, p: Some(p) } => format!("{which:?}_{p}"),
            Metric::Functional { which, p: None } => format!("{which:?}_inf"),
        }
    }
}

/// How the Hausdorff metric is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HausdorffRoute {
    /// Branch-and-bound bracket closed to `refine_rel_tol`.
    #[default]
    Refine,
    /// Maximum over a sphere net.
    Net,
}

/// Settings for the deviation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSettings {
    pub n: u64,
    /// Explicit `x` grid; when absent, `x_points` values spread up to just
    /// past the point where the bound drops to zero.
    #[serde(default)]
    pub x_grid: Option<Vec<f64>>,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    /// Class parameters; derived from the family and body when absent.
    #[serde(default)]
    pub params: Option<ClassParams>,
}

fn default_x_points() -> usize {
    40
}

fn default_quad_n() -> usize {
    1 << 14
}

fn default_rel_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub body: BodySpec,
    pub mode: Mode,
    pub family: RateFamily,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub q: f64,
    pub metric: Metric,
    /// Net spacing; the default is `min(1e-2, 0.1·(ln n/n)^{rate})` per `n`,
    /// floored to keep nets small.
    #[serde(default)]
    pub net_delta: Option<f64>,
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub hausdorff_route: HausdorffRoute,
    #[serde(default = "default_rel_tol")]
    pub refine_rel_tol: f64,
    #[serde(default)]
    pub deviation: Option<DeviationSettings>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("n_grid must be strictly increasing");
        }
        if self.n_grid.first().is_some_and(|&n| n < 2) {
            bail!("n_grid entries must be at least 2");
        }
        if self.reps < 2 {
            bail!("reps must be at least 2");
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            bail!("q must be a finite real ≥ 1");
        }
        match self.metric {
            Metric::Lp { p } | Metric::Functional { p: Some(p), .. } if !(p >= 1.0 && p.is_finite()) => {
                bail!("metric exponent p must be a finite real ≥ 1")
            }
            _ => {}
        }
        if let Some(delta) = self.net_delta {
            if !(delta > 0.0 && delta <= 1.0) {
                bail!("net_delta must lie in (0, 1]");
            }
        }
        if self.quad_n == 0 {
            bail!("quad_n must be positive");
        }
        if self.refine_rel_tol.is_nan() || self.refine_rel_tol <= 0.0 {
            bail!("refine_rel_tol must be positive");
        }
        if let Some(dev) = &self.deviation {
            if dev.n < 2 {
                bail!("deviation n must be at least 2");
            }
        }
        Ok(())
    }
}
