use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use randhull::config::ExperimentConfig;
use randhull::experiments::{
    build_lower_bound_family, emit_report, run_deviation_experiment, run_rate_experiment, FamilyOptions, Format,
};
use randhull::io;
use randhull_core::{
    build_net, check_class_membership, class_params_boundary, class_params_smooth, d_l_estimate, deviation_bound,
    fit_class_constant, hausdorff_to_body, lp_error, sample, ClassParams, DistanceResult, MembershipOptions, Mode,
    SampleCloud,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "randhull", version, about = "Random convex hull estimation experiments")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for replications; all cores when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report encoding.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Interior,
    Boundary,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Interior => Mode::Interior,
            ModeArg::Boundary => Mode::Boundary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Hausdorff,
    Dl,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassFamily {
    Smooth,
    Boundary,
    Polytope,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an i.i.d. cloud from a body and write it as CSV.
    Sample {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Interior)]
        mode: ModeArg,
        #[arg(long)]
        n: usize,
    },
    /// Sphere nets.
    Net {
        #[command(subcommand)]
        action: NetAction,
    },
    /// Distance between a body and the hull of a point cloud.
    Distance {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        points: PathBuf,
        /// Net file; required for `hausdorff` and `dl`.
        #[arg(long)]
        net: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Hausdorff)]
        metric: MetricArg,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Quadrature nodes for `lp`.
        #[arg(long, default_value_t = 1 << 14)]
        quad_n: usize,
    },
    /// Evaluate the deviation bound.
    Bound {
        /// Class parameters as JSON, e.g. '{"alpha":1.5,"L":0.5,"eps0":1}'.
        #[arg(long)]
        params: String,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u64,
        /// Deviation levels; repeat or separate with commas.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        x: Vec<f64>,
    },
    /// Check a body against cap-mass class parameters.
    CheckClass(CheckClassArgs),
    /// Convergence-rate experiment from a TOML config.
    Rates {
        #[arg(long)]
        config: PathBuf,
    },
    /// Deviation-bound experiment from a TOML config with a `[deviation]` table.
    Deviation {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate the bump-body family over a δ-packing and check its geometry.
    LowerBoundFamily(FamilyArgs),
}

#[derive(Subcommand)]
enum NetAction {
    Build {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Args)]
struct CheckClassArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long, value_enum)]
    family: ClassFamily,
    /// Rolling radius used to derive smooth or boundary parameters.
    #[arg(long)]
    r: Option<f64>,
    /// Explicit parameters as JSON; overrides `--family` derivation.
    #[arg(long)]
    params: Option<String>,
    /// Multiplies `L` before checking.
    #[arg(long, default_value_t = 1.0)]
    scale_l: f64,
    #[arg(long, default_value_t = 64)]
    u_probes: usize,
    #[arg(long, default_value_t = 64)]
    eps_grid: usize,
    #[arg(long, default_value_t = 200_000)]
    n_mc: usize,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    delta: f64,
    /// Bump amplitude; the largest admissible value for `--rolling` when absent.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    rolling: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    mc_points: usize,
    /// Writes the generated bodies as a JSON array.
    #[arg(long)]
    bodies_out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_output(out, &bytes)
}

fn parse_params(text: &str) -> Result<ClassParams> {
    let p: ClassParams = serde_json::from_str(text).context("parsing class parameters")?;
    p.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct BoundRow {
    x: f64,
    threshold: f64,
    tail: f64,
}

#[derive(Serialize)]
struct BoundOutput {
    params: ClassParams,
    d: u32,
    n: u64,
    c_alpha: f64,
    tau1: f64,
    a_n: f64,
    b_n: f64,
    rows: Vec<BoundRow>,
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let format: Format = cli.format.into();
    match cli.command {
        Command::Sample { body, mode, n } => {
            let body = io::read_body(&body)?;
            let cloud = sample(&body, mode.into(), n, cli.seed)?;
            let mut buf = Vec::new();
            io::write_points_csv(&mut buf, &cloud.points)?;
            write_output(out, &buf)
        }
        Command::Net { action: NetAction::Build { dim, delta } } => {
            let net = build_net(dim, delta, cli.seed)?;
            match out {
                Some(p) => io::write_net(p, &net),
                None => write_json(None, &io::NetFile::from(&net)),
            }
        }
        Command::Distance { body, points, net, metric, p, quad_n } => {
            let body = io::read_body(&body)?;
            let cloud =
                SampleCloud { points: io::read_points_file(&points)?, body: body.clone(), mode: Mode::Interior, seed: 0 };
            let load_net = || -> Result<_> {
                match &net {
                    Some(path) => io::read_net(path),
                    None => bail!("--net is required for this metric"),
                }
            };
            let result = match metric {
                MetricArg::Hausdorff => hausdorff_to_body(&body, &cloud, &load_net()?)?,
                MetricArg::Dl => {
                    let net = load_net()?;
                    let v = d_l_estimate(&body, &body.center(), &cloud, &net)?;
                    DistanceResult { net_value: v, certified_upper: v, net_delta: net.delta() }
                }
                MetricArg::Lp => {
                    let v = lp_error(&body, &cloud, p, quad_n, cli.seed)?;
                    DistanceResult { net_value: v, certified_upper: v, net_delta: 0.0 }
                }
            };
            write_json(out, &result)
        }
        Command::Bound { params, d, n, x } => {
            let params = parse_params(&params)?;
            let b = deviation_bound(&params, d, n)?;
            let rows = x.iter().map(|&x| BoundRow { x, threshold: b.threshold(x), tail: b.tail(x) }).collect();
            write_json(
                out,
                &BoundOutput { params, d, n, c_alpha: b.c_alpha, tau1: b.tau1, a_n: b.a_n, b_n: b.b_n, rows },
            )
        }
        Command::CheckClass(a) => {
            let body = io::read_body(&a.body)?;
            let d = body.dim() as u32;
            let opts = MembershipOptions { u_probes: a.u_probes, eps_grid: a.eps_grid, n_mc: a.n_mc, seed: cli.seed };
            let rolling = || a.r.or_else(|| body.rolling_radius()).context("--r is required for this body");
            let (mode, mut params) = match (a.family, &a.params) {
                (ClassFamily::Boundary, Some(t)) => (Mode::Boundary, parse_params(t)?),
                (_, Some(t)) => (Mode::Interior, parse_params(t)?),
                (ClassFamily::Smooth, None) => (Mode::Interior, class_params_smooth(d, rolling()?)?),
                (ClassFamily::Boundary, None) => (Mode::Boundary, class_params_boundary(d, rolling()?)?),
                (ClassFamily::Polytope, None) => {
                    (Mode::Interior, fit_class_constant(&body, Mode::Interior, d as f64, 1.0, &opts)?)
                }
            };
            params = ClassParams::new(params.alpha, params.big_l * a.scale_l, params.eps0)?;
            let report = check_class_membership(&body, mode, &params, &opts)?;
            write_json(out, &report)
        }
        Command::Rates { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cli.seed != 0 {
                cfg.master_seed = cli.seed;
            }
            let report = run_rate_experiment(&cfg, cli.threads)?;
            emit_report(&report, out, format)
        }
        Command::Deviation { config } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cli.seed != 0 {
                cfg.master_seed = cli.seed;
            }
            let report = run_deviation_experiment(&cfg, cli.threads)?;
            emit_report(&report, out, format)
        }
        Command::LowerBoundFamily(a) => {
            let amplitude = match (a.amplitude, a.rolling) {
                (Some(v), _) => v,
                (None, Some(r)) => randhull_core::geometry::max_bump_amplitude(a.dim, a.radius, a.delta, r),
                (None, None) => bail!("give --amplitude or --rolling"),
            };
            let mut opts = FamilyOptions::new(a.dim, a.radius, a.delta, amplitude);
            opts.rolling = a.rolling;
            opts.seed = cli.seed;
            opts.mc_points = a.mc_points;
            let family = build_lower_bound_family(&opts)?;
            if let Some(p) = &a.bodies_out {
                let text = serde_json::to_string_pretty(&family.bodies)?;
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            }
            emit_report(&family.report, out, format)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
