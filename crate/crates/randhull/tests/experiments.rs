use randhull::config::ExperimentConfig;
use randhull::experiments::{
    build_lower_bound_family, render_report, run_deviation_experiment, run_rate_experiment, FamilyOptions, Format,
    RateAxis,
};

fn config(n_grid: &str, metric: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        "mode = \"interior\"\nfamily = \"smooth_interior\"\nn_grid = {n_grid}\nreps = 8\nq = 1.0\nmaster_seed = 17\n{extra}\n\
         [metric]\n{metric}\n\n[body]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 1.0\n"
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

#[test]
fn single_grid_point_rejected() {
    let cfg = config("[500]", "kind = \"hausdorff\"", "");
    let err = run_rate_experiment(&cfg, Some(1)).unwrap_err();
    assert!(err.to_string().contains("need ≥ 2 grid points for slope"));
}

#[test]
fn rate_report_shape_and_thread_independence() {
    let cfg = config("[200, 800, 3200]", "kind = \"hausdorff\"", "");
    let one = run_rate_experiment(&cfg, Some(1)).unwrap();
    let many = run_rate_experiment(&cfg, Some(3)).unwrap();
    assert_eq!(one, many);
    assert_eq!(one.rows.len(), 3);
    assert_eq!(one.axis, RateAxis::LogLnNOverN);
    assert!(one.rows.windows(2).all(|w| w[1].mean_metric_q < w[0].mean_metric_q));
    assert!(one.slope > 0.0 && one.ci_half_width.is_some());
    let csv = String::from_utf8(render_report(&one, Format::Csv).unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn every_metric_runs() {
    for (metric, extra, axis) in [
        ("kind = \"hausdorff\"", "hausdorff_route = \"net\"\nnet_delta = 0.02", RateAxis::LogLnNOverN),
        ("kind = \"dl\"", "net_delta = 0.02", RateAxis::LogLnNOverN),
        ("kind = \"lp\"\np = 1.0", "quad_n = 512", RateAxis::LogN),
        ("kind = \"functional\"\nwhich = \"T\"\np = 2.0", "quad_n = 512", RateAxis::LogN),
        ("kind = \"functional\"\nwhich = \"S\"", "net_delta = 0.02", RateAxis::LogLnNOverN),
    ] {
        let cfg = config("[200, 2000]", metric, extra);
        let r = run_rate_experiment(&cfg, Some(2)).unwrap_or_else(|e| panic!("{metric}: {e:#}"));
        assert_eq!(r.axis, axis, "{metric}");
        assert!(r.rows.iter().all(|row| row.mean_metric_q > 0.0), "{metric}");
        assert!(r.ci_half_width.is_none());
        match axis {
            RateAxis::LogLnNOverN => assert!(r.slope > 0.0, "{metric}: {}", r.slope),
            RateAxis::LogN => assert!(r.slope < 0.0, "{metric}: {}", r.slope),
        }
    }
}

#[test]
fn deviation_edges() {
    let cfg = config("[1000]", "kind = \"hausdorff\"", "[deviation]\nn = 1000\nx_grid = [0.0, 5.0, 1e6]\n");
    let r = run_deviation_experiment(&cfg, Some(2)).unwrap();
    assert_eq!(r.rows[0].theoretical_tail, 1.0);
    assert!(!r.rows[0].violation);
    let last = r.rows.last().unwrap();
    assert_eq!(last.theoretical_tail, 0.0);
    assert_eq!(last.empirical_survival, 0.0);
    assert!(r.rows.windows(2).all(|w| w[1].empirical_survival <= w[0].empirical_survival));
}

#[test]
fn deviation_needs_hausdorff_and_grid() {
    let cfg = config("[1000]", "kind = \"dl\"", "[deviation]\nn = 1000\n");
    assert!(run_deviation_experiment(&cfg, Some(1)).is_err());
    let cfg = config("[1000]", "kind = \"hausdorff\"", "[deviation]\nn = 1000\nx_grid = []\n");
    assert!(run_deviation_experiment(&cfg, Some(1)).is_err());
}

#[test]
fn lower_bound_family_geometry() {
    let mut opts = FamilyOptions::new(2, 1.0, 0.2, 0.02);
    opts.mc_points = 200_000;
    let fam = build_lower_bound_family(&opts).unwrap();
    let r = &fam.report;
    assert_eq!(fam.bodies.len(), r.packing_size + 1);
    assert!(r.containment_ok);
    assert!(r.curvature_min >= 0.0);
    // a δ-packing of the circle has about 2π/δ points
    assert!(r.packing_density >= 1.0 && r.packing_density <= 2.0 * std::f64::consts::PI + 1e-9);
    assert!((r.volume_defect_mc - r.volume_defect_exact).abs() <= 4.0 * r.volume_defect_mc_stderr + 1e-12);
    assert!(r.pair_hausdorff.net_value <= r.pair_hausdorff_expected + 1e-12);
    assert!(r.pair_hausdorff_expected <= r.pair_hausdorff.certified_upper);
}

#[test]
fn lower_bound_family_rejects_nonconvex_amplitude() {
    let opts = FamilyOptions::new(2, 1.0, 0.1, 5.0);
    let err = build_lower_bound_family(&opts).unwrap_err();
    assert!(err.to_string().contains("convexity check failed"));
}
