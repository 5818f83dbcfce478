use randhull_core::*;

#[test]
fn ball_interior_mean_is_centered() {
    let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    let cloud = sample(&ball, Mode::Interior, 1_000_000, 21).unwrap();
    for k in 0..2 {
        let m = cloud.points.iter().map(|x| x[k]).sum::<f64>() / cloud.n() as f64;
        // 3σ/√n with σ² = 1/(d+2)
        assert!(m.abs() < 3.0 * (0.25f64).sqrt() / 1000.0, "{m}");
    }
}

#[test]
fn ball_boundary_points_are_unit() {
    let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    let cloud = sample(&ball, Mode::Boundary, 100_000, 1).unwrap();
    assert!(cloud.points.iter().all(|x| (x[0].hypot(x[1]) - 1.0).abs() < 1e-15));
}

#[test]
fn square_quadrant_fraction() {
    let sq = BodySpec::cube(2, 1.0).unwrap();
    let cloud = sample(&sq, Mode::Interior, 1_000_000, 2).unwrap();
    let q = cloud.points.iter().filter(|x| x[0] > 0.0 && x[1] > 0.0).count() as f64 / 1e6;
    assert!((q - 0.25).abs() < 0.002, "{q}");
}

#[test]
fn cap_frequency_converges_to_cap_volume() {
    let ball = BodySpec::ball(vec![0.0, 0.0], 1.0).unwrap();
    let cloud = sample(&ball, Mode::Interior, 1_000_000, 3).unwrap();
    let p = cap_volume_ball(2, 1.0, 0.5).unwrap() / std::f64::consts::PI;
    assert!((p - 0.1955).abs() < 1e-4);
    let hat = empirical_cap_probability(&cloud, &[0.6, 0.8], 0.5).unwrap();
    assert!((hat - p).abs() < 3.0 * (p * (1.0 - p) / 1e6).sqrt() + 1e-12, "{hat} {p}");
}

#[test]
fn ellipsoid_boundary_is_area_uniform() {
    // a thin ellipse: arc length concentrates on the long sides
    let e = BodySpec::ellipsoid_axis_aligned(vec![0.0, 0.0], vec![1.0, 0.1]).unwrap();
    let cloud = sample(&e, Mode::Boundary, 400_000, 4).unwrap();
    // arc-length fraction with |x| < 0.5, by fine polyline integration
    let m = 400_000;
    let (mut total, mut inner) = (0.0, 0.0);
    for i in 0..m {
        let t0 = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
        let t1 = 2.0 * std::f64::consts::PI * (i + 1) as f64 / m as f64;
        let (x0, y0, x1, y1) = (t0.cos(), 0.1 * t0.sin(), t1.cos(), 0.1 * t1.sin());
        let len = (x1 - x0).hypot(y1 - y0);
        total += len;
        if (0.5 * (x0 + x1)).abs() < 0.5 {
            inner += len;
        }
    }
    let p = inner / total;
    let hat = cloud.points.iter().filter(|x| x[0].abs() < 0.5).count() as f64 / cloud.n() as f64;
    assert!((hat - p).abs() < 4.0 * (p * (1.0 - p) / cloud.n() as f64).sqrt(), "{hat} {p}");
}

#[test]
fn same_seed_same_cloud() {
    let b = BodySpec::bump_ball(1.0, 0.3, 0.02, vec![1.0, 0.0, 0.0]).unwrap();
    assert_eq!(sample(&b, Mode::Interior, 500, 9).unwrap(), sample(&b, Mode::Interior, 500, 9).unwrap());
    assert_ne!(sample(&b, Mode::Interior, 500, 9).unwrap(), sample(&b, Mode::Interior, 500, 10).unwrap());
}
