use covlab::harness::{ks_distance, ks_two_sample};
use covlab::manifold::{polar_angle, ManifoldSpec, Point};
use covlab::sampling::{
    density_sample, poisson_count, poisson_sample, uniform_sample, CustomDensity, DensityConfig, DensitySpec,
};
use covlab::RegionSpec;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn first_coords(points: &[Point]) -> Vec<f64> {
    points.iter().map(|p| p.get(0)).collect()
}

#[test]
fn disk_inner_fraction() {
    let cloud = uniform_sample(&ManifoldSpec::UnitDisk, 1_000_000, 1).unwrap();
    let frac = cloud.points.iter().filter(|p| p.norm() <= 0.5).count() as f64 / 1e6;
    assert!((frac - 0.25).abs() < 0.002, "{frac}");
}

#[test]
fn square_mean() {
    let cloud = uniform_sample(&ManifoldSpec::UnitSquare { d: 2 }, 1_000_000, 2).unwrap();
    let mean = first_coords(&cloud.points).iter().sum::<f64>() / 1e6;
    assert!((mean - 0.5).abs() < 0.002, "{mean}");
}

#[test]
fn linear_density_mean() {
    let spec = ManifoldSpec::UnitSquare { d: 2 };
    let dens = DensityConfig::Linear { slope: 1.0 }.build(&spec, &RegionSpec::All).unwrap();
    let cloud = density_sample(&spec, &dens, 1_000_000, 3).unwrap();
    let mean = first_coords(&cloud.points).iter().sum::<f64>() / 1e6;
    assert!((mean - 5.0 / 9.0).abs() < 0.002, "{mean}");
}

#[test]
fn uniform_paths_agree_in_law() {
    let spec = ManifoldSpec::UnitSquare { d: 2 };
    let via_density = density_sample(&spec, &DensitySpec::Uniform, 100_000, 4).unwrap();
    let ks = ks_distance(&first_coords(&via_density.points), |x: f64| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks < 0.01, "{ks}");

    let flat = CustomDensity::new(&spec, "flat", 1.0, |_| 1.0).unwrap();
    let custom = density_sample(&spec, &DensitySpec::Custom(flat), 100_000, 5).unwrap();
    let ks = ks_distance(&first_coords(&custom.points), |x: f64| x.clamp(0.0, 1.0)).unwrap();
    assert!(ks < 0.01, "{ks}");
    let plain = uniform_sample(&spec, 100_000, 6).unwrap();
    assert!(ks_two_sample(&first_coords(&custom.points), &first_coords(&plain.points)).unwrap() < 0.01);
}

#[test]
fn poisson_count_moments() {
    let t = 1e4;
    let counts: Vec<f64> = (0..1000).map(|i| poisson_count(t, 1000 + i).unwrap() as f64).collect();
    let mean = counts.iter().sum::<f64>() / 1000.0;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 999.0;
    assert!((mean - t).abs() <= 3.0 * t.sqrt() / 1000f64.sqrt(), "{mean}");
    assert!((var / t - 1.0).abs() < 0.1, "{var}");
}

#[test]
fn poisson_tiny_intensity_is_empty() {
    let empty = (0..1000)
        .filter(|&s| poisson_sample(&ManifoldSpec::UnitDisk, &DensitySpec::Uniform, 1e-9, s).unwrap().is_empty())
        .count();
    assert_eq!(empty, 1000);
}

/// Index of one of 8 equal-volume cells.
fn cell(spec: &ManifoldSpec, p: &Point) -> usize {
    let sector = |x: f64, y: f64| {
        let a = y.atan2(x).rem_euclid(std::f64::consts::TAU);
        ((a / std::f64::consts::TAU * 8.0) as usize).min(7)
    };
    match spec {
        ManifoldSpec::UnitSquare { .. } => ((p.get(0) * 8.0) as usize).min(7),
        ManifoldSpec::UnitDisk | ManifoldSpec::SphericalCap { .. } => sector(p.get(0), p.get(1)),
        ManifoldSpec::SolidBall | ManifoldSpec::UnitSphere => {
            usize::from(p.get(0) >= 0.0) + 2 * usize::from(p.get(1) >= 0.0) + 4 * usize::from(p.get(2) >= 0.0)
        }
    }
}

#[test]
fn chi_square_equal_volume_cells() {
    let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(1.0 - 1e-3);
    let specs = [
        ManifoldSpec::UnitSquare { d: 2 },
        ManifoldSpec::UnitSquare { d: 3 },
        ManifoldSpec::UnitDisk,
        ManifoldSpec::SolidBall,
        ManifoldSpec::UnitSphere,
        ManifoldSpec::SphericalCap { alpha: 1.1 },
    ];
    let n = 100_000;
    for (i, spec) in specs.iter().enumerate() {
        let cloud = uniform_sample(spec, n, 40 + i as u64).unwrap();
        let mut counts = [0f64; 8];
        for p in &cloud.points {
            counts[cell(spec, p)] += 1.0;
        }
        let e = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
        assert!(chi2 < critical, "{spec:?}: chi2 {chi2} >= {critical}");
    }
}

#[test]
fn cap_polar_angle_law() {
    // cos of the polar angle is uniform on [cos α, 1].
    let alpha: f64 = 0.9;
    let cloud = uniform_sample(&ManifoldSpec::SphericalCap { alpha }, 100_000, 9).unwrap();
    let z: Vec<f64> = cloud.points.iter().map(|p| polar_angle(p).cos()).collect();
    let lo = alpha.cos();
    let ks = ks_distance(&z, |x: f64| ((x - lo) / (1.0 - lo)).clamp(0.0, 1.0)).unwrap();
    assert!(ks < 0.01, "{ks}");
}
