use covlab::coverage::{
    coverage_threshold_refined, covering_estimate, interior_threshold_refined, region_nodes,
};
use covlab::manifold::{ManifoldSpec, Metric, Point, RegionSpec};
use covlab::sampling::uniform_sample;

/// k-th smallest distance by full sort.
fn kth(spec: &ManifoldSpec, x: &Point, cloud: &[Point], k: usize) -> f64 {
    let mut d: Vec<f64> = cloud.iter().map(|p| spec.dist(x, p, Metric::Geodesic)).collect();
    d.sort_by(f64::total_cmp);
    d[k - 1]
}

#[test]
fn disk_threshold_matches_brute_force_raster() {
    let spec = ManifoldSpec::UnitDisk;
    let cloud = uniform_sample(&spec, 50, 2024).unwrap();
    let est = coverage_threshold_refined(&cloud, &RegionSpec::All, 2, Metric::Geodesic, 1e-6).unwrap();
    // Raster of the disk plus its boundary circle.
    let m = 800;
    let mut best: f64 = 0.0;
    for i in 0..=m {
        for j in 0..=m {
            let (x, y) = (-1.0 + 2.0 * i as f64 / m as f64, -1.0 + 2.0 * j as f64 / m as f64);
            if x * x + y * y <= 1.0 {
                best = best.max(kth(&spec, &Point::xy(x, y), &cloud.points, 2));
            }
        }
    }
    for i in 0..20_000 {
        let t = std::f64::consts::TAU * i as f64 / 20_000.0;
        best = best.max(kth(&spec, &Point::xy(t.cos(), t.sin()), &cloud.points, 2));
    }
    assert!(best <= est.hi, "raster {best} above {est:?}");
    // Lipschitz gap of a raster with spacing 2/m.
    assert!(est.lo - best <= 2.0 / m as f64, "raster {best} far below {est:?}");
}

#[test]
fn covering_scales_like_inverse_area() {
    let spec = ManifoldSpec::UnitSquare { d: 2 };
    let pts = uniform_sample(&spec, 2000, 9).unwrap().points;
    let counts: Vec<f64> =
        [0.05, 0.1, 0.2].iter().map(|&r| covering_estimate(&spec, &pts, r).unwrap() as f64).collect();
    for w in counts.windows(2) {
        let ratio = w[0] / w[1];
        assert!((4.0 / 3.0..=12.0).contains(&ratio), "{counts:?}");
    }
}

#[test]
fn interior_threshold_is_pinched_away_from_the_boundary() {
    // On B every point is at least delta from the boundary, so
    // min(R, delta) <= interior threshold <= R.
    let delta = 0.25;
    let region = RegionSpec::InteriorBody { delta };
    for spec in [ManifoldSpec::UnitDisk, ManifoldSpec::UnitSquare { d: 2 }, ManifoldSpec::SolidBall] {
        for n in [300, 3000] {
            let cloud = uniform_sample(&spec, n, 5).unwrap();
            let h = 1e-3;
            let cov = coverage_threshold_refined(&cloud, &region, 1, Metric::Geodesic, h).unwrap();
            let int = interior_threshold_refined(&cloud, &region, 1, Metric::Geodesic, h).unwrap();
            assert!(int.lo <= cov.hi + 1e-9, "{cov:?} {int:?}");
            assert!(int.hi >= cov.lo.min(delta) - 1e-9, "{cov:?} {int:?}");
        }
    }
}

#[test]
fn interior_never_exceeds_coverage() {
    for spec in [ManifoldSpec::UnitDisk, ManifoldSpec::SphericalCap { alpha: 1.0 }, ManifoldSpec::UnitSquare { d: 3 }] {
        for seed in 0..4 {
            let cloud = uniform_sample(&spec, 200, seed).unwrap();
            let cov = coverage_threshold_refined(&cloud, &RegionSpec::All, 2, Metric::Geodesic, 1e-3).unwrap();
            let int = interior_threshold_refined(&cloud, &RegionSpec::All, 2, Metric::Geodesic, 1e-3).unwrap();
            assert!(int.lo <= cov.hi, "{spec:?}: {int:?} {cov:?}");
        }
    }
}

#[test]
fn region_nodes_stay_in_region() {
    let spec = ManifoldSpec::UnitDisk;
    let region = RegionSpec::InteriorBody { delta: 0.3 };
    let nodes = region_nodes(&spec, &region, 0.05).unwrap();
    assert!(!nodes.is_empty());
    assert!(nodes.iter().all(|p| p.dist2(&Point::xy(0.0, 0.0)) <= 0.7f64.powi(2) + 1e-12));
}
