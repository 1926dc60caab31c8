//! Fast invariant checks run by the `selftest` command.

use std::f64::consts::PI;

use crate::coverage::{build_grid, coverage_threshold, coverage_threshold_refined, KnnIndex};
use crate::error::Result;
use crate::harness::{ks_distance, run, ExperimentConfig, Mode};
use crate::limits::{c_d, c_dk, h_fn, hat_h};
use crate::manifold::{ManifoldSpec, Metric, Point, RegionSpec};
use crate::sampling::{uniform_sample, PointCloud};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn constants() -> Result<(bool, String)> {
    let e1 = rel(c_d::<f64>(3), 3.0 * PI * PI / 32.0);
    let e2 = rel(c_dk::<f64>(3, 1), PI.powf(5.0 / 3.0) / 16.0);
    let ok = c_d::<f64>(2) == 1.0 && e1 < 1e-12 && e2 < 1e-12;
    Ok((ok, format!("rel errors {e1:.1e}, {e2:.1e}")))
}

fn hat_h_inverse() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 1..=10 {
        for j in 1..=10 {
            let (a, x) = (0.3 * i as f64, 0.25 * j as f64);
            let y = hat_h(a, x)?;
            worst = worst.max((y * h_fn(a / y)? - x).abs());
        }
    }
    Ok((worst < 1e-10, format!("max residual {worst:.1e}")))
}

fn knn_paths_agree() -> Result<(bool, String)> {
    let cloud = uniform_sample(&ManifoldSpec::UnitSphere, 2000, 11)?;
    let probes = uniform_sample(&ManifoldSpec::UnitSphere, 100, 12)?;
    let (fast, slow) = (KnnIndex::new(&cloud), KnnIndex::scanning(&cloud));
    let mut bad = 0;
    for x in &probes.points {
        if fast.distance(x, 5, Metric::Geodesic)? != slow.distance(x, 5, Metric::Geodesic)? {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{bad} mismatches")))
}

fn exact_disk() -> Result<(bool, String)> {
    let cloud = PointCloud::from_points(ManifoldSpec::UnitDisk, vec![Point::xy(0.0, 0.0)])?;
    let est = coverage_threshold_refined(&cloud, &RegionSpec::All, 1, Metric::Geodesic, 1e-4)?;
    Ok((est.contains(1.0) && est.width() <= 1e-4, format!("[{}, {}]", est.lo, est.hi)))
}

fn orderings() -> Result<(bool, String)> {
    let spec = ManifoldSpec::SphericalCap { alpha: 1.2 };
    let cloud = uniform_sample(&spec, 150, 5)?;
    let grid = build_grid(&spec, &RegionSpec::All, 0.05)?;
    let g1 = coverage_threshold(&cloud, &grid, 1, Metric::Geodesic)?;
    let g2 = coverage_threshold(&cloud, &grid, 2, Metric::Geodesic)?;
    let e1 = coverage_threshold(&cloud, &grid, 1, Metric::AmbientEuclidean)?;
    let ok = g1.lo <= g2.lo && e1.lo <= g1.lo;
    Ok((ok, format!("k=1 {:.4}, k=2 {:.4}, euclidean {:.4}", g1.lo, g2.lo, e1.lo)))
}

fn ks_self_test() -> Result<(bool, String)> {
    let n = 20_000;
    let xs: Vec<f64> = (0..n).map(|i| -(-((i as f64 + 0.5) / n as f64).ln()).ln()).collect();
    let d = ks_distance(&xs, |x: f64| (-(-x).exp()).exp())?;
    Ok((d < 0.01, format!("KS {d:.2e}")))
}

fn determinism() -> Result<(bool, String)> {
    let mut cfg = ExperimentConfig::new(ManifoldSpec::UnitDisk, Mode::WeakBoundary, vec![200]);
    cfg.replications = 4;
    cfg.seed = 3;
    let (a, b) = (run(&cfg)?, run(&cfg)?);
    Ok((a.rows == b.rows, format!("{} rows", a.rows.len())))
}

/// Runs every check.
pub fn run_selftest() -> Vec<Check> {
    vec![
        check("constants", constants()),
        check("hat_h_inverse", hat_h_inverse()),
        check("knn_paths_agree", knn_paths_agree()),
        check("exact_disk_threshold", exact_disk()),
        check("threshold_orderings", orderings()),
        check("ks_inverse_cdf", ks_self_test()),
        check("determinism", determinism()),
    ]
}
