//! Certified interval estimates of coverage thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{build_grid, Cell, EvalGrid, Tiling, DEFAULT_NODE_CAP};
use super::knn::KnnIndex;
use crate::error::{Error, Result};
use crate::manifold::{Metric, Point, RegionSpec};
use crate::sampling::PointCloud;

/// The true threshold lies in `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub lo: f64,
    pub hi: f64,
    /// Covering radius of the nodes that produced `lo`.
    pub h: f64,
    pub k: usize,
    pub metric: Metric,
    pub argmax: Point,
}

impl ThresholdEstimate {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo <= r && r <= self.hi
    }
}

fn check_grid(cloud: &PointCloud, grid: &EvalGrid) -> Result<()> {
    if cloud.spec != grid.spec {
        return Err(Error::InvalidSpec(format!(
            "cloud lives on {:?} but the grid was built for {:?}",
            cloud.spec, grid.spec
        )));
    }
    Ok(())
}

/// Index and value of the largest entry; ties go to the lowest index.
fn arg_max(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
}

/// k-NN distance at every grid node.
pub fn knn_field(cloud: &PointCloud, grid: &EvalGrid, k: usize, metric: Metric) -> Result<Vec<f64>> {
    check_grid(cloud, grid)?;
    let index = KnnIndex::new(cloud);
    grid.nodes.par_iter().map(|x| index.distance(x, k, metric)).collect()
}

/// `lo` is the largest k-NN distance over the grid nodes, `hi = lo + h`.
pub fn coverage_threshold(cloud: &PointCloud, grid: &EvalGrid, k: usize, metric: Metric) -> Result<ThresholdEstimate> {
    let field = knn_field(cloud, grid, k, metric)?;
    let (i, lo) = arg_max(&field);
    Ok(ThresholdEstimate { lo, hi: lo + grid.h, h: grid.h, k, metric, argmax: grid.nodes[i] })
}

/// Interior threshold by bisection of the grid predicate
/// "every node farther than `r` from the boundary has k-NN distance ≤ `r`".
/// The returned interval has width at most `tol + h`.
pub fn interior_threshold(
    cloud: &PointCloud,
    region: &RegionSpec,
    k: usize,
    metric: Metric,
    h: f64,
    tol: f64,
) -> Result<ThresholdEstimate> {
    let grid = build_grid(&cloud.spec, region, h)?;
    interior_threshold_on_grid(cloud, &grid, k, metric, tol)
}

pub fn interior_threshold_on_grid(
    cloud: &PointCloud,
    grid: &EvalGrid,
    k: usize,
    metric: Metric,
    tol: f64,
) -> Result<ThresholdEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance must be positive, got {tol}")));
    }
    let field = knn_field(cloud, grid, k, metric)?;
    let spec = grid.spec;
    let margin: Vec<f64> =
        grid.nodes.iter().map(|x| spec.dist_to_boundary(x).unwrap_or(f64::INFINITY)).collect();
    let covered = |r: f64| field.iter().zip(&margin).all(|(&g, &b)| b <= r || g <= r);

    let (mut lo, mut hi) = (0.0, spec.diameter());
    if !covered(hi) {
        return Err(Error::NoConvergence(format!("interior predicate false at r = {hi}")));
    }
    if covered(lo) {
        hi = lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if covered(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let clipped: Vec<f64> = field.iter().zip(&margin).map(|(&g, &b)| g.min(b)).collect();
    let (i, _) = arg_max(&clipped);
    Ok(ThresholdEstimate { lo, hi: hi + grid.h, h: grid.h, k, metric, argmax: grid.nodes[i] })
}

/// Nodes of `grid` that are covered at least `k` times at radius `r`.
pub fn covered_region(cloud: &PointCloud, grid: &EvalGrid, k: usize, r: f64, metric: Metric) -> Result<Vec<usize>> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    check_grid(cloud, grid)?;
    if k == 0 {
        return Ok((0..grid.len()).collect());
    }
    if cloud.len() < k {
        return Ok(Vec::new());
    }
    let field = knn_field(cloud, grid, k, metric)?;
    Ok(field.iter().enumerate().filter(|(_, &g)| g <= r).map(|(i, _)| i).collect())
}

/// Result of [`certified_max`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct Certified {
    pub lo: f64,
    pub hi: f64,
    pub argmax: Point,
}

/// Certified maximum of a geodesically 1-Lipschitz function over a tiled
/// region, by branch and bound: a cell whose upper bound `f(node) + radius`
/// cannot beat the best node value is dropped, other cells are split until
/// their bound is within `h` of the best value. Guarantees
/// `lo ≤ sup f ≤ hi ≤ lo + h`.
pub(crate) fn certified_max<F>(tiling: &Tiling, h: f64, h0: f64, cap: usize, f: F) -> Result<Certified>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    let mut start = h0.max(h);
    let roots = loop {
        match tiling.root_cells(start, cap) {
            Ok(c) => break c,
            Err(Error::GridTooLarge { .. }) if start < tiling_span(tiling) => start *= 2.0,
            Err(e) => return Err(e),
        }
    };
    let eval = |cells: Vec<Cell>| -> Result<Vec<(Cell, Point, f64, f64)>> {
        cells
            .into_par_iter()
            .map(|c| {
                let x = tiling.center(&c);
                Ok((c, x, tiling.radius(&c), f(&x)?))
            })
            .collect()
    };
    let mut active = eval(roots)?;
    let mut best = (f64::NEG_INFINITY, active.first().map(|a| a.1).ok_or_else(|| {
        Error::InvalidRegion("empty tiling".into())
    })?);
    let mut leaf_hi = f64::NEG_INFINITY;
    let slack = h * 1e-12;
    while !active.is_empty() {
        for a in &active {
            if a.3 > best.0 {
                best = (a.3, a.1);
            }
        }
        let mut next = Vec::new();
        for (cell, _, rad, v) in &active {
            if v + rad <= best.0 {
                continue;
            }
            // A leaf may stop early once its bound cannot exceed `lo + h`.
            if *rad <= h + slack || v + rad <= best.0 + h {
                leaf_hi = leaf_hi.max(v + rad);
            } else {
                tiling.subdivide(cell, 2, &mut next);
            }
        }
        if next.len() > cap {
            return Err(Error::GridTooLarge { required: next.len(), cap });
        }
        active = eval(next)?;
    }
    Ok(Certified { lo: best.0, hi: best.0.max(leaf_hi), argmax: best.1 })
}

fn tiling_span(t: &Tiling) -> f64 {
    match *t {
        Tiling::Cube { lo, hi, d } => (hi - lo) * (d as f64).sqrt(),
        Tiling::Polar { radius, .. } | Tiling::Spherical { radius, .. } => 2.0 * radius,
        Tiling::Cap { radius, .. } => 2.0 * radius,
    }
}

/// Starting cell size: a fraction of the typical k-NN distance.
fn initial_spacing(cloud: &PointCloud, region: &RegionSpec, k: usize) -> Result<f64> {
    let v = cloud.spec.region_measures(region)?.volume.max(f64::MIN_POSITIVE);
    let d = cloud.spec.dim() as f64;
    Ok(0.5 * (k as f64 * v / cloud.len().max(1) as f64).powf(1.0 / d))
}

/// Coverage threshold by adaptive refinement. The interval has width at
/// most `h` regardless of how fine `h` is, since only cells that can still
/// hold the maximum are refined.
pub fn coverage_threshold_refined(
    cloud: &PointCloud,
    region: &RegionSpec,
    k: usize,
    metric: Metric,
    h: f64,
) -> Result<ThresholdEstimate> {
    let tiling = Tiling::for_region(&cloud.spec, region)?;
    let index = KnnIndex::new(cloud);
    index.check_k(k)?;
    let h0 = initial_spacing(cloud, region, k)?;
    let c = certified_max(&tiling, h, h0, DEFAULT_NODE_CAP, |x| index.distance(x, k, metric))?;
    Ok(ThresholdEstimate { lo: c.lo, hi: c.hi, h, k, metric, argmax: c.argmax })
}

/// Interior threshold by adaptive refinement of `min(k-NN distance, distance to boundary)`.
pub fn interior_threshold_refined(
    cloud: &PointCloud,
    region: &RegionSpec,
    k: usize,
    metric: Metric,
    h: f64,
) -> Result<ThresholdEstimate> {
    let tiling = Tiling::for_region(&cloud.spec, region)?;
    let index = KnnIndex::new(cloud);
    index.check_k(k)?;
    let spec = cloud.spec;
    let h0 = initial_spacing(cloud, region, k)?;
    let c = certified_max(&tiling, h, h0, DEFAULT_NODE_CAP, |x| {
        let g = index.distance(x, k, metric)?;
        Ok(spec.dist_to_boundary(x).map_or(g, |b| g.min(b)))
    })?;
    Ok(ThresholdEstimate { lo: c.lo, hi: c.hi, h, k, metric, argmax: c.argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldSpec;
    use crate::sampling::uniform_sample;

    #[test]
    fn single_center_disk() {
        let spec = ManifoldSpec::UnitDisk;
        let cloud = PointCloud::from_points(spec, vec![Point::xy(0.0, 0.0)]).unwrap();
        for metric in [Metric::Geodesic, Metric::AmbientEuclidean] {
            let grid = build_grid(&spec, &RegionSpec::All, 0.02).unwrap();
            let est = coverage_threshold(&cloud, &grid, 1, metric).unwrap();
            assert!(est.contains(1.0), "{est:?}");
            assert!(est.width() <= 0.02 + 1e-12);
            let fine = coverage_threshold_refined(&cloud, &RegionSpec::All, 1, metric, 1e-4).unwrap();
            assert!(fine.contains(1.0) && fine.width() <= 1e-4, "{fine:?}");
        }
    }

    #[test]
    fn corner_cloud_square() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let cloud = PointCloud::from_points(spec, vec![Point::xy(0.0, 0.0)]).unwrap();
        let est = coverage_threshold_refined(&cloud, &RegionSpec::All, 1, Metric::Geodesic, 1e-9).unwrap();
        assert!(est.contains(2f64.sqrt()), "{est:?}");
        assert!(est.argmax.dist2(&Point::xy(1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn interior_fixed_point() {
        let spec = ManifoldSpec::UnitDisk;
        let cloud = PointCloud::from_points(spec, vec![Point::xy(0.0, 0.0)]).unwrap();
        let est = interior_threshold(&cloud, &RegionSpec::All, 1, Metric::Geodesic, 0.01, 1e-6).unwrap();
        assert!(est.contains(0.5), "{est:?}");
        assert!(est.width() <= 0.01 + 1e-6 + 1e-12);
        let r = interior_threshold_refined(&cloud, &RegionSpec::All, 1, Metric::Geodesic, 1e-4).unwrap();
        assert!(r.contains(0.5), "{r:?}");
    }

    #[test]
    fn refined_matches_grid_interval() {
        let spec = ManifoldSpec::UnitDisk;
        let cloud = uniform_sample(&spec, 200, 3).unwrap();
        let grid = build_grid(&spec, &RegionSpec::All, 0.01).unwrap();
        let coarse = coverage_threshold(&cloud, &grid, 2, Metric::Geodesic).unwrap();
        let fine = coverage_threshold_refined(&cloud, &RegionSpec::All, 2, Metric::Geodesic, 1e-5).unwrap();
        assert!(fine.lo <= coarse.hi + 1e-12 && coarse.lo <= fine.hi + 1e-12);
    }

    #[test]
    fn covered_region_edges() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let cloud = uniform_sample(&spec, 40, 8).unwrap();
        let grid = build_grid(&spec, &RegionSpec::All, 0.05).unwrap();
        let est = coverage_threshold(&cloud, &grid, 1, Metric::Geodesic).unwrap();
        assert_eq!(covered_region(&cloud, &grid, 1, est.hi, Metric::Geodesic).unwrap().len(), grid.len());
        assert!(covered_region(&cloud, &grid, 41, 10.0, Metric::Geodesic).unwrap().is_empty());
        assert!(covered_region(&cloud, &grid, 1, 0.0, Metric::Geodesic).unwrap().is_empty());
    }

    #[test]
    fn estimate_json_shape() {
        let est = ThresholdEstimate {
            lo: 0.5,
            hi: 0.51,
            h: 0.01,
            k: 1,
            metric: Metric::Geodesic,
            argmax: Point::xy(0.5, 0.0),
        };
        let v = serde_json::to_value(est).unwrap();
        assert_eq!(v, serde_json::json!({"lo":0.5,"hi":0.51,"h":0.01,"k":1,"metric":"geodesic","argmax":[0.5,0.0]}));
    }
}
