//! Greedy packing and covering numbers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::grid::build_grid;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, Metric, Point, RegionSpec};
use crate::sampling::{density_sample, DensitySpec};

/// Monte Carlo draws used to estimate ball measures.
pub const MEASURE_DRAWS: usize = 10_000;

/// Cap on candidate centers.
const CANDIDATE_CAP: usize = 1_000_000;

/// Greedy lower bound for the number of disjoint closed geodesic balls of
/// radius `r`, centered in `B`, each of measure at most `a`. A ball is
/// accepted only when its estimated measure plus two standard errors stays
/// below `a`.
pub fn packing_estimate(
    spec: &ManifoldSpec,
    region: &RegionSpec,
    r: f64,
    a: f64,
    dens: &DensitySpec,
    seed: u64,
) -> Result<usize> {
    if !(r > 0.0) || !(a > 0.0) {
        return Err(Error::Domain(format!("packing needs r > 0 and a > 0, got r={r}, a={a}")));
    }
    let mut h = r / 4.0;
    let grid = loop {
        match crate::coverage::grid::build_grid_capped(spec, region, h, CANDIDATE_CAP) {
            Ok(g) => break g,
            Err(Error::GridTooLarge { .. }) => h *= 2.0,
            Err(e) => return Err(e),
        }
    };
    let probes = density_sample(spec, dens, MEASURE_DRAWS, seed)?;
    let n = probes.len() as f64;
    let mut accepted: Vec<Point> = Vec::new();
    for c in &grid.nodes {
        if accepted.iter().any(|q| spec.dist(c, q, Metric::Geodesic) <= 2.0 * r) {
            continue;
        }
        let hits = probes.points.iter().filter(|p| spec.dist(c, p, Metric::Geodesic) <= r).count() as f64;
        let p = hits / n;
        let sigma = ((p * (1.0 - p)).max(1.0 / n) / n).sqrt();
        if p + 2.0 * sigma <= a {
            accepted.push(*c);
        }
    }
    Ok(accepted.len())
}

/// Greedy upper bound for the covering number of a finite point set by
/// geodesic balls of radius `r` centered at set points. Each step opens the
/// ball that covers the most still-uncovered points, lowest index first.
pub fn covering_estimate(spec: &ManifoldSpec, points: &[Point], r: f64) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("covering radius must be positive, got {r}")));
    }
    if points.is_empty() {
        return Ok(0);
    }
    let neighbours: Vec<Vec<u32>> = points
        .par_iter()
        .map(|x| {
            points
                .iter()
                .enumerate()
                .filter(|(_, y)| spec.dist(x, y, Metric::Geodesic) <= r)
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect();
    let mut covered = vec![false; points.len()];
    let mut left = points.len();
    // Lazy greedy: stored gains only ever overestimate.
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        neighbours.iter().enumerate().map(|(i, nb)| (nb.len(), Reverse(i))).collect();
    let mut balls = 0;
    while left > 0 {
        let (gain, Reverse(i)) = heap.pop().expect("uncovered points remain");
        let fresh = neighbours[i].iter().filter(|&&j| !covered[j as usize]).count();
        if fresh < gain {
            heap.push((fresh, Reverse(i)));
            continue;
        }
        for &j in &neighbours[i] {
            if !covered[j as usize] {
                covered[j as usize] = true;
                left -= 1;
            }
        }
        balls += 1;
    }
    Ok(balls)
}

/// Grid nodes of `B` at spacing `h`, convenient as a finite stand-in for `B`.
pub fn region_nodes(spec: &ManifoldSpec, region: &RegionSpec, h: f64) -> Result<Vec<Point>> {
    Ok(build_grid(spec, region, h)?.nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::theta;

    #[test]
    fn one_ball_when_radius_exceeds_half_diameter() {
        let spec = ManifoldSpec::UnitDisk;
        let n = packing_estimate(&spec, &RegionSpec::All, 1.01, 10.0, &DensitySpec::Uniform, 1).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn tiny_measure_bound_gives_zero() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let n = packing_estimate(&spec, &RegionSpec::All, 0.1, 1e-9, &DensitySpec::Uniform, 1).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn square_packing_beats_lattice_construction() {
        // The 16 boundary points of the 0.25-lattice carry disjoint balls of
        // measure at most θ₂r²/2, so a packing of that size exists.
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        let r = 0.1;
        let n = packing_estimate(&spec, &RegionSpec::All, r, theta::<f64>(2) * r * r, &DensitySpec::Uniform, 3).unwrap();
        assert!(n >= 9, "{n}");
    }

    #[test]
    fn covering_small_cases() {
        let spec = ManifoldSpec::UnitSquare { d: 2 };
        assert_eq!(covering_estimate(&spec, &[Point::xy(0.3, 0.3)], 0.1).unwrap(), 1);
        let seg: Vec<Point> = (0..=200).map(|i| Point::xy(0.1 + 0.8 * i as f64 / 200.0, 0.5)).collect();
        for r in [0.05, 0.1, 0.13, 0.3] {
            let c = covering_estimate(&spec, &seg, r).unwrap();
            assert!(c <= (0.8 / (2.0 * r)).ceil() as usize + 1, "r={r}: {c}");
        }
    }
}
