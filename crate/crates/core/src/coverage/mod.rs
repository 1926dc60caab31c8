//! Coverage thresholds, covered regions, packing and covering numbers.

pub mod grid;
pub mod knn;
pub mod packing;
pub mod threshold;

pub use grid::{build_grid, build_grid_capped, Cell, EvalGrid, Tiling, DEFAULT_NODE_CAP};
pub use knn::{knn_distance, KnnIndex};
pub use packing::{covering_estimate, packing_estimate, region_nodes};
pub use threshold::{
    coverage_threshold, coverage_threshold_refined, covered_region, interior_threshold,
    interior_threshold_on_grid, interior_threshold_refined, knn_field, ThresholdEstimate,
};
