//! Replicated Monte Carlo experiments and their output files.

pub mod config;
pub mod io;
pub mod run;
pub mod stats;

pub use config::{ExperimentConfig, KSchedule, Mode, Sampling, TraceThreshold};
pub use io::{summary_json, write_outputs, write_rows, OutputFiles};
pub use run::{
    run, run_slln_trace, run_weak_boundary, run_weak_interior, CdfNode, ExperimentResult, LawParams, Quantiles,
    Row, SizeSummary,
};
pub use stats::{ks_distance, ks_two_sample, median, quantile_sorted};
