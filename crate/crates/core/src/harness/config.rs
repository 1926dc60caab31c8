//! Experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Beta;
use crate::manifold::{ManifoldSpec, Metric, RegionSpec};
use crate::sampling::DensityConfig;

/// Smallest accepted sample size.
pub const MIN_SIZE: usize = 16;
/// Largest accepted sample size.
pub const MAX_SIZE: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    WeakBoundary,
    WeakInterior,
    SllnTrace,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Exactly `n` points.
    #[default]
    Binomial,
    /// Poisson(`t`) many points.
    Poisson,
}

/// Which threshold an SLLN trace follows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceThreshold {
    #[default]
    Coverage,
    Interior,
}

/// Number of neighbours as a function of the sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum KSchedule {
    Constant(usize),
    /// `k(n) = max(1, ⌈β ln n⌉)`.
    BetaLog(f64),
    /// `k(n) = ⌈n^p⌉`, `0 < p < 1`.
    Power(f64),
}

impl KSchedule {
    pub fn k(&self, n: f64) -> usize {
        match *self {
            KSchedule::Constant(k) => k,
            KSchedule::BetaLog(b) => ((b * n.ln()).ceil() as usize).max(1),
            KSchedule::Power(p) => (n.powf(p).ceil() as usize).max(1),
        }
    }

    /// Limit of `k(n)/ln n`.
    pub fn beta(&self) -> Beta<f64> {
        match *self {
            KSchedule::Constant(_) => Beta::Finite(0.0),
            KSchedule::BetaLog(b) => Beta::Finite(b),
            KSchedule::Power(_) => Beta::Infinite,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, KSchedule::Constant(_))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KSchedule::Constant(k) if k >= 1 => Ok(()),
            KSchedule::BetaLog(b) if b > 0.0 && b.is_finite() => Ok(()),
            KSchedule::Power(p) if p > 0.0 && p < 1.0 => Ok(()),
            other => Err(Error::Config(format!("invalid k schedule {other:?}"))),
        }
    }
}

impl Default for KSchedule {
    fn default() -> Self {
        KSchedule::Constant(1)
    }
}

fn default_reps() -> usize {
    1
}

/// One replicated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: ManifoldSpec,
    #[serde(default)]
    pub region: RegionSpec,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub metric: Metric,
    pub mode: Mode,
    #[serde(default)]
    pub sampling: Sampling,
    /// Values of `n` (binomial) or `t` (Poisson).
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub k: KSchedule,
    #[serde(default = "default_reps")]
    pub replications: usize,
    /// Target interval width of each threshold; chosen per size when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trace_threshold: TraceThreshold,
}

impl ExperimentConfig {
    pub fn new(spec: ManifoldSpec, mode: Mode, sizes: Vec<usize>) -> Self {
        ExperimentConfig {
            spec,
            region: RegionSpec::All,
            density: DensityConfig::Uniform,
            metric: Metric::Geodesic,
            mode,
            sampling: Sampling::Binomial,
            sizes,
            k: KSchedule::Constant(1),
            replications: 1,
            h: None,
            seed: 0,
            trace_threshold: TraceThreshold::Coverage,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.spec.validate_region(&self.region)?;
        self.k.validate()?;
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must not be empty".into()));
        }
        if let Some(&bad) = self.sizes.iter().find(|&&n| !(MIN_SIZE..=MAX_SIZE).contains(&n)) {
            return Err(Error::Config(format!("size {bad} outside {MIN_SIZE}..={MAX_SIZE}")));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("h must be positive, got {h}")));
            }
        }
        if self.spec.dim() < 2 {
            return Err(Error::Config("limit laws need dimension at least 2".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
