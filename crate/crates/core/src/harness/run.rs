//! Replicated experiments.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, KSchedule, Mode, Sampling, TraceThreshold};
use super::stats::{ks_distance, quantile_sorted};
use crate::coverage::{coverage_threshold_refined, interior_threshold_refined, ThresholdEstimate};
use crate::error::{Error, Result};
use crate::limits::{
    interior_limit_cdf, interior_transform, slln_limit, theta, weak_limit_cdf, weak_transform, Beta, LimitLaw,
    Regime, SllnMode,
};
use crate::sampling::{density_sample, derive_seed, poisson_sample, DensitySpec, PointCloud};

/// Target change of the centred statistic caused by one grid spacing.
const STAT_RESOLUTION: f64 = 0.05;
/// Target relative resolution of SLLN ratios.
const RATIO_RESOLUTION: f64 = 0.01;

/// One replication at one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub size: usize,
    pub rep: usize,
    pub k: usize,
    pub metric: String,
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
    pub stat_lo: f64,
    pub stat_hi: f64,
}

/// Parameters of the limit law the experiment is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawParams {
    pub d: u32,
    pub f0: f64,
    pub f1: Option<f64>,
    pub v_b: f64,
    pub sv_b: f64,
    pub beta: Beta<f64>,
}

/// Point of an empirical CDF next to the theoretical value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfNode {
    pub x: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Quantiles {
    fn of(values: &[f64]) -> Quantiles {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Quantiles {
            q25: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q75: quantile_sorted(&v, 0.75),
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

/// Per-size summary, computed from both interval ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub size: usize,
    pub k: usize,
    pub replications: usize,
    pub quantiles_lo: Quantiles,
    pub quantiles_hi: Quantiles,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_hi: Option<f64>,
    /// Strong-law limit of the ratio, for traces.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cdf_lo: Vec<CdfNode>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cdf_hi: Vec<CdfNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub law: LawParams,
    pub rows: Vec<Row>,
    pub summaries: Vec<SizeSummary>,
    /// Not part of the deterministic outputs.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl ExperimentResult {
    pub fn summary(&self, size: usize) -> Option<&SizeSummary> {
        self.summaries.iter().find(|s| s.size == size)
    }

    pub fn rows_for(&self, size: usize) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.size == size)
    }
}

/// Dispatches on `config.mode`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    match config.mode {
        Mode::WeakBoundary => run_weak_boundary(config),
        Mode::WeakInterior => run_weak_interior(config),
        Mode::SllnTrace => run_slln_trace(config),
    }
}

struct Prepared {
    dens: DensitySpec,
    law: LawParams,
}

fn prepare(config: &ExperimentConfig, expected: Mode) -> Result<Prepared> {
    config.validate()?;
    if config.mode != expected {
        return Err(Error::Config(format!("config mode {:?} does not match {:?}", config.mode, expected)));
    }
    let dens = config.density.build(&config.spec, &config.region)?;
    let (f0, f1) = dens.infima(&config.spec, &config.region)?;
    let m = config.spec.region_measures(&config.region)?;
    let law = LawParams {
        d: config.spec.dim() as u32,
        f0,
        f1,
        v_b: m.volume,
        sv_b: m.boundary,
        beta: config.k.beta(),
    };
    Ok(Prepared { dens, law })
}

fn sample(config: &ExperimentConfig, dens: &DensitySpec, size: usize, rep: usize) -> Result<PointCloud> {
    let seed = derive_seed(config.seed, &[size as u64, rep as u64]);
    match config.sampling {
        Sampling::Binomial => density_sample(&config.spec, dens, size, seed),
        Sampling::Poisson => poisson_sample(&config.spec, dens, size as f64, seed),
    }
}

/// Typical threshold predicted by the strong law.
fn predicted_radius(law: &LawParams, n: f64, k: usize, sched: &KSchedule, mode: SllnMode) -> Result<f64> {
    let limit = slln_limit(law.d, sched.beta(), law.f0, law.f1, mode)?;
    let denom = match sched {
        KSchedule::Power(_) => k as f64,
        _ => n.ln().max(k as f64),
    };
    Ok((limit * denom / (n * theta::<f64>(law.d))).powf(1.0 / law.d as f64))
}

/// Spacing whose image under the centring is about [`STAT_RESOLUTION`].
fn auto_h(config: &ExperimentConfig, law: &LawParams, n: f64, k: usize) -> Result<f64> {
    if let Some(h) = config.h {
        return Ok(h);
    }
    let d = law.d as f64;
    let (mode, scale) = match config.mode {
        Mode::WeakBoundary => (SllnMode::Boundary, 0.5),
        Mode::WeakInterior => (SllnMode::Interior, 1.0),
        Mode::SllnTrace => {
            let mode = match config.trace_threshold {
                TraceThreshold::Coverage => SllnMode::Boundary,
                TraceThreshold::Interior => SllnMode::Interior,
            };
            let r = predicted_radius(law, n, k, &config.k, mode)?;
            return Ok(RATIO_RESOLUTION * r / d);
        }
    };
    let r = predicted_radius(law, n, k, &config.k, mode)?;
    let slope = scale * n * theta::<f64>(law.d) * law.f0 * d * r.powf(d - 1.0);
    Ok(STAT_RESOLUTION / slope)
}

fn replicate<F>(config: &ExperimentConfig, prep: &Prepared, stat: F) -> Result<Vec<Row>>
where
    F: Fn(&PointCloud, usize, f64, f64) -> Result<(ThresholdEstimate, f64, f64)> + Sync,
{
    let jobs: Vec<(usize, usize)> =
        config.sizes.iter().flat_map(|&s| (0..config.replications).map(move |r| (s, r))).collect();
    jobs.par_iter()
        .map(|&(size, rep)| {
            let n = size as f64;
            let k = config.k.k(n);
            let h = auto_h(config, &prep.law, n, k)?;
            let cloud = sample(config, &prep.dens, size, rep)?;
            let (est, stat_lo, stat_hi) = stat(&cloud, k, n, h)?;
            Ok(Row {
                size,
                rep,
                k,
                metric: config.metric.label().to_string(),
                lo: est.lo,
                hi: est.hi,
                h: est.h,
                stat_lo,
                stat_hi,
            })
        })
        .collect()
}

fn cdf_nodes(values: &[f64], cdf: &impl Fn(f64) -> Result<f64>) -> Result<Vec<CdfNode>> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| Ok(CdfNode { x, empirical: (i + 1) as f64 / n, theoretical: cdf(x)? }))
        .collect()
}

fn summarize<C>(config: &ExperimentConfig, rows: &[Row], cdf_for: C) -> Result<Vec<SizeSummary>>
where
    C: Fn(usize) -> Result<Option<Box<dyn Fn(f64) -> Result<f64>>>>,
{
    config
        .sizes
        .iter()
        .map(|&size| {
            let lo: Vec<f64> = rows.iter().filter(|r| r.size == size).map(|r| r.stat_lo).collect();
            let hi: Vec<f64> = rows.iter().filter(|r| r.size == size).map(|r| r.stat_hi).collect();
            let k = config.k.k(size as f64);
            let mut s = SizeSummary {
                size,
                k,
                replications: lo.len(),
                quantiles_lo: Quantiles::of(&lo),
                quantiles_hi: Quantiles::of(&hi),
                ks_lo: None,
                ks_hi: None,
                reference: None,
                cdf_lo: Vec::new(),
                cdf_hi: Vec::new(),
            };
            if let Some(cdf) = cdf_for(k)? {
                // Evaluate once so that errors surface before the KS fold.
                s.cdf_lo = cdf_nodes(&lo, &cdf)?;
                s.cdf_hi = cdf_nodes(&hi, &cdf)?;
                s.ks_lo = Some(ks_distance(&lo, |x| cdf(x).unwrap_or(f64::NAN))?);
                s.ks_hi = Some(ks_distance(&hi, |x| cdf(x).unwrap_or(f64::NAN))?);
            }
            Ok(s)
        })
        .collect()
}

fn finish(config: &ExperimentConfig, law: LawParams, rows: Vec<Row>, summaries: Vec<SizeSummary>, t0: Instant) -> ExperimentResult {
    ExperimentResult { config: config.clone(), law, rows, summaries, wall_clock_secs: t0.elapsed().as_secs_f64() }
}

fn constant_k(config: &ExperimentConfig) -> Result<u32> {
    match config.k {
        KSchedule::Constant(k) => Ok(k as u32),
        other => Err(Error::Refused(format!("weak limit laws need a constant k, got {other:?}"))),
    }
}

/// Boundary-regime weak law: `weak_transform` of the coverage threshold
/// against `weak_limit_cdf`.
pub fn run_weak_boundary(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let t0 = Instant::now();
    let prep = prepare(config, Mode::WeakBoundary)?;
    if !prep.dens.is_uniform() {
        return Err(Error::Refused("the boundary-regime weak law assumes a uniform density".into()));
    }
    let k = constant_k(config)?;
    let law = prep.law;
    if law.sv_b == 0.0 && (law.d, k) != (2, 1) {
        return Err(Error::Refused(format!(
            "B has no boundary measure and (d, k) = ({}, {k}): the boundary-regime law is degenerate",
            law.d
        )));
    }
    let limit = LimitLaw { d: law.d, k, f0: law.f0, f1: law.f1, v_b: law.v_b, sv_b: law.sv_b, regime: Regime::WeakBoundary };
    weak_limit_cdf(&limit, 0.0)?;
    let rows = replicate(config, &prep, |cloud, k, n, h| {
        let est = coverage_threshold_refined(cloud, &config.region, k, config.metric, h)?;
        let t = |r| weak_transform(r, n, law.d, k as u32, law.f0);
        Ok((est, t(est.lo)?, t(est.hi)?))
    })?;
    let summaries = summarize(config, &rows, |_| {
        Ok(Some(Box::new(move |z| weak_limit_cdf(&limit, z)) as Box<dyn Fn(f64) -> Result<f64>>))
    })?;
    Ok(finish(config, law, rows, summaries, t0))
}

/// Interior-regime weak law: `interior_transform` of the interior threshold
/// (or of the coverage threshold when `B` stays away from the boundary)
/// against `interior_limit_cdf`.
pub fn run_weak_interior(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let t0 = Instant::now();
    let prep = prepare(config, Mode::WeakInterior)?;
    let k = constant_k(config)?;
    let law = prep.law;
    let limit = LimitLaw { d: law.d, k, f0: law.f0, f1: None, v_b: law.v_b, sv_b: 0.0, regime: Regime::WeakInterior };
    interior_limit_cdf(&limit, 0.0)?;
    let touches = config.spec.region_touches_boundary(&config.region)?;
    let rows = replicate(config, &prep, |cloud, k, n, h| {
        let est = if touches {
            interior_threshold_refined(cloud, &config.region, k, config.metric, h)?
        } else {
            coverage_threshold_refined(cloud, &config.region, k, config.metric, h)?
        };
        let t = |r| interior_transform(r, n, law.d, k as u32, law.f0);
        Ok((est, t(est.lo)?, t(est.hi)?))
    })?;
    let summaries = summarize(config, &rows, |_| {
        Ok(Some(Box::new(move |b| interior_limit_cdf(&limit, b)) as Box<dyn Fn(f64) -> Result<f64>>))
    })?;
    Ok(finish(config, law, rows, summaries, t0))
}

/// Strong-law trace of `n θ_d R^d / k(n)` (power schedules) or
/// `n θ_d R^d / ln n` (otherwise), next to its almost-sure limit.
pub fn run_slln_trace(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let t0 = Instant::now();
    let prep = prepare(config, Mode::SllnTrace)?;
    if config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("trace sizes must be strictly increasing".into()));
    }
    for &n in &config.sizes {
        let k = config.k.k(n as f64);
        if k >= n {
            return Err(Error::Config(format!("k(n) = {k} is not below n = {n}")));
        }
    }
    let law = prep.law;
    let mode = match config.trace_threshold {
        TraceThreshold::Coverage => SllnMode::Boundary,
        TraceThreshold::Interior => SllnMode::Interior,
    };
    let reference = slln_limit(law.d, config.k.beta(), law.f0, law.f1, mode)?;
    let rows = replicate(config, &prep, |cloud, k, n, h| {
        let est = match config.trace_threshold {
            TraceThreshold::Coverage => coverage_threshold_refined(cloud, &config.region, k, config.metric, h)?,
            TraceThreshold::Interior => interior_threshold_refined(cloud, &config.region, k, config.metric, h)?,
        };
        let denom = match config.k {
            KSchedule::Power(_) => k as f64,
            _ => n.ln(),
        };
        let ratio = |r: f64| n * theta::<f64>(law.d) * r.powi(law.d as i32) / denom;
        Ok((est, ratio(est.lo), ratio(est.hi)))
    })?;
    let mut summaries = summarize(config, &rows, |_| Ok(None))?;
    for s in &mut summaries {
        s.reference = Some(reference);
    }
    Ok(finish(config, law, rows, summaries, t0))
}
