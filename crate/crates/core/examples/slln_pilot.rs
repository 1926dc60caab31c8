//! Calibration run for the SLLN band check of the acceptance suite.
//!
//! Repeats the square trace (k = 1, 100 replications, sizes 10³, 10⁴, 10⁵)
//! over independent base seeds and prints, per size, the mean and standard
//! deviation of the batch medians of `n π R² / ln n`.
//!
//! cargo run --release -p covlab --example slln_pilot -- [batches] > crates/core/tests/data/slln_pilot.json

use covlab::harness::{run_slln_trace, ExperimentConfig, Mode};
use covlab::ManifoldSpec;
use serde_json::json;

/// Base seeds of the pilot; the acceptance suite uses a seed outside this range.
const PILOT_SEED_START: u64 = 1_000;

fn main() -> covlab::Result<()> {
    let batches: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let sizes = vec![1_000, 10_000, 100_000];
    let mut medians = vec![Vec::new(); sizes.len()];
    for b in 0..batches {
        let mut cfg = ExperimentConfig::new(ManifoldSpec::UnitSquare { d: 2 }, Mode::SllnTrace, sizes.clone());
        cfg.replications = 100;
        cfg.seed = PILOT_SEED_START + b;
        let res = run_slln_trace(&cfg)?;
        for (i, s) in res.summaries.iter().enumerate() {
            medians[i].push(s.quantiles_lo.median);
        }
        eprintln!("batch {b}: {:?}", res.summaries.iter().map(|s| s.quantiles_lo.median).collect::<Vec<_>>());
    }
    let per_size: Vec<_> = sizes
        .iter()
        .zip(&medians)
        .map(|(&n, m)| {
            let mean = m.iter().sum::<f64>() / m.len() as f64;
            let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m.len() as f64 - 1.0).max(1.0);
            json!({ "size": n, "mean_median": mean, "sd_median": var.sqrt(), "medians": m })
        })
        .collect();
    let out = json!({
        "spec": { "family": "unit_square" },
        "k": 1,
        "replications": 100,
        "seeds": [PILOT_SEED_START, PILOT_SEED_START + batches - 1],
        "sizes": per_size,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
