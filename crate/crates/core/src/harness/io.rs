//! Result files: `rows.csv`, `summary.json`, `config.json` and `timing.json`.
//!
//! The first three are byte-identical across runs of the same config.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{ExperimentResult, Row};
use crate::error::Result;

pub const ROWS_HEADER: [&str; 9] = ["size", "rep", "k", "metric", "lo", "hi", "h", "stat_lo", "stat_hi"];

pub fn write_rows<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROWS_HEADER)?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.rep.to_string(),
            r.k.to_string(),
            r.metric.clone(),
            r.lo.to_string(),
            r.hi.to_string(),
            r.h.to_string(),
            r.stat_lo.to_string(),
            r.stat_hi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a super::config::ExperimentConfig,
    law: &'a super::run::LawParams,
    sizes: &'a [super::run::SizeSummary],
}

pub fn summary_json(result: &ExperimentResult) -> Result<String> {
    let s = Summary { config: &result.config, law: &result.law, sizes: &result.summaries };
    Ok(serde_json::to_string_pretty(&s)? + "\n")
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputFiles {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
    pub timing: PathBuf,
}

pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let files = OutputFiles {
        rows: dir.join("rows.csv"),
        summary: dir.join("summary.json"),
        config: dir.join("config.json"),
        timing: dir.join("timing.json"),
    };
    write_rows(&result.rows, fs::File::create(&files.rows)?)?;
    fs::write(&files.summary, summary_json(result)?)?;
    fs::write(&files.config, result.config.to_json()? + "\n")?;
    let timing = serde_json::json!({ "wall_clock_secs": result.wall_clock_secs });
    fs::write(&files.timing, serde_json::to_string_pretty(&timing)? + "\n")?;
    Ok(files)
}
