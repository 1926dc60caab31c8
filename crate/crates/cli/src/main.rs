use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covlab::coverage::{build_grid, coverage_threshold, coverage_threshold_refined, interior_threshold_refined};
use covlab::harness::{self, write_outputs, ExperimentConfig, Mode};
use covlab::limits::{c_d, c_dk, theta};
use covlab::sampling::read_cloud;
use covlab::selftest::run_selftest;
use covlab::{Error, ManifoldSpec, Metric, RegionSpec};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "covlab", version, about = "k-coverage threshold experiments on compact manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print θ_d, c_d and c_{d,k} as JSON.
    Constants {
        /// Dimensions, e.g. `2..5` (inclusive) or `3`.
        #[arg(long, default_value = "2..5")]
        d: String,
        /// Neighbour counts, e.g. `1..4`.
        #[arg(long, default_value = "1..4")]
        k: String,
    },
    /// Certified coverage threshold of a cloud stored as CSV.
    Cover(CoverArgs),
    /// Boundary-regime weak law experiment.
    Weak(RunArgs),
    /// Interior-regime weak law experiment.
    Interior(RunArgs),
    /// Strong-law trace.
    Slln(RunArgs),
    /// Quick invariant checks.
    Selftest,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ThresholdKind {
    Coverage,
    Interior,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long)]
    cloud: PathBuf,
    /// disk, square, square:D, ball, sphere, cap:ALPHA, a JSON object or a JSON file.
    #[arg(long)]
    spec: String,
    /// Target region as JSON; defaults to the whole manifold.
    #[arg(long)]
    region: Option<String>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value = "geodesic")]
    metric: String,
    /// Refine only where the maximum can lie instead of evaluating a full grid.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, value_enum, default_value_t = ThresholdKind::Coverage)]
    threshold: ThresholdKind,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sizes, e.g. `1000,10000`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    metric: Option<String>,
}

fn parse_range(s: &str) -> Result<Vec<u32>, Error> {
    let bad = || Error::Config(format!("bad range `{s}`, expected `a..b` or `a`"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn parse_spec(s: &str) -> Result<ManifoldSpec, Error> {
    let spec = match s {
        "disk" => ManifoldSpec::UnitDisk,
        "square" => ManifoldSpec::UnitSquare { d: 2 },
        "ball" => ManifoldSpec::SolidBall,
        "sphere" => ManifoldSpec::UnitSphere,
        _ => {
            if let Some(d) = s.strip_prefix("square:") {
                let d = d.parse().map_err(|_| Error::Config(format!("bad dimension in `{s}`")))?;
                ManifoldSpec::UnitSquare { d }
            } else if let Some(a) = s.strip_prefix("cap:") {
                let alpha = a.parse().map_err(|_| Error::Config(format!("bad angle in `{s}`")))?;
                ManifoldSpec::SphericalCap { alpha }
            } else {
                serde_json::from_str(&json_text(s)?)?
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Inline JSON, or the contents of a file.
fn json_text(s: &str) -> Result<String, Error> {
    if s.trim_start().starts_with('{') {
        Ok(s.to_string())
    } else if Path::new(s).is_file() {
        Ok(std::fs::read_to_string(s)?)
    } else {
        Err(Error::Config(format!("`{s}` is neither a known name, JSON, nor a file")))
    }
}

fn constants(d: &str, k: &str) -> Result<(), Error> {
    let (ds, ks) = (parse_range(d)?, parse_range(k)?);
    if ds.iter().any(|&d| d < 2) || ks.iter().any(|&k| k < 1) {
        return Err(Error::Config("need d >= 2 and k >= 1".into()));
    }
    let mut entries = Vec::new();
    for &d in &ds {
        for &k in &ks {
            entries.push(json!({
                "d": d,
                "k": k,
                "theta": theta::<f64>(d),
                "c_d": c_d::<f64>(d),
                "c_dk": c_dk::<f64>(d, k),
            }));
        }
    }
    println!("{}", serde_json::to_string_pretty(&json!({ "entries": entries }))?);
    Ok(())
}

fn cover(a: &CoverArgs) -> Result<(), Error> {
    let spec = parse_spec(&a.spec)?;
    let region: RegionSpec = match &a.region {
        Some(r) => serde_json::from_str(&json_text(r)?)?,
        None => RegionSpec::All,
    };
    let metric: Metric = a.metric.parse()?;
    let cloud = read_cloud(&spec, &a.cloud)?;
    let est = match (a.threshold, a.adaptive) {
        (ThresholdKind::Coverage, false) => coverage_threshold(&cloud, &build_grid(&spec, &region, a.h)?, a.k, metric)?,
        (ThresholdKind::Coverage, true) => coverage_threshold_refined(&cloud, &region, a.k, metric, a.h)?,
        (ThresholdKind::Interior, _) => interior_threshold_refined(&cloud, &region, a.k, metric, a.h)?,
    };
    println!("{}", serde_json::to_string(&est)?);
    Ok(())
}

fn experiment(a: &RunArgs, mode: Mode) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.mode = mode;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = a.reps {
        cfg.replications = reps;
    }
    if let Some(sizes) = &a.sizes {
        cfg.sizes = sizes.clone();
    }
    if let Some(m) = &a.metric {
        cfg.metric = m.parse()?;
    }
    cfg.validate()?;
    let result = harness::run(&cfg)?;
    let files = write_outputs(&result, &a.out)?;
    for s in &result.summaries {
        let line = json!({
            "size": s.size,
            "k": s.k,
            "median_lo": s.quantiles_lo.median,
            "median_hi": s.quantiles_hi.median,
            "ks_lo": s.ks_lo,
            "ks_hi": s.ks_hi,
            "reference": s.reference,
        });
        println!("{line}");
    }
    eprintln!("wrote {} and {}", files.rows.display(), files.summary.display());
    Ok(())
}

fn selftest() -> Result<bool, Error> {
    let checks = run_selftest();
    let passed = checks.iter().filter(|c| c.passed).count();
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{passed} passed, {} failed", checks.len() - passed);
    Ok(passed == checks.len())
}

fn configure_threads() {
    if let Some(n) = std::env::var("COVLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Constants { d, k } => constants(d, k).map(|_| true),
        Command::Cover(a) => cover(a).map(|_| true),
        Command::Weak(a) => experiment(a, Mode::WeakBoundary).map(|_| true),
        Command::Interior(a) => experiment(a, Mode::WeakInterior).map(|_| true),
        Command::Slln(a) => experiment(a, Mode::SllnTrace).map(|_| true),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_refusal() { 2 } else { 1 })
        }
    }
}
