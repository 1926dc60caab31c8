use covlab::harness::{run, ExperimentConfig, KSchedule, Mode, Sampling, TraceThreshold};
use covlab::limits::hat_h;
use covlab::sampling::DensityConfig;
use covlab::{Error, ManifoldSpec};
use std::f64::consts::PI;

fn weak_disk(sizes: Vec<usize>, reps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ManifoldSpec::UnitDisk, Mode::WeakBoundary, sizes);
    cfg.replications = reps;
    cfg.seed = 11;
    cfg
}

#[test]
fn smallest_run_has_one_row() {
    let res = run(&weak_disk(vec![16], 1)).unwrap();
    assert_eq!(res.rows.len(), 1);
    let row = &res.rows[0];
    assert!(row.lo <= row.hi && row.hi - row.lo <= row.h * (1.0 + 1e-9));
    assert!(row.stat_lo <= row.stat_hi);
    assert_eq!(res.summary(16).unwrap().replications, 1);
}

#[test]
fn rows_are_ordered_and_reproducible() {
    let cfg = weak_disk(vec![100, 400], 5);
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    let keys: Vec<(usize, usize)> = a.rows.iter().map(|r| (r.size, r.rep)).collect();
    let want: Vec<(usize, usize)> = [100, 400].iter().flat_map(|&s| (0..5).map(move |r| (s, r))).collect();
    assert_eq!(keys, want);
    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(run(&other).unwrap().rows, a.rows);
}

#[test]
fn more_neighbours_raise_the_threshold() {
    let one = run(&weak_disk(vec![300], 8)).unwrap();
    let mut cfg = weak_disk(vec![300], 8);
    cfg.k = KSchedule::Constant(3);
    let three = run(&cfg).unwrap();
    for (a, b) in one.rows.iter().zip(&three.rows) {
        assert!(b.hi >= a.lo, "{a:?} {b:?}");
    }
}

#[test]
fn halving_h_keeps_the_true_value_bracketed() {
    let mut cfg = weak_disk(vec![200], 6);
    cfg.h = Some(1e-3);
    let coarse = run(&cfg).unwrap();
    cfg.h = Some(5e-4);
    let fine = run(&cfg).unwrap();
    for (a, b) in coarse.rows.iter().zip(&fine.rows) {
        assert!(a.lo <= b.hi && b.lo <= a.hi, "{a:?} {b:?}");
        assert!(b.hi - b.lo <= 5e-4 * (1.0 + 1e-9));
    }
}

#[test]
fn poisson_rows_are_produced() {
    let mut cfg = weak_disk(vec![500], 4);
    cfg.sampling = Sampling::Poisson;
    let res = run(&cfg).unwrap();
    assert_eq!(res.rows.len(), 4);
    assert!(res.summaries[0].ks_lo.is_some());
}

fn slln(spec: ManifoldSpec, k: KSchedule) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(spec, Mode::SllnTrace, vec![200, 400]);
    cfg.k = k;
    cfg.replications = 2;
    cfg
}

#[test]
fn trace_reference_values() {
    let disk = run(&slln(ManifoldSpec::UnitDisk, KSchedule::Power(0.5))).unwrap();
    for s in &disk.summaries {
        assert!((s.reference.unwrap() - 2.0 * PI).abs() < 1e-12);
    }
    let square = ManifoldSpec::UnitSquare { d: 2 };
    let constant = run(&slln(square, KSchedule::Constant(2))).unwrap();
    assert!((constant.summaries[0].reference.unwrap() - 1.0).abs() < 1e-12);
    let log = run(&slln(square, KSchedule::BetaLog(1.0))).unwrap();
    let want = hat_h(1.0f64, 1.0).unwrap().max(2.0 * hat_h(1.0f64, 0.5).unwrap());
    assert!((log.summaries[0].reference.unwrap() - want).abs() < 1e-12);
    let mut interior = slln(square, KSchedule::BetaLog(1.0));
    interior.trace_threshold = TraceThreshold::Interior;
    let res = run(&interior).unwrap();
    assert!((res.summaries[0].reference.unwrap() - hat_h(1.0f64, 1.0).unwrap()).abs() < 1e-12);
}

#[test]
fn trace_rejects_bad_sizes() {
    let mut cfg = slln(ManifoldSpec::UnitDisk, KSchedule::Constant(1));
    cfg.sizes = vec![400, 200];
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
    cfg.sizes = vec![16];
    cfg.k = KSchedule::Constant(16);
    assert!(run(&cfg).is_err());
}

#[test]
fn weak_modes_refuse_outside_their_assumptions() {
    let mut cfg = weak_disk(vec![100], 1);
    cfg.k = KSchedule::BetaLog(1.0);
    assert!(run(&cfg).unwrap_err().is_refusal());
    let mut cfg = weak_disk(vec![100], 1);
    cfg.density = DensityConfig::Linear { slope: 0.5 };
    assert!(run(&cfg).unwrap_err().is_refusal());
    let mut cfg = ExperimentConfig::new(ManifoldSpec::UnitSphere, Mode::WeakBoundary, vec![100]);
    cfg.k = KSchedule::Constant(2);
    assert!(run(&cfg).unwrap_err().is_refusal());
}
