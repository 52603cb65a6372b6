use pmvb_core::bnb::SolveOptions;
use pmvb_core::clock::{FrozenClock, TickClock};
use pmvb_core::instgen::{gen_mkp_with, MkpCapacity};
use pmvb_core::predict::{Prediction, PredictionSource};
use pmvb_core::{brute_force, clock::StdClock};
use pmvb_lab::bench::{report_emit, rows_to_csv, run_benchmark, run_benchmark_on, BenchConfig, BenchError, BenchMode, BenchRow, BenchSummary, PredictorSpec};
use pmvb_lab::format;

fn family(count: usize, seed: u64) -> pmvb_core::instgen::InstanceFamily {
    gen_mkp_with(4, 14, count, seed, MkpCapacity::Tightness(0.3)).unwrap()
}

#[test]
fn plain_mode_is_a_self_comparison() {
    let fam = family(8, 2);
    let mut cfg = BenchConfig::new("mem", PredictorSpec::Logistic);
    cfg.mode = BenchMode::Plain;
    cfg.test = 8;
    let r = run_benchmark_on(&cfg, &fam, &StdClock::new()).unwrap();
    assert_eq!(r.summary.speedup, Some(1.0));
    assert_eq!(r.summary.pairs, 8);
    for row in &r.rows {
        assert_eq!(row.t_pmvb, row.t_original_to_target);
        assert_eq!(row.f_pmvb, row.objective_plain);
    }
}

#[test]
fn split_errors() {
    let fam = family(4, 3);
    let mut cfg = BenchConfig::new("mem", PredictorSpec::LpRootIpm);
    cfg.train = 2;
    assert!(matches!(run_benchmark_on(&cfg, &fam, &FrozenClock), Err(BenchError::EmptyTestSplit)));
    cfg.test = 3;
    assert!(matches!(run_benchmark_on(&cfg, &fam, &FrozenClock), Err(BenchError::FamilyTooSmall { have: 4, need: 5 })));
    cfg.test = 1;
    cfg.tau = Some(0.5);
    assert!(matches!(run_benchmark_on(&cfg, &fam, &FrozenClock), Err(BenchError::Config(_))));
    assert!(PredictorSpec::parse("svm").is_err());
    assert_eq!(PredictorSpec::parse("file:/x").unwrap(), PredictorSpec::File("/x".into()));
}

#[test]
fn exact_predictions_reach_the_target_first() {
    let fam = family(30, 5);
    let dir = tempfile::tempdir().unwrap();
    for inst in &fam.instances {
        let y = brute_force(inst, &[]).unwrap().binary_values(inst.num_binary);
        let (p, _) = Prediction::clamped(y.iter().map(|&b| b as u8 as f64).collect(), PredictionSource::External);
        format::write_prediction(&dir.path().join(format!("{}.json", inst.name)), &p).unwrap();
    }
    let mut cfg = BenchConfig::new("mem", PredictorSpec::File(dir.path().to_path_buf()));
    cfg.tau = Some(1.0);
    cfg.sigma = Some(0.0);
    cfg.test = 30;
    cfg.solve = SolveOptions { time_limit: 1e12, ..SolveOptions::exact() };
    let r = run_benchmark_on(&cfg, &fam, &TickClock::new()).unwrap();
    let faster = r.rows.iter().filter(|row| row.t_pmvb.unwrap() <= row.t_original_to_target.unwrap()).count();
    assert!(faster * 10 >= r.rows.len() * 9, "{faster} of {}", r.rows.len());
    for row in &r.rows {
        assert!((row.f_pmvb.unwrap() - row.objective_plain.unwrap()).abs() <= 1e-9);
    }
    assert!(r.summary.speedup.unwrap() >= 1.0);
}

#[test]
fn exact_mode_matches_the_plain_optimum() {
    let fam = family(40, 8);
    let mut cfg = BenchConfig::new("mem", PredictorSpec::Logistic);
    cfg.mode = BenchMode::Exact;
    cfg.train = 30;
    cfg.test = 10;
    cfg.tightened = true;
    let r = run_benchmark_on(&cfg, &fam, &FrozenClock).unwrap();
    assert!(r.summary.calibration.is_some());
    for row in &r.rows {
        assert_eq!(row.status_overall.as_deref(), Some("optimal"));
        assert!((row.objective_overall.unwrap() - row.objective_plain.unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn runs_from_a_family_directory() {
    let fam = family(12, 4);
    let dir = tempfile::tempdir().unwrap();
    format::write_family(dir.path(), &fam).unwrap();
    let mut cfg = BenchConfig::new(dir.path(), PredictorSpec::LpRootSimplex);
    cfg.train = 6;
    cfg.test = 6;
    let r = run_benchmark(&cfg).unwrap();
    assert_eq!(r.rows.len(), 6);
    assert_eq!(r.rows[0].index, 6);
    assert!(r.summary.tau.is_some());
}

#[test]
fn emitted_report_is_stable_and_parses() {
    let fam = family(10, 6);
    let mut cfg = BenchConfig::new("mem", PredictorSpec::LpRootIpm);
    cfg.tau = Some(0.9);
    cfg.tightened = true;
    cfg.test = 10;
    let r = run_benchmark_on(&cfg, &fam, &FrozenClock).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv_a, json_a) = report_emit(&r, &dir.path().join("a")).unwrap();
    let (csv_b, json_b) = report_emit(&r, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(&csv_a).unwrap(), std::fs::read(&csv_b).unwrap());
    assert_eq!(std::fs::read(&json_a).unwrap(), std::fs::read(&json_b).unwrap());

    let text = std::fs::read_to_string(&json_a).unwrap();
    assert!(text.contains("\"speedup\""));
    let back: BenchSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r.summary);

    let csv = std::fs::read_to_string(&csv_a).unwrap();
    assert_eq!(csv.lines().next().unwrap(), BenchRow::COLUMNS.join(","));
    assert_eq!(csv.lines().count(), 11);
    let mut rd = csv::Reader::from_path(&csv_a).unwrap();
    let rows: Vec<BenchRow> = rd.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[3].instance, r.rows[3].instance);
    assert_eq!(rows[3].f_pmvb, r.rows[3].f_pmvb);
}

#[test]
fn empty_rows_give_a_header_only_csv() {
    let text = String::from_utf8(rows_to_csv(&[]).unwrap()).unwrap();
    assert_eq!(text, format!("{}\n", BenchRow::COLUMNS.join(",")));
}

#[test]
fn column_list_matches_the_row_fields() {
    let row = BenchRow {
        index: 0,
        instance: "x".into(),
        upper_size: 0,
        lower_size: 0,
        status_pmvb: String::new(),
        f_pmvb: None,
        t_pmvb: None,
        nodes_pmvb: 0,
        status_overall: None,
        objective_overall: None,
        status_plain: String::new(),
        objective_plain: None,
        t_original_to_target: None,
        nodes_plain: 0,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(&row).unwrap();
    let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
    assert_eq!(text.lines().next().unwrap(), BenchRow::COLUMNS.join(","));
}
