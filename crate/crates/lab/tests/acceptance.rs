//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pmvb_core::bnb::{brute_force, SolveOptions};
use pmvb_core::clock::StdClock;
use pmvb_core::instgen::{gen_ca, gen_mkp_with, gen_scp, InstanceFamily, MkpCapacity};
use pmvb_core::lp::LpBackend;
use pmvb_core::model::{MipInstance, SolutionStatus};
use pmvb_core::pmvb::{
    build_hyperplanes, build_hyperplanes_with_margin, default_tau_grid, make_partition, pmvb_solve, Calibration, HyperplaneMode, Margin, PmvbConfig, PmvbMode,
};
use pmvb_core::predict::{logistic_loss_grad, logistic_train, lp_root_predict, Sample, TrainOptions};
use pmvb_lab::bench::{run_benchmark_on, BenchConfig, BenchMode, PredictorSpec};
use pmvb_lab::format;
use pmvb_lab::metrics::{sgm, SGM_SHIFT};
use pmvb_lab::validate::{binomial_upper_tail, verify_lemma, verify_theorem3, Lemma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn opt_value(inst: &MipInstance) -> f64 {
    brute_force(inst, &[]).unwrap().objective
}

fn labels_of(inst: &MipInstance) -> Vec<bool> {
    brute_force(inst, &[]).unwrap().binary_values(inst.num_binary)
}

/// Trains on `train`, calibrates on the same instances, returns the
/// configuration and the model.
fn logistic_config(train: &[MipInstance]) -> (pmvb_core::predict::LogisticModel, PmvbConfig) {
    let samples: Vec<Sample> = train.iter().map(|i| Sample { features: i.param_tag.clone(), labels: labels_of(i) }).collect();
    let model = logistic_train(&samples, &TrainOptions::default()).unwrap();
    let pairs: Vec<(Vec<f64>, Vec<bool>)> = train.iter().zip(&samples).map(|(i, s)| (model.predict(&i.param_tag).unwrap().probabilities, s.labels.clone())).collect();
    let cfg = match Calibration::fit(&pairs, &default_tau_grid(), 0.5) {
        Ok(cal) => PmvbConfig::from_calibration(&cal, HyperplaneMode::Plain),
        // no threshold is supported by the data: fall back to a fixed one
        Err(_) => PmvbConfig { tau: 0.9, margin: Margin::Chebyshev { sigma: 0.05, delta: 0.5 }, hyperplanes: HyperplaneMode::Plain },
    };
    (model, cfg)
}

fn criterion_1() -> Outcome {
    let families: Vec<(InstanceFamily, usize)> = vec![
        (gen_mkp_with(3, 12, 37, 101, MkpCapacity::PerItem).unwrap(), 12),
        (gen_mkp_with(3, 12, 38, 102, MkpCapacity::Tightness(0.25)).unwrap(), 13),
        (gen_mkp_with(5, 16, 37, 103, MkpCapacity::PerItem).unwrap(), 12),
        (gen_mkp_with(5, 16, 38, 104, MkpCapacity::Tightness(0.25)).unwrap(), 13),
        // 20 binaries over 30 cover rows
        (gen_scp(30, 20, 0.15, 50, 105).unwrap(), 25),
        (gen_ca(10, 24, 50, 106).unwrap(), 25),
    ];
    let dir = tempfile::tempdir().unwrap();
    let opts = SolveOptions { time_limit: 60.0, ..SolveOptions::exact() };
    let mut checked = 0usize;
    let mut instances = 0usize;
    let mut failures = Vec::new();
    for (fam, test) in &families {
        let (train, rest) = fam.instances.split_at(25);
        let (model, logistic_cfg) = logistic_config(train);
        let mut rng = ChaCha8Rng::seed_from_u64(fam.seed);
        for inst in &rest[..*test] {
            instances += 1;
            let truth = opt_value(inst);
            // an external prediction file with arbitrary probabilities
            let path = dir.path().join(format!("{}.json", inst.name));
            let external: Vec<f64> = (0..inst.num_binary).map(|_| rng.random::<f64>()).collect();
            let (pred, _) = pmvb_core::predict::Prediction::clamped(external, pmvb_core::predict::PredictionSource::External);
            format::write_prediction(&path, &pred).unwrap();
            let sources: Vec<(&str, Vec<f64>, PmvbConfig)> = vec![
                ("logistic", model.predict(&inst.param_tag).unwrap().probabilities, logistic_cfg),
                ("lp-root-simplex", lp_root_predict(inst, LpBackend::Simplex).unwrap().probabilities, PmvbConfig::data_free(0.0)),
                ("lp-root-ipm", lp_root_predict(inst, LpBackend::Ipm).unwrap().probabilities, PmvbConfig::data_free(0.0)),
                (
                    "external",
                    format::load_prediction(&path, inst.num_binary).unwrap().probabilities,
                    PmvbConfig { tau: 0.7, margin: Margin::Chebyshev { sigma: 0.05, delta: 0.5 }, hyperplanes: HyperplaneMode::Plain },
                ),
            ];
            for (name, p, cfg) in sources {
                checked += 1;
                let r = pmvb_solve(inst, &p, &cfg, &opts, PmvbMode::Exact).unwrap();
                let ok = r.overall.status == SolutionStatus::Optimal && r.overall.objective().is_some_and(|v| (v - truth).abs() <= 1e-9);
                if !ok {
                    failures.push(format!("{} [{name}]: {:?} {:?} vs {truth}", inst.name, r.overall.status, r.overall.objective()));
                }
            }
        }
    }
    let pass = failures.is_empty() && instances == 100;
    outcome(pass, format!("{instances} instances x 4 sources, {checked} exact solves, {} mismatches {:?}", failures.len(), failures.iter().take(3).collect::<Vec<_>>()))
}

fn criterion_2() -> Outcome {
    let pair = build_hyperplanes(&[1.0; 100], 0.9, 0.025, 0.05, HyperplaneMode::Plain).unwrap();
    let upper = pair.upper.unwrap();
    let pass = upper.size() == 100 && upper.rhs_int == 78;
    outcome(pass, format!("zeta = {:.4}, integer rhs = {}", upper.zeta, upper.rhs_int))
}

fn criterion_3() -> Outcome {
    let a = sgm(&[0.0], SGM_SHIFT).unwrap();
    let b = sgm(&[10.0, 90.0], SGM_SHIFT).unwrap();
    let equal: Vec<(f64, f64)> = [0.0, 1.0, 100.0].iter().map(|&t| (t, sgm(&[t, t], SGM_SHIFT).unwrap())).collect();
    let pass = a == 0.0 && (b - 34.7213).abs() <= 1e-3 && equal.iter().all(|(t, v)| t == v);
    outcome(pass, format!("sgm([0]) = {a}, sgm([10,90]) = {b:.6}, sgm([t,t]) = {equal:?}"))
}

fn criterion_4() -> Outcome {
    let trials = 100_000;
    let mut parts = Vec::new();
    let mut pass = true;
    let oracle = binomial_upper_tail(100, 0.5, 60);
    pass &= (oracle - 0.0284).abs() <= 5e-5;
    for lemma in [Lemma::Hoeffding, Lemma::Bernstein, Lemma::Chebyshev, Lemma::UniformBins] {
        let r = verify_lemma(lemma, lemma.default_params(), trials, 2024).unwrap();
        pass &= r.pass && r.within_bound;
        if lemma == Lemma::Hoeffding {
            pass &= (r.bound - 0.1353).abs() <= 1e-4 && r.matches_exact == Some(true) && r.exact.is_some_and(|q| (q - oracle).abs() <= 1e-15);
        }
        parts.push(format!("{} emp {:.5} <= bound {:.4} (+3se {:.5}){}", lemma.as_str(), r.empirical, r.bound, 3.0 * r.stderr, r.exact.map_or(String::new(), |q| format!(" exact {q:.5}"))));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let opts = SolveOptions { time_limit: 60.0, ..SolveOptions::exact() };
    let r = verify_theorem3(&[100, 200, 400], 0.3, 50, 7, &opts).unwrap();
    let mut pass = r.pass;
    let mut parts = Vec::new();
    for row in &r.rows {
        pass &= row.trials.len() == 50 && row.vacuous == (row.margin >= row.n as f64);
        pass &= row.trials.iter().all(|t| t.upper_missed as f64 <= row.margin);
        parts.push(format!(
            "n={} margin {:.1} vacuous {} violations {}/{} median |U\\U*| {} max {}",
            row.n, row.margin, row.vacuous, row.upper_violations, row.lower_violations, row.median_upper_missed, row.max_upper_missed
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut bad = 0usize;
    let draws = 10_000;
    for _ in 0..draws {
        let n = rng.random_range(1..=30);
        let p: Vec<f64> = (0..n)
            .map(|_| match rng.random_range(0..3) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            })
            .collect();
        let tau = rng.random_range(0.51..=1.0);
        let margin = if rng.random_bool(0.5) { Margin::SlackFraction(rng.random_range(0.0..=1.0)) } else { Margin::Chebyshev { sigma: rng.random_range(0.0..0.3), delta: rng.random_range(0.01..0.99) } };
        let mode = if rng.random_bool(0.5) { HyperplaneMode::Plain } else { HyperplaneMode::Tightened };
        let pair = build_hyperplanes_with_margin(&p, tau, margin, mode).unwrap();
        let part = make_partition(pair.upper.as_ref(), pair.lower.as_ref());
        let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let hit = part.satisfies(&y);
        if hit.len() != 1 || part.regions[hit[0]].trivially_infeasible {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{draws} draws, {bad} with other than exactly one region"))
}

fn mkp_families() -> Vec<(&'static str, InstanceFamily)> {
    vec![
        ("per-item capacity", gen_mkp_with(5, 20, 220, 77, MkpCapacity::PerItem).unwrap()),
        ("tightness 0.25", gen_mkp_with(5, 20, 220, 77, MkpCapacity::Tightness(0.25)).unwrap()),
    ]
}

fn criterion_7(fams: &[(&str, InstanceFamily)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, fam) in fams {
        let mut cfg = BenchConfig::new("mkp_5_20", PredictorSpec::Logistic);
        cfg.train = 200;
        cfg.test = 20;
        let r = run_benchmark_on(&cfg, fam, &StdClock::new()).unwrap();
        let good = r
            .rows
            .iter()
            .filter(|row| {
                let truth = opt_value(&fam.instances[row.index]);
                row.f_pmvb.is_some_and(|f| (f - truth).abs() <= 0.01 * truth.abs())
            })
            .count();
        let speedup = r.summary.speedup;
        pass &= r.rows.len() == 20 && speedup.is_some_and(|s| s.is_finite() && s > 0.0) && good * 10 >= 9 * r.rows.len();
        parts.push(format!("{label}: tau* {:?}, within 1% {good}/20, speedup {:?}", r.summary.tau, speedup));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8(fams: &[(&str, InstanceFamily)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, fam) in fams {
        let mut cfg = BenchConfig::new("mkp_5_20", PredictorSpec::LpRootIpm);
        cfg.train = 200;
        cfg.test = 20;
        cfg.delta = 1e-8;
        cfg.tau = Some(0.9);
        cfg.tightened = true;
        cfg.mode = BenchMode::Exact;
        cfg.solve = SolveOptions { time_limit: 60.0, ..SolveOptions::exact() };
        let r = run_benchmark_on(&cfg, fam, &StdClock::new()).unwrap();
        let exact = r
            .rows
            .iter()
            .filter(|row| row.status_overall.as_deref() == Some("optimal") && row.objective_overall.is_some_and(|v| (v - opt_value(&fam.instances[row.index])).abs() <= 1e-9))
            .count();
        pass &= r.rows.len() == 20 && exact == 20;
        parts.push(format!("{label}: {exact}/20 optimal"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let d = rng.random_range(1..=6);
        let m = rng.random_range(4..=15);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let labels: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
        let params: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let reg = rng.random_range(0.0..0.1);
        let (_, grad) = logistic_loss_grad(&params, &rows, &labels, reg);
        let h = 1e-5;
        let fd: Vec<f64> = (0..=d)
            .map(|k| {
                let (mut a, mut b) = (params.clone(), params.clone());
                a[k] += h;
                b[k] -= h;
                (logistic_loss_grad(&a, &rows, &labels, reg).0 - logistic_loss_grad(&b, &rows, &labels, reg).0) / (2.0 * h)
            })
            .collect();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = grad.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&grad).max(norm(&fd)).max(1e-12));
    }
    outcome(worst <= 1e-5, format!("20 models, worst relative error {worst:.2e}"))
}

fn run(id: usize, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let pass = o.pass && in_time;
    let budget_note = budget.map_or(String::new(), |b| format!(" / budget {}s", b.as_secs()));
    println!("{} criterion {id}: {} [{:.1}s{budget_note}]", if pass { "PASS" } else { "FAIL" }, o.detail, elapsed.as_secs_f64());
    pass
}

fn main() -> ExitCode {
    let mut all = true;
    all &= run(1, Some(Duration::from_secs(120)), criterion_1);
    all &= run(2, None, criterion_2);
    all &= run(3, None, criterion_3);
    all &= run(4, Some(Duration::from_secs(60)), criterion_4);
    all &= run(5, Some(Duration::from_secs(300)), criterion_5);
    all &= run(6, None, criterion_6);
    let fams = mkp_families();
    all &= run(7, None, || criterion_7(&fams));
    all &= run(8, None, || criterion_8(&fams));
    all &= run(9, None, criterion_9);
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
