use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pmvb_core::bnb::{solve_mip, SolveOptions};
use pmvb_core::clock::StdClock;
use pmvb_core::instgen::{gen_ca, gen_knapsack_uniform, gen_mkp_with, gen_scp, InstanceFamily, MkpCapacity, VaryingField};
use pmvb_core::pmvb::{default_tau_grid, pmvb_solve, Calibration, HyperplaneMode, Margin, PmvbConfig, PmvbMode, DATA_FREE_DELTA};
use pmvb_core::predict::{logistic_train, Sample, TrainOptions};
use pmvb_lab::bench::{report_emit, run_benchmark, solve_labels, untrained_prediction, BenchConfig, BenchMode, PredictorSpec, DEFAULT_BENCH_DELTA};
use pmvb_lab::format;
use pmvb_lab::validate::{verify_lemma, verify_theorem3, Lemma};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pmvb", version, about = "Multi-variable branching experiments on parametric binary programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance family directory.
    Generate(GenerateArgs),
    /// Train a logistic model on a family's optimal solutions.
    Train(TrainArgs),
    /// Select the threshold and variance bound from validation instances.
    Calibrate(CalibrateArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Benchmark the first region against the plain solver on a family.
    Bench(BenchArgs),
    /// Monte-Carlo checks of the concentration bounds.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mkp,
    Scp,
    Ca,
    Knapsack,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Rows (MKP, SCP).
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Columns (MKP, SCP, knapsack).
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long, default_value_t = 10)]
    items: usize,
    #[arg(long, default_value_t = 24)]
    bids: usize,
    /// MKP capacity as a share of each row sum; default is a quarter item.
    #[arg(long)]
    tightness: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LimitArgs {
    /// Seconds per solve.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl LimitArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions { time_limit: self.time_limit, seed: self.seed, ..SolveOptions::exact() }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    family: PathBuf,
    /// Use the first N instances; all by default.
    #[arg(long)]
    train: Option<usize>,
    #[arg(long, default_value_t = 1e-4)]
    reg: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    family: PathBuf,
    /// logistic, lp-root-simplex, lp-root-ipm or file:<dir>.
    #[arg(long)]
    predictor: String,
    /// Model file for the logistic predictor.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    skip: usize,
    #[arg(long)]
    take: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BENCH_DELTA)]
    delta: f64,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PmvbArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Margin as a share of each set's size when no sigma is given.
    #[arg(long, default_value_t = 0.0)]
    slack: f64,
    #[arg(long, default_value = "heuristic")]
    mode: String,
    /// Intercepts from the summed probabilities instead of tau times the set size.
    #[arg(long)]
    tightened: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "lp-root-ipm")]
    predictor: String,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[command(flatten)]
    pmvb: PmvbArgs,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value = "logistic")]
    predictor: String,
    #[arg(long)]
    train: usize,
    #[arg(long)]
    test: usize,
    #[command(flatten)]
    pmvb: PmvbArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Output prefix; writes <out>.csv and <out>.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(subcommand)]
    what: VerifyCommand,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// One of hoeffding, bernstein, chebyshev, uniform_bins.
    Lemma {
        #[arg(long)]
        which: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The data-free knapsack bound on random uniform knapsacks.
    Theorem3 {
        #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.3)]
        gamma: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    ValidationFailed,
}

fn mode_of(s: &str) -> Result<BenchMode> {
    BenchMode::parse(s).with_context(|| format!("unknown mode `{s}` (heuristic, exact, plain)"))
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(a: &GenerateArgs) -> Result<Outcome> {
    let fam = match a.kind {
        Kind::Mkp => {
            let cap = a.tightness.map_or(MkpCapacity::PerItem, MkpCapacity::Tightness);
            gen_mkp_with(a.m, a.n, a.count, a.seed, cap)?
        }
        Kind::Scp => gen_scp(a.m, a.n, a.density, a.count, a.seed)?,
        Kind::Ca => gen_ca(a.items, a.bids, a.count, a.seed)?,
        Kind::Knapsack => {
            let instances = (0..a.count as u64)
                .map(|k| gen_knapsack_uniform(a.n, a.gamma, a.seed.wrapping_add(k)).map(|g| g.instance))
                .collect::<Result<Vec<_>, _>>()?;
            let template = instances.first().cloned().context("count must be at least 1")?;
            InstanceFamily { name: format!("knap_{}_s{}", a.n, a.seed), template, varying_field: VaryingField::RhsB, instances, seed: a.seed }
        }
    };
    format::write_family(&a.out, &fam)?;
    log::info!("wrote {} instances to {}", fam.len(), a.out.display());
    Ok(Outcome::Ok)
}

fn train(a: &TrainArgs) -> Result<Outcome> {
    let fam = format::read_family(&a.family)?;
    let n = a.train.unwrap_or(fam.len()).min(fam.len());
    let labels = solve_labels(&fam.instances[..n], &a.limits.options(), &StdClock::new())?;
    let samples: Vec<Sample> = fam.instances[..n]
        .iter()
        .zip(labels)
        .filter_map(|(i, l)| l.map(|labels| Sample { features: i.param_tag.clone(), labels }))
        .collect();
    if samples.len() < n {
        log::warn!("{} instances were not solved to optimality and are skipped", n - samples.len());
    }
    let model = logistic_train(&samples, &TrainOptions { reg: a.reg, max_iters: a.max_iters, ..TrainOptions::default() })?;
    format::write_model(&a.out, &model)?;
    Ok(Outcome::Ok)
}

fn calibrate(a: &CalibrateArgs) -> Result<Outcome> {
    let fam = format::read_family(&a.family)?;
    let end = a.take.map_or(fam.len(), |t| (a.skip + t).min(fam.len()));
    let insts = fam.instances.get(a.skip..end).context("skip exceeds the family size")?;
    let spec = PredictorSpec::parse(&a.predictor)?;
    let model = match (&spec, &a.model) {
        (PredictorSpec::Logistic, Some(p)) => Some(format::read_model(p)?),
        (PredictorSpec::Logistic, None) => bail!("the logistic predictor needs --model"),
        _ => None,
    };
    let labels = solve_labels(insts, &a.limits.options(), &StdClock::new())?;
    let mut pairs = Vec::new();
    for (inst, l) in insts.iter().zip(labels) {
        let Some(l) = l else { continue };
        let p = match (&model, &spec) {
            (Some(m), _) => m.predict(&inst.param_tag)?,
            (None, PredictorSpec::File(dir)) => untrained_prediction(&spec, inst, Some(&dir.join(format!("{}.json", inst.name))))?,
            (None, s) => untrained_prediction(s, inst, None)?,
        };
        pairs.push((p.probabilities, l));
    }
    let cal = Calibration::fit(&pairs, &default_tau_grid(), a.delta)?;
    format::write_calibration(&a.out, &cal)?;
    log::info!("tau* = {}, sigma = {}", cal.tau_star, cal.sigma);
    Ok(Outcome::Ok)
}

fn solve(a: &SolveArgs) -> Result<Outcome> {
    let inst = format::read_instance(&a.instance)?;
    let options = a.limits.options();
    let mode = mode_of(&a.pmvb.mode)?;
    if mode == BenchMode::Plain {
        let r = solve_mip(&inst, &[], &options)?;
        emit_json(
            &json!({
                "instance": inst.name, "mode": "plain", "status": r.status.as_str(), "objective": r.objective(),
                "bound": r.best_bound, "nodes": r.nodes, "wall_time": r.wall_time,
                "values": r.best_solution.map(|s| s.values),
            }),
            a.out.as_deref(),
        )?;
        return Ok(Outcome::Ok);
    }
    let spec = PredictorSpec::parse(&a.predictor)?;
    let p = match &spec {
        PredictorSpec::Logistic => {
            let path = a.model.as_ref().context("the logistic predictor needs --model")?;
            format::read_model(path)?.predict(&inst.param_tag)?
        }
        s => untrained_prediction(s, &inst, None)?,
    };
    let hyperplanes = if a.pmvb.tightened { HyperplaneMode::Tightened } else { HyperplaneMode::Plain };
    let mut config = match &a.calibration {
        Some(path) => {
            let mut cal = format::read_calibration(path)?;
            if let Some(d) = a.pmvb.delta {
                cal.delta = d;
            }
            if let Some(s) = a.pmvb.sigma {
                cal.sigma = s;
            }
            PmvbConfig::from_calibration(&cal, hyperplanes)
        }
        None => match a.pmvb.sigma {
            Some(sigma) => PmvbConfig {
                tau: pmvb_core::pmvb::DATA_FREE_TAU,
                margin: Margin::Chebyshev { sigma, delta: a.pmvb.delta.unwrap_or(DATA_FREE_DELTA) },
                hyperplanes,
            },
            None => PmvbConfig::data_free(a.pmvb.slack),
        },
    };
    if let Some(t) = a.pmvb.tau {
        config.tau = t;
    }
    let pmode = if mode == BenchMode::Exact { PmvbMode::Exact } else { PmvbMode::Heuristic };
    let r = pmvb_solve(&inst, &p.probabilities, &config, &options, pmode)?;
    let regions: Vec<_> = r
        .regions
        .iter()
        .map(|g| {
            json!({
                "region": g.region.label(),
                "trivially_infeasible": g.region.trivially_infeasible,
                "skipped": g.skipped,
                "cutoff": g.cutoff,
                "status": g.report.as_ref().map(|s| s.status.as_str()),
                "objective": g.report.as_ref().and_then(|s| s.objective()),
                "nodes": g.report.as_ref().map(|s| s.nodes),
            })
        })
        .collect();
    let plane = |h: &Option<pmvb_core::pmvb::CardinalityHyperplane>| {
        h.as_ref().map(|h| json!({"size": h.size(), "sense": h.sense.symbol(), "zeta": h.zeta, "rhs": h.rhs_int}))
    };
    emit_json(
        &json!({
            "instance": inst.name, "mode": mode.as_str(), "predictor": spec.label(), "tau": config.tau,
            "status": r.overall.status.as_str(), "objective": r.overall.objective(), "bound": r.overall.best_bound,
            "nodes": r.overall.nodes, "wall_time": r.overall.wall_time,
            "upper": plane(&r.hyperplanes.upper), "lower": plane(&r.hyperplanes.lower),
            "unrounded": r.hyperplanes.sets.unrounded.len(),
            "regions": regions,
            "values": r.overall.best_solution.map(|s| s.values),
        }),
        a.out.as_deref(),
    )?;
    Ok(Outcome::Ok)
}

fn bench(a: &BenchArgs) -> Result<Outcome> {
    let mut config = BenchConfig::new(&a.family, PredictorSpec::parse(&a.predictor)?);
    config.delta = a.pmvb.delta.unwrap_or(DEFAULT_BENCH_DELTA);
    config.tau = a.pmvb.tau;
    config.sigma = a.pmvb.sigma;
    config.slack = a.pmvb.slack;
    config.mode = mode_of(&a.pmvb.mode)?;
    config.tightened = a.pmvb.tightened;
    config.train = a.train;
    config.test = a.test;
    config.solve = a.limits.options();
    let report = run_benchmark(&config)?;
    let (csv, json) = report_emit(&report, &a.out)?;
    log::info!("wrote {} and {}", csv.display(), json.display());
    println!(
        "rows {}  pairs {}  not reached {}  SGM pmvb {:?}  SGM original {:?}  speedup {:?}",
        report.summary.rows, report.summary.pairs, report.summary.not_reached, report.summary.sgm_pmvb, report.summary.sgm_original, report.summary.speedup
    );
    Ok(Outcome::Ok)
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    match &a.what {
        VerifyCommand::Lemma { which, trials, seed, n, p, t, delta, out } => {
            let lemma = Lemma::parse(which).with_context(|| format!("unknown lemma `{which}`"))?;
            let mut params = lemma.default_params();
            params.n = n.unwrap_or(params.n);
            params.p = p.unwrap_or(params.p);
            params.t = t.unwrap_or(params.t);
            params.delta = delta.unwrap_or(params.delta);
            let r = verify_lemma(lemma, params, *trials, *seed)?;
            emit_json(&serde_json::to_value(&r)?, out.as_deref())?;
            Ok(if r.pass { Outcome::Ok } else { Outcome::ValidationFailed })
        }
        VerifyCommand::Theorem3 { n, gamma, trials, limits, out } => {
            let r = verify_theorem3(n, *gamma, *trials, limits.seed, &limits.options())?;
            for row in &r.rows {
                eprintln!(
                    "n={} margin={:.2} vacuous={} violations U/L={}/{} median |U\\U*|={} unsolved={}",
                    row.n, row.margin, row.vacuous, row.upper_violations, row.lower_violations, row.median_upper_missed, row.unsolved
                );
            }
            emit_json(&serde_json::to_value(&r)?, out.as_deref())?;
            Ok(if r.pass { Outcome::Ok } else { Outcome::ValidationFailed })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => {
            eprintln!("validation failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
