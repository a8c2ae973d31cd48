use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use prta_cli::compare::compare_ratios;
use prta_cli::experiment::{
    generate_cell_taskset, run_experiment, run_method, taskset_id, worker_pool, ExperimentConfig,
    TargetPolicy,
};
use prta_cli::svg::{emit_scatter_svg, PlotAxes, ReferenceLines, ScatterPoint};
use prta_cli::table::{emit_csv, parse_csv, ResultTable};
use prta_core::analysis::Method;
use prta_core::simulator::{empirical_dfp, simulate, ArrivalSequence};
use prta_core::taskset::{load_taskset, save_taskset, TaskSet};
use prta_core::time::TimeUnit;

/// Worst-case deadline failure probability toolkit.
#[derive(Parser)]
#[command(name = "prta", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate task-set JSON files over a parameter grid.
    Generate(GenerateArgs),
    /// Run estimators on one task-set file, JSON result to stdout.
    Analyze(AnalyzeArgs),
    /// Run the full experiment matrix and write CSV plus SVG plots.
    Experiment(ExperimentArgs),
    /// Estimate the empirical deadline failure rate by simulation.
    Simulate(SimulateArgs),
    /// Summarize ratios between two methods from a results CSV.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Task-set sizes, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_value = "10")]
    n: Vec<u32>,
    /// Total utilizations, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.65")]
    utilization: Vec<f64>,
    /// Task sets per (n, utilization) cell.
    #[arg(long, default_value_t = 10)]
    sets: u32,
    /// Root seed for all derived randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time resolution in microseconds.
    #[arg(long = "gamma-us", default_value_t = 1.0)]
    gamma_us: f64,
}

impl GridArgs {
    fn gamma(&self) -> f64 {
        self.gamma_us * 1e-6
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Output directory for the JSON files.
    #[arg(long, default_value = "tasksets")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Task-set JSON file.
    taskset: PathBuf,
    /// Target task: a task id, `lowest`, or `all`.
    #[arg(long, default_value = "lowest")]
    target: String,
    /// Methods to run, comma separated (SC, AC_ORIG, AC_IMP, MC, BE).
    #[arg(long, value_delimiter = ',', default_value = "AC_IMP")]
    methods: Vec<Method>,
    /// Sample count for MC.
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    mc_samples: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Methods to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "SC,AC_ORIG,AC_IMP,MC,BE")]
    methods: Vec<Method>,
    /// Sample count for MC.
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    mc_samples: u64,
    /// Target task per set: `lowest`, `all`, or a fixed id.
    #[arg(long, default_value = "lowest")]
    target: String,
    /// Median-of-k timing repeats.
    #[arg(long, default_value_t = 1)]
    repeat: u32,
    /// Output directory for results.csv and plots.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Task-set JSON file.
    taskset: PathBuf,
    /// Target task: a task id or `lowest`.
    #[arg(long, default_value = "lowest")]
    target: String,
    /// Number of random sporadic scenarios.
    #[arg(long, default_value_t = 10_000)]
    scenarios: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the first scenario's schedule as JSON lines to this file.
    #[arg(long = "dump-trace")]
    dump_trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Results CSV produced by `experiment`.
    csv: PathBuf,
    #[arg(long)]
    baseline: Method,
    #[arg(long)]
    contender: Method,
    /// Directory for the ratio scatter SVG (optional).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    // PRTA_THREADS caps every parallel section, including MC sampling in
    // `analyze`; `experiment` additionally installs its own pool internally
    let pool = worker_pool();
    pool.install(|| match Cli::parse().cmd {
        Cmd::Generate(args) => generate(args),
        Cmd::Analyze(args) => analyze(args),
        Cmd::Experiment(args) => experiment(args),
        Cmd::Simulate(args) => simulate_cmd(args),
        Cmd::Compare(args) => compare(args),
    })
}

fn parse_target(ts: &TaskSet, selector: &str) -> Result<Vec<u32>> {
    match selector {
        "lowest" => Ok(vec![
            ts.lowest_priority_task().context("task set is empty")?.id,
        ]),
        "all" => Ok(ts.tasks.iter().map(|t| t.id).collect()),
        other => {
            let id: u32 = other.parse().with_context(|| {
                format!("target must be a task id, `lowest`, or `all`, got {other:?}")
            })?;
            Ok(vec![id])
        }
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    for &n in &args.grid.n {
        for &u in &args.grid.utilization {
            for set_idx in 0..args.grid.sets {
                let ts = generate_cell_taskset(n, u, set_idx, args.grid.seed, args.grid.gamma())
                    .with_context(|| format!("generating n={n} u={u} set={set_idx}"))?;
                let path = args.out.join(format!("{}.json", taskset_id(n, u, set_idx)));
                save_taskset(&ts, &path)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let ts = load_taskset(&args.taskset)?;
    let mut reports = Vec::new();
    for target in parse_target(&ts, &args.target)? {
        for &method in &args.methods {
            let result = run_method(&ts, target, method, args.mc_samples)
                .with_context(|| format!("{method} on task {target}"))?;
            reports.push(serde_json::json!({
                "taskset": args.taskset.display().to_string(),
                "target": target,
                "method": method.name(),
                "wcdfp": result.wcdfp,
                "wall_time_s": result.wall_time,
                "diagnostics": result.diagnostics,
            }));
        }
    }
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let target_policy = match args.target.as_str() {
        "lowest" => TargetPolicy::LowestPriority,
        "all" => TargetPolicy::AllTasks,
        other => TargetPolicy::Explicit(other.parse().with_context(|| {
            format!("target must be a task id, `lowest`, or `all`, got {other:?}")
        })?),
    };
    let cfg = ExperimentConfig {
        cardinalities: args.grid.n.clone(),
        utilizations: args.grid.utilization.clone(),
        sets_per_cell: args.grid.sets,
        methods: args.methods.clone(),
        mc_samples: args.mc_samples,
        seed: args.grid.seed,
        gamma: args.grid.gamma(),
        target_policy,
        repeat: args.repeat,
    };
    let table = run_experiment(&cfg)?;

    std::fs::create_dir_all(&args.out)?;
    let csv_path = args.out.join("results.csv");
    emit_csv(&table, &csv_path)?;
    println!("wrote {} rows to {}", table.rows.len(), csv_path.display());
    for failure in &table.failures {
        eprintln!(
            "row failed: {} {}: {}",
            failure.taskset_id,
            failure.method.map(|m| m.name()).unwrap_or("(generation)"),
            failure.message
        );
    }

    // ratio plots against AC_IMP where both sides are present
    for baseline in [Method::AcOrig, Method::Sc] {
        if !args.methods.contains(&baseline) || !args.methods.contains(&Method::AcImp) {
            continue;
        }
        match compare_ratios(&table, baseline, Method::AcImp) {
            Ok(summary) => {
                let points: Vec<ScatterPoint> = summary
                    .points
                    .iter()
                    .map(|p| ScatterPoint {
                        x: p.wcdfp_ratio,
                        y: p.time_ratio,
                    })
                    .collect();
                let axes = PlotAxes {
                    title: format!("AC_IMP relative to {baseline}"),
                    x_label: format!("wcdfp(AC_IMP) / wcdfp({baseline})"),
                    y_label: format!("time(AC_IMP) / time({baseline})"),
                    reference: ReferenceLines::RatioCross,
                };
                let path = args.out.join(format!(
                    "ratio-ac_imp-vs-{}.svg",
                    baseline.name().to_lowercase()
                ));
                emit_scatter_svg(&points, &axes, &path)?;
                println!("wrote {}", path.display());
            }
            Err(e) => eprintln!("skipping ratio plot vs {baseline}: {e}"),
        }
    }

    // value plot: analytical bound against the convolution value
    if args.methods.contains(&Method::Be) && args.methods.contains(&Method::AcImp) {
        let points: Vec<ScatterPoint> = table
            .method_rows(Method::AcImp)
            .filter_map(|conv| {
                table
                    .find(&conv.taskset_id, conv.target, Method::Be)
                    .map(|be| ScatterPoint {
                        x: conv.wcdfp,
                        y: be.wcdfp,
                    })
            })
            .collect();
        if !points.is_empty() {
            let axes = PlotAxes {
                title: "BE bound against AC_IMP".into(),
                x_label: "wcdfp(AC_IMP)".into(),
                y_label: "wcdfp(BE)".into(),
                reference: ReferenceLines::Diagonal,
            };
            let path = args.out.join("value-be-vs-ac_imp.svg");
            emit_scatter_svg(&points, &axes, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let ts = load_taskset(&args.taskset)?;
    let targets = parse_target(&ts, &args.target)?;
    let [target] = targets.as_slice() else {
        bail!("simulate needs exactly one target task");
    };

    // stdout carries only the JSON report; file notices go to stderr
    if let Some(path) = &args.dump_trace {
        dump_first_scenario(&ts, args.seed, path)?;
        eprintln!("wrote {}", path.display());
    }

    let (rate, halfwidth) = empirical_dfp(&ts, *target, args.scenarios, args.seed)?;
    let bound = run_method(&ts, *target, Method::AcImp, 0)?.wcdfp;
    let report = serde_json::json!({
        "target": target,
        "scenarios": args.scenarios,
        "empirical_rate": rate,
        "ci_halfwidth": halfwidth,
        "ac_imp_bound": bound,
        "bounded": rate - halfwidth <= bound,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn dump_first_scenario(ts: &TaskSet, seed: u64, path: &Path) -> Result<()> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::weighted::WeightedAliasIndex;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let horizon = TimeUnit(
        ts.tasks
            .iter()
            .map(|t| t.period.ticks())
            .max()
            .context("task set is empty")?
            * 4
            + 1,
    );
    let xi = ArrivalSequence::sporadic(ts, horizon, &mut rng);
    let samples: Vec<(u32, Vec<u64>)> = xi
        .releases
        .iter()
        .map(|(id, ticks)| {
            let task = ts.task(*id).expect("arrivals built from this set");
            let table = WeightedAliasIndex::new(task.exec_pmf.probs().to_vec())
                .expect("validated pmf weights");
            let draws = ticks
                .iter()
                .map(|_| table.sample(&mut rng) as u64)
                .collect();
            (*id, draws)
        })
        .collect();
    let trace = simulate(ts, &xi, &samples)?;
    std::fs::write(path, trace.to_jsonl())?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let table: ResultTable = parse_csv(&args.csv)?;
    let summary = compare_ratios(&table, args.baseline, args.contender)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let points: Vec<ScatterPoint> = summary
            .points
            .iter()
            .map(|p| ScatterPoint {
                x: p.wcdfp_ratio,
                y: p.time_ratio,
            })
            .collect();
        let axes = PlotAxes {
            title: format!("{} relative to {}", args.contender, args.baseline),
            x_label: format!("wcdfp({}) / wcdfp({})", args.contender, args.baseline),
            y_label: format!("time({}) / time({})", args.contender, args.baseline),
            reference: ReferenceLines::RatioCross,
        };
        let path = dir.join(format!(
            "ratio-{}-vs-{}.svg",
            args.contender.name().to_lowercase(),
            args.baseline.name().to_lowercase()
        ));
        emit_scatter_svg(&points, &axes, &path)?;
        eprintln!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
