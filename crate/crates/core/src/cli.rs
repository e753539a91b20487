//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a runtime failure or a
//! fit that stopped at its iteration cap.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::admm::{predict, FitReport};
use crate::config::{Regularizer, SolverConfig};
use crate::data::{generate_toy, load_csv, load_model, save_csv, save_model, ToySpec};
use crate::error::{Error, Result};
use crate::eval::{feature_metrics, infinite_push_loss, pos_at_top_rate, selected_features};
use crate::experiment::{bench, rank_scores, train_normalized, tune, BenchSpec, Metric, TuneGrid};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "infpush", version, about = "Sparse support vector infinite push")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model on a labeled CSV file.
    Train(TrainArgs),
    /// Score every row of a CSV file.
    Predict(PredictArgs),
    /// Ranking and feature-selection metrics of a model on a CSV file.
    Eval(EvalArgs),
    /// Write a synthetic toy dataset.
    Synth(SynthArgs),
    /// Pick λ on a stratified validation split and refit.
    Tune(TuneArgs),
    /// Time fits on toy data of increasing size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Absolute ADMM penalty. Defaults to 1/(m·n).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    outer_tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::pair_scaled();
        if let Some(mu) = self.mu {
            cfg.mu = mu;
            cfg.scale_mu_by_pairs = false;
        }
        cfg.outer_tol = self.outer_tol;
        cfg.outer_max_iter = self.max_iter;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value = "l1")]
    reg: Regularizer,
    #[arg(long)]
    out: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output file; scores go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated indices of the truly relevant features.
    #[arg(long, value_delimiter = ',')]
    relevant: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, default_value = "l1")]
    reg: Regularizer,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of each class used for fitting.
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long, default_value = "pos_at_top")]
    metric: Metric,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated training sample counts.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value = "l2")]
    reg: Regularizer,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let outcome = match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Tune(a) => cmd_tune(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

/// Sizes the global thread pool from `INFPUSH_THREADS` (0 or unset = automatic).
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("INFPUSH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("INFPUSH_THREADS must be a non-negative integer, got '{raw}'")))?;
    // A pool may already exist when called twice in one process; keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn positive_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must be positive, got {lambda}")))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn fit_report_json(lambda: f64, report: &FitReport, metrics: serde_json::Value) -> serde_json::Value {
    json!({
        "lambda": lambda,
        "objective": report.final_objective(),
        "residual": report.final_residual(),
        "iterations": report.iterations,
        "converged": report.converged,
        "nonzeros": report.nonzero_count,
        "metrics": metrics,
    })
}

fn print_fit_summary(report: &FitReport) {
    println!(
        "iterations={} objective={:.6e} residual={:.3e} nonzeros={} converged={}",
        report.iterations,
        report.final_objective().unwrap_or(f64::NAN),
        report.final_residual().unwrap_or(f64::NAN),
        report.nonzero_count,
        report.converged,
    );
}

fn fit_exit_code(report: &FitReport) -> i32 {
    if report.converged {
        EXIT_OK
    } else {
        eprintln!("warning: solver stopped at its iteration cap before converging");
        EXIT_FAILURE
    }
}

fn cmd_train(args: &TrainArgs) -> Result<i32> {
    positive_lambda(args.lambda)?;
    let cfg = args.solver.config()?;
    let data = load_csv(&args.data)?;
    let (model, report) = train_normalized(&data, args.lambda, args.reg, &cfg)?;
    save_model(&model, &args.out)?;
    print_fit_summary(&report);
    if let Some(path) = &args.report {
        let scores = rank_scores(&model, &data)?;
        let metrics = json!({
            "train_pos_at_top": pos_at_top_rate(&scores),
            "train_infpush_loss": infinite_push_loss(&scores),
        });
        write_json(path, &fit_report_json(args.lambda, &report, metrics))?;
    }
    Ok(fit_exit_code(&report))
}

fn cmd_predict(args: &PredictArgs) -> Result<i32> {
    let model = load_model(&args.model)?;
    let data = load_csv(&args.data)?;
    let mut text = String::from("label,score\n");
    for (label, rows) in [(1, data.positives()), (-1, data.negatives())] {
        for row in rows.row_iter() {
            let x: Vec<f64> = row.iter().copied().collect();
            text += &format!("{label},{:.17e}\n", predict(&model, &x)?);
        }
    }
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let model = load_model(&args.model)?;
    let data = load_csv(&args.data)?;
    let scores = rank_scores(&model, &data)?;
    println!("infinite_push_loss={}", infinite_push_loss(&scores));
    println!("pos_at_top_rate={:.6}", pos_at_top_rate(&scores));
    println!("nonzeros={}", model.nonzero_count());
    if let Some(relevant) = &args.relevant {
        if let Some(&bad) = relevant.iter().find(|&&i| i >= model.dim()) {
            return Err(Error::invalid(format!(
                "relevant index {bad} is out of range for {} features",
                model.dim()
            )));
        }
        let relevant: BTreeSet<usize> = relevant.iter().copied().collect();
        let fm = feature_metrics(&selected_features(&model.weights), &relevant);
        println!("precision={:.6}", fm.precision);
        println!("recall={:.6}", fm.recall);
        println!("f_measure={:.6}", fm.f_measure);
    }
    Ok(EXIT_OK)
}

/// `data.csv` → `data.relevant`.
fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("relevant")
}

fn cmd_synth(args: &SynthArgs) -> Result<i32> {
    let (data, relevant) = generate_toy(&ToySpec {
        d: args.d,
        r: args.r,
        n_samples: args.n,
        seed: args.seed,
    })?;
    save_csv(&data, &args.out)?;
    let sidecar = sidecar_path(&args.out);
    let list: Vec<String> = relevant.iter().map(usize::to_string).collect();
    fs::write(&sidecar, list.join(",") + "\n").map_err(|e| Error::io(&sidecar, e))?;
    println!(
        "wrote {} ({} positives, {} negatives, {} features) and {}",
        args.out.display(),
        data.m(),
        data.n(),
        data.dim(),
        sidecar.display()
    );
    Ok(EXIT_OK)
}

fn cmd_tune(args: &TuneArgs) -> Result<i32> {
    let cfg = args.solver.config()?;
    let grid = TuneGrid {
        lambdas: args.grid.clone(),
        split_fraction: args.split,
        metric: args.metric,
        seed: args.seed,
    };
    grid.validate()?;
    let data = load_csv(&args.data)?;
    let result = tune(&data, &grid, args.reg, &cfg)?;
    save_model(&result.model, &args.out)?;
    for p in &result.grid {
        println!(
            "lambda={:e} score={:.6} iterations={} converged={}",
            p.lambda, p.score, p.iterations, p.converged
        );
    }
    println!("best_lambda={:e}", result.best_lambda);
    print_fit_summary(&result.report);
    if let Some(path) = &args.report {
        let metrics = json!({ "grid": result.grid, "metric": args.metric });
        write_json(path, &fit_report_json(result.best_lambda, &result.report, metrics))?;
    }
    Ok(fit_exit_code(&result.report))
}

fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    positive_lambda(args.lambda)?;
    let cfg = args.solver.config()?;
    let spec = BenchSpec {
        sizes: args.sizes.clone(),
        d: args.d,
        r: args.r,
        seed: args.seed,
        trials: args.trials,
        lambda: args.lambda,
        reg: args.reg,
    };
    let result = bench(&spec, &cfg)?;
    println!("{:>8} {:>10} {:>12} {:>10}", "size", "pairs", "seconds", "iterations");
    for row in &result.rows {
        println!(
            "{:>8} {:>10} {:>12.4} {:>10}",
            row.size, row.pairs, row.seconds, row.iterations
        );
    }
    println!("slope={:.2}", result.slope);
    if let Some(path) = &args.report {
        write_json(path, &result)?;
    }
    Ok(EXIT_OK)
}
