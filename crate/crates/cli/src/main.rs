//! `redist`: flop accounting, dataset statistics, the two-step ratio search
//! and report rendering from the command line.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 when
//! input data is missing or malformed.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "redist", version, about = "Compute redistribution tools for face detectors")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-component multiply-adds and parameters of an architecture.
    Flops(FlopsArgs),
    /// Cumulative face-scale distribution of an annotation file.
    ScaleStats(ScaleStatsArgs),
    /// Positive-anchor histogram under a crop policy.
    AnchorStats(AnchorStatsArgs),
    /// Sample, score and analyse a population.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Bootstrap ratio ranges of a scored population file.
    Bootstrap(BootstrapArgs),
    /// Render markdown and SVG plots for a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct FlopsArgs {
    /// Architecture JSON file, or a baseline name (resnet-2.5gf,
    /// resnet-10gf, resnet-34gf, mobilenet-0.5gf).
    arch: String,
    #[arg(long, default_value = "640x480")]
    input: String,
    /// Directory for breakdown.csv and layers.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a stacked-bar flops.svg into --out.
    #[arg(long, requires = "out")]
    svg: bool,
    /// Print the table as JSON instead.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Run configuration; its `dataset` section supplies defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base directory for relative dataset paths.
    #[arg(long, env = "REDIST_DATA_ROOT")]
    data_root: Option<PathBuf>,
    /// WIDER FACE `bbx_gt` annotation file.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Image directory probed for dimensions.
    #[arg(long)]
    images: Option<PathBuf>,
    /// `path,width,height` CSV consulted before probing images.
    #[arg(long)]
    sizes: Option<PathBuf>,
    /// Keep faces flagged invalid.
    #[arg(long)]
    keep_invalid: bool,
}

#[derive(Debug, Args)]
struct ScaleStatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Comma-separated scale thresholds.
    #[arg(long, value_delimiter = ',', default_value = "32,16,8")]
    thresholds: Vec<f64>,
    /// Emit the whole curve over integer thresholds up to the long edge.
    #[arg(long, conflicts_with = "thresholds")]
    full: bool,
    /// Long edge images are resized to before measuring.
    #[arg(long, default_value_t = 640)]
    long_edge: u32,
    /// Directory for cdf.csv (and cdf.svg).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnchorStatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Generate this many synthetic images instead of reading annotations.
    #[arg(long, conflicts_with_all = ["gt", "images", "sizes"])]
    synthetic: Option<usize>,
    /// Crop policy: `baseline` or `sr`.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<u32>,
    /// Also count positives before cross-face deduplication.
    #[arg(long)]
    raw: bool,
    /// Directory for stats.csv, stats.json and positives.svg.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base output directory; the step writes into `<out>/<step>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    /// `arch_id,ap` CSV of measured scores, replacing the configured
    /// evaluator.
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SearchCommand {
    /// Backbone-only search with neck and head fixed.
    Step1(SearchArgs),
    /// Whole-detector search inside the step-1 backbone ranges.
    Step2 {
        #[command(flatten)]
        args: SearchArgs,
        /// Step-1 run directory (default `<out>/step1`).
        #[arg(long)]
        step1: Option<PathBuf>,
    },
    /// Whole-detector search without backbone constraints.
    Baseline(SearchArgs),
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    /// Scored population, JSON lines.
    population: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated components (default: all ten).
    #[arg(long, value_delimiter = ',')]
    components: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<u32>,
    #[arg(long)]
    subsample_frac: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Directory for ranges.json and ranges.csv; printed when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    run_dir: PathBuf,
    /// Output directory (default `<run_dir>/report`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<redist_core::Error>() {
            return if e.is_data_error() { 2 } else { 1 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

/// The error chain joined by `: `, skipping causes already spelled out by
/// the message above them.
fn describe(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !parts.last().is_some_and(|p| p.contains(&text)) {
            parts.push(text);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match cli.command {
        Command::Flops(a) => commands::flops(a),
        Command::ScaleStats(a) => commands::scale_stats(a),
        Command::AnchorStats(a) => commands::anchor_stats(a),
        Command::Search(SearchCommand::Step1(a)) => commands::search(redist_core::pipeline::Step::Step1, a, None),
        Command::Search(SearchCommand::Step2 { args, step1 }) => {
            commands::search(redist_core::pipeline::Step::Step2, args, step1)
        }
        Command::Search(SearchCommand::Baseline(a)) => {
            commands::search(redist_core::pipeline::Step::Baseline, a, None)
        }
        Command::Bootstrap(a) => commands::bootstrap(a),
        Command::Report(a) => report::run(&a.run_dir, a.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
