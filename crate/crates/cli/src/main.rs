//! `stylodiv`: stylometric divergence auditing from the command line.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or input error.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "stylodiv", version, about = "Measure stylistic divergence of text samples from a human baseline")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads for extraction and resampling.
    #[arg(long, global = true, env = "STYLODIV_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output format (default depends on the command).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Jsonl,
    TxtDir,
    TxtDelim,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input layout; directories are always read one document per file.
    #[arg(long, value_enum, default_value_t = InputKind::Jsonl)]
    pub input_format: InputKind,
    /// Separator line for txt-delim input.
    #[arg(long, default_value = stylodiv::corpus::DEFAULT_DELIMITER)]
    pub delimiter: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Pooled,
    Mean,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisArg {
    Steps,
    Absorption,
    ContextShift,
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    /// Baseline file written by `baseline`.
    #[arg(long)]
    pub baseline: PathBuf,
    /// Tolerance around 1.0 for the divergence set.
    #[arg(long, default_value_t = stylodiv::divergence::DEFAULT_DELTA)]
    pub delta: f64,
    /// Baseline rate used as the denominator.
    #[arg(long, value_enum, default_value_t = View::Pooled)]
    pub view: View,
    /// Comma-separated features left out of every aggregate.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    /// Family-wise level for the significant-feature count.
    #[arg(long, default_value_t = stylodiv::divergence::DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build baseline statistics from a human-written corpus.
    Baseline {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        /// Reservoir-sample at most this many documents.
        #[arg(long)]
        sample_limit: Option<u64>,
        /// Corpus label stored in the file.
        #[arg(long)]
        label: Option<String>,
    },
    /// Per-document feature counts and frequencies.
    Extract {
        path: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        label: Option<String>,
    },
    /// Amplification ratios and divergence of one sample set.
    Analyze {
        /// Raw samples or a features file.
        samples: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        input: InputArgs,
        /// Model name (defaults to the sample label).
        #[arg(long)]
        model: Option<String>,
        /// Also write the per-feature table as CSV here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Base-vs-tuned change in mean AR with permutation p-values.
    Compare {
        /// Reports (or samples, with --baseline) as BASE TUNED pairs.
        #[arg(required = true, num_args = 2..)]
        pairs: Vec<PathBuf>,
        /// Baseline for inputs that are raw samples.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Self-BLEU-4, distinct-n, repetition and vocabulary diversity.
    Diversity {
        #[arg(required = true)]
        samples: Vec<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// How well feature subsets reproduce the full-taxonomy ranking.
    Ablate {
        /// Report files or directories of reports.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Preset name or comma-separated feature list; repeatable.
        #[arg(long)]
        subset: Vec<String>,
    },
    /// Monte-Carlo sweep of the absorbing-context mechanism.
    Simulate {
        #[arg(long, value_enum, default_value_t = AxisArg::Steps)]
        axis: AxisArg,
        /// Comma-separated ascending values for the swept parameter.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 0.9)]
        context_shift: f64,
        #[arg(long, default_value_t = 0.05)]
        trigger_rate_formal: f64,
        #[arg(long, default_value_t = 0.001)]
        trigger_rate_mixture: f64,
        #[arg(long, default_value_t = 0.95)]
        absorption: f64,
        #[arg(long, default_value_t = 1024)]
        steps: u64,
        #[arg(long, default_value_t = 10_000)]
        episodes: u64,
    },
    /// Cross-model tables and the long-format heatmap from reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Write the per-feature summary as CSV here.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Write (model, feature, log10_ar) rows as CSV here.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Check that files parse under their schema.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Test-retest agreement of two baselines.
    Retest { first: PathBuf, second: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
        Err(_) => ExitCode::from(1),
    }
}
