//! `vulnscore`: feature extraction, dataset assembly, training, feature
//! selection, classification and evaluation from the command line.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vulnscore::eval::Subset;
use vulnscore::learn::ModelKind;

use config::Tuning;

#[derive(Debug, Parser)]
#[command(name = "vulnscore", version, about = "Tell exploitable vulnerabilities apart from benign flaws in C/C++ projects")]
pub struct Cli {
    /// JSON run configuration supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Suppress warnings and progress on stderr
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an unlabeled feature fragment for one project
    Extract(ExtractArgs),
    /// Assemble or check a labeled dataset
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Fit a classifier on a whole dataset
    Train(TrainArgs),
    /// Rank features by recursive elimination
    Rfe(RfeArgs),
    /// Label a fragment or every instance of a dataset with a trained model
    Classify(ClassifyArgs),
    /// Run the model-by-feature-subset evaluation grid
    Evaluate(EvaluateArgs),
    /// Generate a synthetic labeled corpus
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    /// Per-file source metrics as a JSON array on stdout
    PerFile,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Project source tree
    #[arg(long, value_name = "DIR")]
    pub source: PathBuf,
    /// Analyzer reports (cppcheck XML or splint text)
    #[arg(long, value_name = "FILE", num_args = 1..)]
    pub findings: Vec<PathBuf>,
    /// Project metadata manifest
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Cap every layer-1 count at 1
    #[arg(long)]
    pub binarize_l1: bool,
    #[arg(long, value_enum)]
    pub emit: Option<Emit>,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Label fragments and write them as one dataset
    Build {
        /// Fragments of projects with exploitable vulnerabilities
        #[arg(long, value_name = "FILE", num_args = 1..)]
        vulnerable: Vec<PathBuf>,
        /// Fragments of projects whose flaws are not exploitable
        #[arg(long, value_name = "FILE", num_args = 1..)]
        benign: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print every dictionary and range violation
    Validate {
        #[arg(long, value_name = "FILE")]
        dataset: Option<PathBuf>,
    },
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_subset(s: &str) -> Result<Subset, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// fda or svm
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelKind>,
    /// l1+l2, all or rfe
    #[arg(long, value_parser = parse_subset, conflicts_with = "features")]
    pub subset: Option<Subset>,
    /// Explicit comma-separated feature list
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Seed for the inner folds of `--subset rfe`
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Model file; stdout when absent
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RfeArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelKind>,
    /// Seed for the inner folds
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Trace file; stdout when absent
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// A fragment from `extract` or a dataset
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// Both classifiers crossed with L1+L2, all features and RFE
    Table1,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table1")]
    pub grid: Grid,
    /// Required; every random choice derives from it
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tuning: Tuning,
    /// JSON report
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the plain-text table here
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 75)]
    pub instances: usize,
    /// Plant class signal in layer-3 features
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub informative_l3: bool,
    /// Share of vulnerable instances
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub vulnerable_fraction: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
