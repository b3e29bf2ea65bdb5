mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stdsa_core::pipeline::SimilarityInput;
use stdsa_core::ClusterCount;

use crate::error::{CliError, Kind};

#[derive(Debug, Parser)]
#[command(
    name = "stdsa",
    version,
    about = "Recommend regions with a similar epidemic profile to a target region"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Region table (CSV with a `region` column and the nine indicator columns).
    /// Falls back to the config file, then to `$STDSA_DATASET`.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// key=value file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format on stdout [default: text].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Directory for result files.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ClusterArgs {
    /// K-means seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// K-means++ restarts per k [default: 20].
    #[arg(long)]
    restarts: Option<usize>,
    /// Elbow rule used when k is `auto`.
    #[arg(long)]
    elbow_rule: Option<String>,
}

#[derive(Debug, Subcommand)]
pub(crate) enum Command {
    /// Validate a region table and optionally write the cleaned and normalized copies.
    Ingest,
    /// Box-plot summaries, indicator correlations and the all-regions SSE curve.
    Stats {
        /// Restrict the box summary to one indicator key.
        #[arg(long)]
        indicator: Option<String>,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Run the two-stage filter for a target region.
    Recommend(RecommendArgs),
    /// K-means over all regions; reports the target's cluster.
    Baseline {
        #[arg(long)]
        target: String,
        /// Cluster count, or `auto` [default: 5].
        #[arg(long)]
        baseline_k: Option<ClusterCount>,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Contrast and intrinsic dimension of a point set or of a target's second filter.
    Metrics {
        /// CSV of numeric coordinates with a header row.
        #[arg(long, conflicts_with = "target")]
        points: Option<PathBuf>,
        /// Row of the points file used as the query point.
        #[arg(long, default_value_t = 0, requires = "points")]
        query: usize,
        #[arg(long, required_unless_present = "points")]
        target: Option<String>,
        /// Formula choice, as `contrast=NAME` or `intrinsic=NAME`.
        #[arg(long = "metric-variant")]
        metric_variant: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Region to find peers for.
    #[arg(long)]
    target: String,
    /// Neighbors kept by the first filter [default: 8].
    #[arg(long)]
    p: Option<usize>,
    /// Second-filter cluster count, or `auto` [default: auto].
    #[arg(long)]
    k: Option<ClusterCount>,
    /// Baseline cluster count, or `auto` [default: 5].
    #[arg(long)]
    baseline_k: Option<ClusterCount>,
    #[command(flatten)]
    cluster: ClusterArgs,
    /// Formula choice, as `contrast=NAME` or `intrinsic=NAME`.
    #[arg(long = "metric-variant")]
    metric_variant: Vec<String>,
    /// Indicator values fed to the similarity stage.
    #[arg(long, value_parser = parse_similarity_input)]
    similarity_input: Option<SimilarityInput>,
    /// Also write neighbor, similarity and cluster tables to the output directory.
    #[arg(long)]
    keep_intermediate: bool,
}

fn parse_similarity_input(s: &str) -> Result<SimilarityInput, String> {
    s.parse()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Kind::Usage.exit_code()
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.common, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { kind, message }) => {
            eprintln!("stdsa: error: {message}");
            kind.exit_code()
        }
    }
}
