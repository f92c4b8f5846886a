use std::path::PathBuf;

use acueval::dataset::DatasetFormat;
use acueval::metaeval::{Coefficient, Matcher};
use acueval::pipeline::{Aggregation, Direction};
use acueval::pretrain::{PretrainScorer, DEFAULT_SHARD_SIZE};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "acueval",
    version,
    about = "Content-unit summarization evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dataset statistics as JSON.
    Stats(StatsArgs),
    /// Score every (example, system) cell of a dataset.
    Score(ScoreArgs),
    /// Correlate metric matrices with human scores.
    Benchmark(BenchmarkArgs),
    /// Compare generated content units with reference units.
    AcuQuality(QualityArgs),
    /// Build a regression corpus from candidate summaries.
    GenPretrain(PretrainArgs),
    /// Pairwise similarity of candidate summaries.
    CandidateSim(SimArgs),
}

fn parse_format(s: &str) -> Result<DatasetFormat, String> {
    s.parse().map_err(|e: acueval::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// rose-jsonl or rose-release.
    #[arg(long, default_value = "rose-jsonl", value_parser = parse_format)]
    pub format: DatasetFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtractorKind {
    Sentence,
    Gold,
    Fixture,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckerKind {
    Lexical,
    Cached,
    Remote,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value = "sentence")]
    pub extractor: ExtractorKind,
    /// JSON map from text to its units, for `--extractor fixture`.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lexical")]
    pub checker: CheckerKind,
    /// Inference service URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// TOML file with an `endpoint` key.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pass the unit's source text to the remote checker.
    #[arg(long)]
    pub contextual: bool,
    /// Entailment threshold; defaults to the checker's own.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Request timeout for remote backends, in seconds.
    #[arg(long, default_value_t = 300)]
    pub timeout: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Recall,
    F1,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Recall => Direction::Recall,
            DirectionArg::F1 => Direction::F1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregateArg {
    Label,
    Probability,
}

impl From<AggregateArg> for Aggregation {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::Label => Aggregation::Label,
            AggregateArg::Probability => Aggregation::Probability,
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub backends: BackendArgs,
    #[arg(long, value_enum, default_value = "recall")]
    pub direction: DirectionArg,
    #[arg(long = "aggregate", value_enum, default_value = "label")]
    pub aggregation: AggregateArg,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also time the remote one-stage scorer on every cell.
    #[arg(long)]
    pub one_stage: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

fn parse_coefficient(s: &str) -> Result<Coefficient, String> {
    s.parse().map_err(|e: acueval::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=PATH, got `{s}`"))?;
    if name.is_empty() || path.is_empty() {
        return Err(format!("expected NAME=PATH, got `{s}`"));
    }
    Ok((name.to_owned(), PathBuf::from(path)))
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Human score matrix (CSV).
    #[arg(long)]
    pub human: PathBuf,
    /// Metric matrix as NAME=PATH; repeatable.
    #[arg(long = "metric", required = true, value_parser = parse_metric)]
    pub metrics: Vec<(String, PathBuf)>,
    /// Metric the others are tested against.
    #[arg(long)]
    pub baseline: Option<String>,
    /// pearson, spearman or kendall; repeatable.
    #[arg(long = "coefficient", value_parser = parse_coefficient)]
    pub coefficients: Vec<Coefficient>,
    #[arg(long, default_value_t = acueval::metaeval::significance::DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

fn parse_matcher(s: &str) -> Result<Matcher, String> {
    s.parse().map_err(|e: acueval::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    /// JSON lines of `{"example_id", "generated": [..], "reference": [..]}`.
    #[arg(long)]
    pub input: PathBuf,
    /// rouge1, rouge2 or rougeL.
    #[arg(long, default_value = "rouge1", value_parser = parse_matcher)]
    pub matcher: Matcher,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

fn parse_scorer(s: &str) -> Result<PretrainScorer, String> {
    s.parse().map_err(|e: acueval::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    /// JSON lines of `{"example_id", "reference", "candidates": [..]}`.
    #[arg(long, required_unless_present = "sources", conflicts_with = "sources")]
    pub input: Option<PathBuf>,
    /// JSON lines of `{"example_id", "source", "reference"}`; candidates
    /// come from the remote generator.
    #[arg(long)]
    pub sources: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    pub num_candidates: usize,
    /// two-stage or rouge-avg.
    #[arg(long, default_value = "two-stage", value_parser = parse_scorer)]
    pub scorer: PretrainScorer,
    #[command(flatten)]
    pub backends: BackendArgs,
    #[arg(long = "aggregate", value_enum, default_value = "label")]
    pub aggregation: AggregateArg,
    #[arg(long, default_value_t = DEFAULT_SHARD_SIZE)]
    pub shard_size: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}
