use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tw_core::rules::RuleId;

#[derive(Debug, Parser)]
#[command(name = "tw", version, about = "Enumerate, eliminate and identify distance-5 toroidal surgery configurations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Directory for trace.json, report.md and manifest.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Data directory (default: $TW_DATA_DIR, then the bundled data/).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustive search over s = 2 graph pairs.
    Enumerate(EnumerateArgs),
    /// Route every s >= 4 configuration through the decision tree.
    Eliminate(EliminateArgs),
    /// Run the surgery pipeline on the surviving pair.
    Identify(IdentifyArgs),
    /// Check the final slope formulas over a range of n.
    VerifySlopes(VerifySlopesArgs),
    /// Render trace files as Markdown or merged JSON.
    Report(ReportArgs),
    /// Re-hash the inputs recorded in a run directory's manifest.
    CheckManifest(CheckManifestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub s: Option<u32>,
    /// Report labelled survivors instead of symmetry classes.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Switch off a rule (repeatable), e.g. L2.4 or SC-CONN.
    #[arg(long = "disable-rule", value_parser = parse_rule)]
    pub disable_rule: Vec<RuleId>,
    /// Write a resumable checkpoint every N configurations.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Continue from the checkpoint in --out.
    #[arg(long)]
    pub resume: bool,
    /// Stop after this many pairs with a resumable checkpoint.
    #[arg(long)]
    pub max_pairs: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EliminateArgs {
    #[arg(long)]
    pub max_s: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Args)]
pub struct IdentifyArgs {
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    /// survivors.json from an enumerate run (default: search again).
    #[arg(long)]
    pub survivors: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifySlopesArgs {
    /// Inclusive range `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    pub n_range: Option<String>,
    /// Bound on |p| and |q| for the framing sweep.
    #[arg(long)]
    pub pq_bound: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Md,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, value_enum, default_value = "md")]
    pub format: FormatArg,
    /// Trace files (default: trace.json in --out).
    pub traces: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckManifestArgs {
    /// Run directory containing manifest.json.
    pub dir: PathBuf,
}

fn parse_rule(s: &str) -> Result<RuleId, String> {
    s.parse()
}
