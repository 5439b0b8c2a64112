//! `sensecol` command-line runner.
//!
//! Every artifact written starts with `##` lines echoing the full resolved
//! configuration, so a file alone is enough to rerun the command.

mod commands;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sensecol::{parse_kinds, FeatureKind, FoldUnit, DEFAULT_SMOOTHING};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sensecol", version, about = "Collocation decision lists for word sense disambiguation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one decision list per target word and dump the rules.
    Train(TrainArgs),
    /// Tag a corpus with a rule dump written by `train`.
    Tag(TagArgs),
    /// In-corpus k-fold cross-validation.
    Xval(XvalArgs),
    /// Train on the first corpus, tag the second.
    Cross(CrossArgs),
    /// Tag each category of the first corpus with lists trained on the
    /// second corpus and on the remaining categories.
    Categories(PairArgs),
    /// Shared and contradicting collocations between two corpora.
    Agree(AgreeArgs),
    /// Generate a synthetic annotated corpus.
    Synth(SynthArgs),
}

fn kinds_arg(s: &str) -> Result<BTreeSet<FeatureKind>, String> {
    parse_kinds(s).map_err(|e| e.to_string())
}

fn fold_unit_arg(s: &str) -> Result<FoldUnit, String> {
    s.parse().map_err(|e: sensecol::Error| e.to_string())
}

/// Aliased so clap takes the parsed list as one value instead of repeating
/// the flag.
pub type WordList = Vec<String>;

fn words_arg(s: &str) -> Result<WordList, String> {
    let words: Vec<String> = s.split(',').map(str::trim).filter(|w| !w.is_empty()).map(String::from).collect();
    if words.is_empty() {
        return Err("empty word list".into());
    }
    Ok(words)
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Comma-separated target keys (default: every key present).
    #[arg(long, value_parser = words_arg)]
    pub words: Option<WordList>,
    /// Kind names or groups: local-content, local-posfun, global, all.
    #[arg(long, value_parser = kinds_arg, default_value = "all")]
    pub kinds: BTreeSet<FeatureKind>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    /// Rule dump written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct XvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_parser = fold_unit_arg, default_value = "example")]
    pub fold_unit: FoldUnit,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CrossArgs {
    /// Training corpus, then test corpus.
    #[arg(long, num_args = 1, required = true)]
    pub corpus: Vec<PathBuf>,
    /// Sample both corpora to the same number of examples per word.
    #[arg(long)]
    pub equalize: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Categorized corpus, then the outside corpus.
    #[arg(long, num_args = 1, required = true)]
    pub corpus: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AgreeArgs {
    /// First corpus, then second corpus.
    #[arg(long, num_args = 1, required = true)]
    pub corpus: Vec<PathBuf>,
    /// Also write contradiction details here.
    #[arg(long)]
    pub detail: Option<PathBuf>,
    #[arg(long, value_parser = kinds_arg, default_value = "local-content")]
    pub kinds: BTreeSet<FeatureKind>,
    #[arg(long, value_parser = words_arg)]
    pub words: Option<WordList>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML corpus description (default: the built-in demo).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the seed of the description.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            eprintln!("{line}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(commands::Failure::Data(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
