//! `mrm`: build reference indexes, harmonize datasets, and run batch
//! evaluations.
//!
//! Exit status: 0 success, 1 generic failure, 2 missing input, 3 parse error.

mod commands;
mod config;
mod failure;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_input_spec, RunConfig};
use failure::{Failure, EXIT_GENERIC};

#[derive(Parser)]
#[command(
    name = "mrm",
    version,
    about = "Multidimensional reference model for lexical matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the dimension files of a model directory into an index file.
    BuildIndex(Options),
    /// Match input datasets and write the match dump, harmonized dataset and report.
    Match(Options),
    /// Run the batch comparison of the baseline and multidimensional matchers.
    Evaluate(Options),
    /// Print index statistics.
    Stats(Options),
}

#[derive(Args, Default)]
struct Options {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the dimension files.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Compiled index file.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Input file as `path[:format]` (tabular, semistructured, unstructured). Repeatable.
    #[arg(long = "input", value_name = "PATH[:FORMAT]")]
    inputs: Vec<String>,
    /// Baseline term list, one term per line.
    #[arg(long)]
    srm_terms: Option<PathBuf>,
    /// Output directory (index file path for build-index).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    srm_threshold: Option<f64>,
    #[arg(long)]
    mrm_threshold: Option<f64>,
    /// Select purely by score instead of preferring context candidates.
    #[arg(long)]
    no_context_precedence: bool,
    /// Let antonyms take part in context precedence.
    #[arg(long)]
    antonym_context: bool,
    /// Match lexical-semantic roots exactly only.
    #[arg(long)]
    exact_lexical: bool,
    /// Also index sentence pairs word by word.
    #[arg(long)]
    pair_expansion: bool,
    /// Number of cumulative batches.
    #[arg(long)]
    batches: Option<usize>,
    /// What counts as a term: tokens or distinct-roots.
    #[arg(long)]
    term_counting: Option<String>,
}

impl Options {
    fn into_config(self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        let cwd = Path::new("");
        let flags = |key: &str, value: &str, config: &mut RunConfig| {
            config
                .set(key, value, cwd)
                .map_err(|e| Failure::usage(format!("--{}: {e}", key.replace('_', "-"))))
        };
        if self.model_dir.is_some() {
            config.model_dir = self.model_dir;
        }
        if self.index.is_some() {
            config.index = self.index;
        }
        if self.srm_terms.is_some() {
            config.srm_terms = self.srm_terms;
        }
        if self.out.is_some() {
            config.out = self.out;
        }
        if !self.inputs.is_empty() {
            config.inputs = self.inputs.iter().map(|s| parse_input_spec(s)).collect();
        }
        if let Some(v) = self.srm_threshold {
            config.matching.srm_threshold = v;
        }
        if let Some(v) = self.mrm_threshold {
            config.matching.mrm_threshold = v;
        }
        if self.no_context_precedence {
            config.matching.context_precedence = false;
        }
        if self.antonym_context {
            config.matching.antonym_context = true;
        }
        if self.exact_lexical {
            config.matching.fuzzy_lexical = false;
        }
        if self.pair_expansion {
            config.parse.pair_expansion = true;
        }
        if let Some(v) = self.batches {
            config.batches = v;
        }
        if let Some(v) = &self.term_counting {
            flags("term_counting", v, &mut config)?;
        }
        Ok(config)
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::BuildIndex(o) => commands::cmd_build_index(&o.into_config()?),
        Command::Match(o) => commands::cmd_match(&o.into_config()?),
        Command::Evaluate(o) => commands::cmd_evaluate(&o.into_config()?),
        Command::Stats(o) => commands::cmd_stats(&o.into_config()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_GENERIC)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
