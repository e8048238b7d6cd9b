use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use sumdec_core::decode::{DecodeConfig, Method};
use sumdec_core::eval::STEMMER_NAMES;
use sumdec_core::FilterConfig;

use crate::CliError;

pub const DEFAULT_NGRAM_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_N_VALIDATION: usize = 4096;
pub const DEFAULT_STEMMER: &str = "identity";

const PRECEDENCE_HELP: &str = "\
Settings resolve as built-in defaults, then values from --config (a JSON
object whose keys are the long flag names with '-' replaced by '_'), then
explicit flags. Decoding defaults: beam search, 10 beams, no-repeat n-gram
size 2 (0 disables), max length 64, temperature 1. Filter defaults: summary
> 10 chars, body > 100 chars, body >= 2x summary, overlap ratio < 0.2.

Exit status: 0 success, 2 usage error, 3 I/O error, 4 invalid data.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Drop articles that fail the length and copy-overlap rules
    Filter,
    /// Per-source statistics of the articles that pass the filter
    Stats,
    /// Hold out a random validation set
    Split,
    /// Train an n-gram language model on articles
    TrainLm,
    /// Decode prompts with a trained model
    Decode,
    /// Score candidate summaries against references
    Evaluate,
    /// filter, split, train-lm, decode and evaluate in one run
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Filter => "filter",
            Command::Stats => "stats",
            Command::Split => "split",
            Command::TrainLm => "train-lm",
            Command::Decode => "decode",
            Command::Evaluate => "evaluate",
            Command::Pipeline => "pipeline",
        }
    }

    fn needs_output(self) -> bool {
        !matches!(self, Command::Stats)
    }
}

/// Every setting as an optional override. Shared by the command line and
/// the JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Input file
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file, or directory for split and pipeline
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Trained model file (decode)
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Vocabulary file; derived from the corpus when omitted
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Where to write the JSON report; stdout when omitted
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses one per core
    #[arg(long)]
    pub workers: Option<usize>,
    /// greedy, beam or sample
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Number of beams kept per step
    #[arg(long)]
    pub beam_size: Option<usize>,
    /// Keep only the k most likely tokens
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Keep the smallest set of tokens whose mass reaches p
    #[arg(long)]
    pub top_p: Option<f64>,
    /// Divide logits by this before the softmax
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Ban repeated n-grams of this size; 0 disables
    #[arg(long)]
    pub no_repeat_ngram_size: Option<usize>,
    /// Stop after this many generated tokens
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Draw beam successors from the truncated distribution
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub sample_within_beam: Option<bool>,
    /// Final beam ranking divides log-probability by length^penalty
    #[arg(long, allow_negative_numbers = true)]
    pub length_penalty: Option<f64>,
    /// Context length plus one
    #[arg(long)]
    pub ngram_order: Option<usize>,
    /// Additive smoothing constant
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Articles held out for validation
    #[arg(long)]
    pub n_validation: Option<usize>,
    /// identity or lithuanian-light
    #[arg(long)]
    pub stemmer: Option<String>,
    /// Summaries must be longer than this
    #[arg(long)]
    pub min_summary_chars: Option<usize>,
    /// Bodies must be longer than this
    #[arg(long)]
    pub min_body_chars: Option<usize>,
    /// Minimum body length over summary length
    #[arg(long)]
    pub min_ratio: Option<f64>,
    /// Longest shared substring over summary length must stay below this
    #[arg(long)]
    pub max_overlap_ratio: Option<f64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

macro_rules! overlay {
    ($base:expr, $top:expr, [$($field:ident),* $(,)?]) => {
        Overrides { $($field: $top.$field.or($base.$field),)* }
    };
}

impl Overrides {
    /// Fields set in `top` win.
    fn overlay(self, top: Overrides) -> Overrides {
        overlay!(
            self,
            top,
            [
                input,
                output,
                model,
                vocab,
                report,
                seed,
                workers,
                method,
                beam_size,
                top_k,
                top_p,
                temperature,
                no_repeat_ngram_size,
                max_length,
                sample_within_beam,
                length_penalty,
                ngram_order,
                alpha,
                n_validation,
                stemmer,
                min_summary_chars,
                min_body_chars,
                min_ratio,
                max_overlap_ratio,
            ]
        )
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sumdec",
    version,
    about = "Summarization corpus, decoding and evaluation runs"
)]
#[command(after_help = PRECEDENCE_HELP)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON file with settings
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmParams {
    pub order: usize,
    pub alpha: f64,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub decode: DecodeConfig,
    pub filter: FilterConfig,
    pub lm: LmParams,
    pub n_validation: usize,
    pub stemmer: String,
}

/// Parses arguments (without the program name) into a validated config.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = std::iter::once(OsString::from("sumdec")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Clap(Box::new(e)))?;
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    resolve(cli.command, file.overlay(cli.overrides))
}

fn read_config_file(path: &Path) -> Result<Overrides, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))
}

fn resolve(command: Command, o: Overrides) -> Result<RunConfig, CliError> {
    let usage = |m: String| Err(CliError::Usage(m));
    let Some(input) = o.input else {
        return usage(format!("{} requires --input", command.name()));
    };
    if input.as_os_str().is_empty() {
        return usage("--input must not be empty".into());
    }
    if command.needs_output() && o.output.as_ref().map_or(true, |p| p.as_os_str().is_empty()) {
        return usage(format!("{} requires --output", command.name()));
    }
    if command == Command::Decode && o.model.is_none() {
        return usage("decode requires --model".into());
    }
    let seed = o.seed.unwrap_or(0);
    let defaults = DecodeConfig::default();
    let decode = DecodeConfig {
        method: o.method.unwrap_or(defaults.method),
        beam_size: o.beam_size.unwrap_or(defaults.beam_size),
        top_k: o.top_k,
        top_p: o.top_p,
        temperature: o.temperature.unwrap_or(defaults.temperature),
        no_repeat_ngram_size: match o.no_repeat_ngram_size {
            Some(0) => None,
            Some(n) => Some(n),
            None => defaults.no_repeat_ngram_size,
        },
        max_length: o.max_length.unwrap_or(defaults.max_length),
        seed,
        sample_within_beam: o.sample_within_beam.unwrap_or(defaults.sample_within_beam),
        length_penalty: o.length_penalty.unwrap_or(defaults.length_penalty),
    };
    decode
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fd = FilterConfig::default();
    let filter = FilterConfig {
        min_summary_chars: o.min_summary_chars.unwrap_or(fd.min_summary_chars),
        min_body_chars: o.min_body_chars.unwrap_or(fd.min_body_chars),
        min_body_to_summary_ratio: o.min_ratio.unwrap_or(fd.min_body_to_summary_ratio),
        max_overlap_ratio: o.max_overlap_ratio.unwrap_or(fd.max_overlap_ratio),
    };
    filter
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let lm = LmParams {
        order: o.ngram_order.unwrap_or(DEFAULT_NGRAM_ORDER),
        alpha: o.alpha.unwrap_or(DEFAULT_ALPHA),
    };
    if lm.order == 0 {
        return usage("--ngram-order must be >= 1".into());
    }
    if !(lm.alpha >= 0.0 && lm.alpha.is_finite()) {
        return usage(format!("--alpha must be >= 0, got {}", lm.alpha));
    }
    let stemmer = o.stemmer.unwrap_or_else(|| DEFAULT_STEMMER.to_string());
    if !STEMMER_NAMES.contains(&stemmer.as_str()) {
        return usage(format!(
            "unknown stemmer {stemmer:?}; expected one of {STEMMER_NAMES:?}"
        ));
    }
    Ok(RunConfig {
        command,
        input,
        output: o.output,
        model: o.model,
        vocab: o.vocab,
        report: o.report,
        seed,
        workers: o.workers.unwrap_or(0),
        decode,
        filter,
        lm,
        n_validation: o.n_validation.unwrap_or(DEFAULT_N_VALIDATION),
        stemmer,
    })
}

/// Argument list that parses back to `config`.
pub fn render(config: &RunConfig) -> Vec<String> {
    let mut args = vec![config.command.name().to_string()];
    let mut push = |flag: &str, value: String| {
        args.push(format!("--{flag}"));
        args.push(value);
    };
    let path = |p: &Path| p.to_string_lossy().into_owned();
    push("input", path(&config.input));
    for (flag, value) in [
        ("output", &config.output),
        ("model", &config.model),
        ("vocab", &config.vocab),
        ("report", &config.report),
    ] {
        if let Some(p) = value {
            push(flag, path(p));
        }
    }
    let d = &config.decode;
    push("seed", config.seed.to_string());
    push("workers", config.workers.to_string());
    push("method", d.method.as_str().to_string());
    push("beam-size", d.beam_size.to_string());
    if let Some(k) = d.top_k {
        push("top-k", k.to_string());
    }
    if let Some(p) = d.top_p {
        push("top-p", p.to_string());
    }
    push("temperature", d.temperature.to_string());
    push(
        "no-repeat-ngram-size",
        d.no_repeat_ngram_size.unwrap_or(0).to_string(),
    );
    push("max-length", d.max_length.to_string());
    push("sample-within-beam", d.sample_within_beam.to_string());
    push("length-penalty", d.length_penalty.to_string());
    push("ngram-order", config.lm.order.to_string());
    push("alpha", config.lm.alpha.to_string());
    push("n-validation", config.n_validation.to_string());
    push("stemmer", config.stemmer.clone());
    let f = &config.filter;
    push("min-summary-chars", f.min_summary_chars.to_string());
    push("min-body-chars", f.min_body_chars.to_string());
    push("min-ratio", f.min_body_to_summary_ratio.to_string());
    push("max-overlap-ratio", f.max_overlap_ratio.to_string());
    args
}
