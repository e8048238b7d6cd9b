use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sumdec_core::corpus::{self, corpus_stats, filter_articles, split_validation, Article};
use sumdec_core::decode::{batch_decode, DecodeConfig, DecodeResult, Method};
use sumdec_core::eval::{aggregate, render_table, EvalRecord, EvalSummary, Evaluator};
use sumdec_core::{FilterReport, NGramModel, TokenSequence, Vocabulary};

use crate::args::{Command, RunConfig};
use crate::output::{ensure_dir, jsonl, Staged};
use crate::text::{derive_vocabulary, encode, lead, prepare, PROMPT_WORDS};
use crate::CliError;

/// Runs the configured command on a pool of `config.workers` threads.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", config.workers)))?;
    let started = Instant::now();
    let result = pool.install(|| match config.command {
        Command::Filter => filter(config),
        Command::Stats => stats(config),
        Command::Split => split(config),
        Command::TrainLm => train_lm(config),
        Command::Decode => decode(config),
        Command::Evaluate => evaluate(config),
        Command::Pipeline => pipeline(config),
    });
    eprintln!(
        "{} finished in {:.2?}",
        config.command.name(),
        started.elapsed()
    );
    result
}

fn output(config: &RunConfig) -> &Path {
    config.output.as_deref().expect("validated at parse time")
}

/// Reads an article file. Malformed lines are reported and skipped.
fn read_articles(path: &Path) -> Result<(Vec<Article>, usize), CliError> {
    let reader = corpus::ingest(path).map_err(|e| CliError::from_corpus(path, e))?;
    let mut articles = Vec::new();
    let mut malformed = 0;
    for item in reader {
        match item {
            Ok(ingested) => articles.push(ingested.article),
            Err(e) if e.is_record_error() => {
                eprintln!("warning: {}: {e}", path.display());
                malformed += 1;
            }
            Err(e) => return Err(CliError::from_corpus(path, e)),
        }
    }
    Ok((articles, malformed))
}

/// Reads a strict JSONL file: any bad line fails the command.
fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        items.push(item);
    }
    Ok(items)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Stages the report at `--report`, or returns it for printing.
fn stage_report(
    staged: &mut Staged,
    config: &RunConfig,
    bytes: Vec<u8>,
) -> Result<Option<Vec<u8>>, CliError> {
    match &config.report {
        Some(path) => {
            staged.write_bytes(path, &bytes)?;
            Ok(None)
        }
        None => Ok(Some(bytes)),
    }
}

fn print_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

#[derive(Serialize)]
struct FilterOutput<'a> {
    #[serde(flatten)]
    report: &'a FilterReport,
    config_echo: &'a RunConfig,
}

fn filter_corpus(config: &RunConfig) -> Result<(Vec<Article>, FilterReport), CliError> {
    let (articles, malformed) = read_articles(&config.input)?;
    let decisions = filter_articles(&articles, &config.filter);
    let mut report = corpus_stats(articles.iter().zip(&decisions));
    report.malformed = malformed;
    let kept = articles
        .into_iter()
        .zip(&decisions)
        .filter(|(_, d)| d.is_keep())
        .map(|(a, _)| a)
        .collect();
    Ok((kept, report))
}

fn filter(config: &RunConfig) -> Result<(), CliError> {
    let (kept, report) = filter_corpus(config)?;
    let mut staged = Staged::new();
    let out = output(config);
    staged.write(out, jsonl(out, &kept))?;
    let echo = stage_report(
        &mut staged,
        config,
        to_json(&FilterOutput {
            report: &report,
            config_echo: config,
        })?,
    )?;
    staged.commit()?;
    eprintln!(
        "kept {} of {} articles ({} malformed lines)",
        report.kept, report.total, report.malformed
    );
    echo.map_or(Ok(()), |b| print_stdout(&b))
}

fn stats(config: &RunConfig) -> Result<(), CliError> {
    let (_, report) = filter_corpus(config)?;
    let mut staged = Staged::new();
    let json = to_json(&FilterOutput {
        report: &report,
        config_echo: config,
    })?;
    if let Some(path) = config.output.as_ref().or(config.report.as_ref()) {
        staged.write_bytes(path, &json)?;
    }
    staged.commit()?;
    print_stdout(report.render_table().as_bytes())
}

#[derive(Serialize)]
struct SplitOutput<'a> {
    train: usize,
    validation: usize,
    malformed: usize,
    config_echo: &'a RunConfig,
}

fn split(config: &RunConfig) -> Result<(), CliError> {
    let (articles, malformed) = read_articles(&config.input)?;
    let (train, validation) = split_validation(articles, config.n_validation, config.seed)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let dir = output(config);
    ensure_dir(dir)?;
    let mut staged = Staged::new();
    let train_path = dir.join("train.jsonl");
    let validation_path = dir.join("validation.jsonl");
    staged.write(&train_path, jsonl(&train_path, &train))?;
    staged.write(&validation_path, jsonl(&validation_path, &validation))?;
    let report = SplitOutput {
        train: train.len(),
        validation: validation.len(),
        malformed,
        config_echo: config,
    };
    let echo = stage_report(&mut staged, config, to_json(&report)?)?;
    staged.commit()?;
    echo.map_or(Ok(()), |b| print_stdout(&b))
}

fn load_vocabulary(path: &Path) -> Result<Vocabulary, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Vocabulary::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Training text for one article: the lead of the body followed by the
/// summary, so the model learns to continue a lead with a summary.
fn training_text(article: &Article) -> String {
    format!("{} {}", lead(&article.body, PROMPT_WORDS), article.summary)
}

fn train_model(config: &RunConfig, articles: &[Article]) -> Result<NGramModel, CliError> {
    let texts: Vec<String> = articles.iter().map(training_text).collect();
    let vocab = match &config.vocab {
        Some(path) => load_vocabulary(path)?,
        None => derive_vocabulary(texts.iter().map(String::as_str))
            .map_err(|e| CliError::Data(e.to_string()))?,
    };
    let sequences: Vec<TokenSequence> = texts
        .par_iter()
        .map(|t| encode(t, &vocab))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    NGramModel::train(
        Arc::new(vocab),
        &sequences,
        config.lm.order,
        config.lm.alpha,
    )
    .map_err(|e| CliError::Data(e.to_string()))
}

fn train_lm(config: &RunConfig) -> Result<(), CliError> {
    let (articles, _) = read_articles(&config.input)?;
    let model = train_model(config, &articles)?;
    let json = model
        .to_json(true)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut staged = Staged::new();
    staged.write_bytes(output(config), json.as_bytes())?;
    staged.commit()?;
    eprintln!(
        "trained order-{} model on {} articles, {} contexts",
        model.order(),
        articles.len(),
        model.context_count()
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecodeRequest {
    id: Value,
    prompt: String,
}

#[derive(Serialize)]
struct DecodeLine<'a> {
    id: &'a Value,
    text: &'a str,
    score: f64,
    steps: usize,
    config_echo: &'a DecodeConfig,
}

fn load_model(config: &RunConfig) -> Result<NGramModel, CliError> {
    let path = config.model.as_deref().expect("validated at parse time");
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let vocab = config
        .vocab
        .as_deref()
        .map(load_vocabulary)
        .transpose()?
        .map(Arc::new);
    NGramModel::from_json(&text, vocab)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn decode_prompts(
    model: &NGramModel,
    prompts: &[&str],
    config: &DecodeConfig,
) -> Result<Vec<DecodeResult>, CliError> {
    let vocab = model.vocabulary();
    let encoded: Vec<TokenSequence> = prompts
        .par_iter()
        .map(|p| encode(p, vocab))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    batch_decode(model, &encoded, config)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map(|mut d| {
                d.text = d.text.trim().to_string();
                d
            })
            .map_err(|e| CliError::Data(format!("prompt {i}: {e}")))
        })
        .collect()
}

fn decode(config: &RunConfig) -> Result<(), CliError> {
    let model = load_model(config)?;
    let requests: Vec<DecodeRequest> = read_jsonl(&config.input)?;
    let prompts: Vec<&str> = requests.iter().map(|r| r.prompt.as_str()).collect();
    let results = decode_prompts(&model, &prompts, &config.decode)?;
    let lines: Vec<DecodeLine> = requests
        .iter()
        .zip(&results)
        .map(|(req, res)| DecodeLine {
            id: &req.id,
            text: &res.text,
            score: res.score,
            steps: res.steps,
            config_echo: &config.decode,
        })
        .collect();
    let mut staged = Staged::new();
    let out = output(config);
    staged.write(out, jsonl(out, &lines))?;
    staged.commit()?;
    eprintln!("decoded {} prompts", lines.len());
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalPair {
    id: Value,
    candidate: String,
    reference: String,
}

#[derive(Serialize)]
struct MetricLine<'a> {
    id: &'a Value,
    #[serde(flatten)]
    record: &'a EvalRecord,
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    count: usize,
    stemmer: &'a str,
    summary: Option<&'a EvalSummary>,
    table: String,
    config_echo: &'a RunConfig,
}

fn method_label(config: &DecodeConfig) -> String {
    match (config.method, config.sample_within_beam) {
        (Method::Greedy, _) => "greedy".to_string(),
        (Method::Beam, false) => format!("beam search ({})", config.beam_size),
        (Method::Beam, true) => format!("sampled beam search ({})", config.beam_size),
        (Method::Sample, _) => "sampling".to_string(),
    }
}

fn score_pairs(
    config: &RunConfig,
    pairs: &[(&str, &str)],
) -> Result<(Vec<EvalRecord>, Option<EvalSummary>), CliError> {
    let evaluator =
        Evaluator::with_stemmer(&config.stemmer).map_err(|e| CliError::Usage(e.to_string()))?;
    let records: Vec<EvalRecord> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (cand, reference))| {
            evaluator
                .evaluate(cand, reference)
                .map_err(|e| CliError::Data(format!("pair {i}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let summary = if records.is_empty() {
        None
    } else {
        Some(aggregate(&records).map_err(|e| CliError::Data(e.to_string()))?)
    };
    Ok((records, summary))
}

fn eval_report<'a>(
    config: &'a RunConfig,
    count: usize,
    summary: Option<&'a EvalSummary>,
) -> EvalOutput<'a> {
    let label = method_label(&config.decode);
    let table = match summary {
        Some(s) => render_table(&[(label.as_str(), s)]),
        None => String::new(),
    };
    EvalOutput {
        count,
        stemmer: &config.stemmer,
        summary,
        table,
        config_echo: config,
    }
}

fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let pairs: Vec<EvalPair> = read_jsonl(&config.input)?;
    let texts: Vec<(&str, &str)> = pairs
        .iter()
        .map(|p| (p.candidate.as_str(), p.reference.as_str()))
        .collect();
    let (records, summary) = score_pairs(config, &texts)?;
    let lines: Vec<MetricLine> = pairs
        .iter()
        .zip(&records)
        .map(|(p, record)| MetricLine { id: &p.id, record })
        .collect();
    let report = eval_report(config, records.len(), summary.as_ref());
    let mut staged = Staged::new();
    let out = output(config);
    staged.write(out, jsonl(out, &lines))?;
    let echo = stage_report(&mut staged, config, to_json(&report)?)?;
    staged.commit()?;
    match echo {
        Some(bytes) => print_stdout(&bytes),
        None => print_stdout(report.table.as_bytes()),
    }
}

#[derive(Serialize)]
struct PipelineOutput<'a> {
    filter: &'a FilterReport,
    train: usize,
    validation: usize,
    evaluation: EvalOutput<'a>,
}

/// File names written by `pipeline` inside the output directory.
pub mod pipeline_files {
    pub const KEPT: &str = "kept.jsonl";
    pub const TRAIN: &str = "train.jsonl";
    pub const VALIDATION: &str = "validation.jsonl";
    pub const MODEL: &str = "model.json";
    pub const DECODED: &str = "decoded.jsonl";
    pub const METRICS: &str = "metrics.jsonl";
    pub const REPORT: &str = "report.json";
    pub const TABLE: &str = "report.txt";
}

fn pipeline(config: &RunConfig) -> Result<(), CliError> {
    use pipeline_files as f;
    let dir = output(config);
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let (kept, filter_report) = filter_corpus(config)?;
    eprintln!(
        "filter: kept {} of {}",
        filter_report.kept, filter_report.total
    );

    let n_validation = config.n_validation.min(kept.len());
    if n_validation < config.n_validation {
        eprintln!(
            "warning: holding out {n_validation} articles instead of {} (only {} kept)",
            config.n_validation,
            kept.len()
        );
    }
    let (train, validation) = split_validation(kept.clone(), n_validation, config.seed)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let mut staged = Staged::new();
    ensure_dir(dir)?;
    staged.write(&path(f::KEPT), jsonl(&path(f::KEPT), &kept))?;
    staged.write(&path(f::TRAIN), jsonl(&path(f::TRAIN), &train))?;
    staged.write(
        &path(f::VALIDATION),
        jsonl(&path(f::VALIDATION), &validation),
    )?;

    let mut decoded: Vec<DecodeResult> = Vec::new();
    if !validation.is_empty() {
        if train.is_empty() {
            return Err(CliError::Data(
                "no articles left for training after the validation split".into(),
            ));
        }
        let started = Instant::now();
        let model = train_model(config, &train)?;
        let json = model
            .to_json(true)
            .map_err(|e| CliError::Data(e.to_string()))?;
        staged.write_bytes(&path(f::MODEL), json.as_bytes())?;
        eprintln!(
            "train-lm: {} contexts in {:.2?}",
            model.context_count(),
            started.elapsed()
        );

        let started = Instant::now();
        let leads: Vec<String> = validation
            .iter()
            .map(|a| lead(&a.body, PROMPT_WORDS))
            .collect();
        let prompts: Vec<&str> = leads.iter().map(String::as_str).collect();
        decoded = decode_prompts(&model, &prompts, &config.decode)?;
        eprintln!(
            "decode: {} prompts in {:.2?}",
            decoded.len(),
            started.elapsed()
        );
    }
    let ids: Vec<Value> = (0..validation.len()).map(Value::from).collect();
    let lines: Vec<DecodeLine> = ids
        .iter()
        .zip(&decoded)
        .map(|(id, res)| DecodeLine {
            id,
            text: &res.text,
            score: res.score,
            steps: res.steps,
            config_echo: &config.decode,
        })
        .collect();
    staged.write(&path(f::DECODED), jsonl(&path(f::DECODED), &lines))?;

    let references: Vec<String> = validation.iter().map(|a| prepare(&a.summary)).collect();
    let pairs: Vec<(&str, &str)> = decoded
        .iter()
        .zip(&references)
        .map(|(d, r)| (d.text.as_str(), r.as_str()))
        .collect();
    let (records, summary) = score_pairs(config, &pairs)?;
    let metric_lines: Vec<MetricLine> = ids
        .iter()
        .zip(&records)
        .map(|(id, record)| MetricLine { id, record })
        .collect();
    staged.write(&path(f::METRICS), jsonl(&path(f::METRICS), &metric_lines))?;

    let evaluation = eval_report(config, records.len(), summary.as_ref());
    let table = evaluation.table.clone();
    let report = PipelineOutput {
        filter: &filter_report,
        train: train.len(),
        validation: validation.len(),
        evaluation,
    };
    staged.write_bytes(&path(f::REPORT), &to_json(&report)?)?;
    staged.write_bytes(&path(f::TABLE), table.as_bytes())?;
    staged.commit()?;
    print_stdout(table.as_bytes())
}
