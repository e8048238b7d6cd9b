//! News-article ingestion, copy filtering, corpus statistics and the
//! train/validation split.
//!
//! Lengths are counted in Unicode scalar values after collapsing whitespace
//! runs to single spaces and trimming the ends.

mod filter;
mod split;
mod stats;
mod substring;

use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{
    filter_article, filter_articles, overlap_ratio, Decision, FilterConfig, RejectReason,
};
pub use split::split_validation;
pub use stats::{corpus_stats, FilterReport, SourceStats};
pub use substring::{longest_common_substring_len, SuffixAutomaton};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("summary is empty")]
    EmptySummary,
    #[error("cannot hold out {requested} articles from {available}")]
    TooManyValidation { requested: usize, available: usize },
    #[error("invalid filter config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CorpusError {
    /// Record-level errors leave the rest of the stream usable.
    pub fn is_record_error(&self) -> bool {
        matches!(self, CorpusError::Record { .. })
    }
}

/// One news document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Article {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published_at: Option<NaiveDate>,
    pub summary: String,
    pub body: String,
}

impl Article {
    pub fn validate(&self) -> Result<(), String> {
        if normalize_whitespace(&self.summary).is_empty() {
            return Err("summary is empty".to_string());
        }
        if normalize_whitespace(&self.body).is_empty() {
            return Err("body is empty".to_string());
        }
        Ok(())
    }
}

/// Collapses whitespace runs to one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Parses one JSON line into a validated article.
pub fn parse_article(line: usize, text: &str) -> Result<Article, CorpusError> {
    let article: Article = serde_json::from_str(text).map_err(|e| CorpusError::Record {
        line,
        message: e.to_string(),
    })?;
    article
        .validate()
        .map_err(|message| CorpusError::Record { line, message })?;
    Ok(article)
}

/// A parsed article and its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub line: usize,
    pub article: Article,
}

/// Streaming reader over a line-delimited JSON article file. Blank lines are
/// skipped; malformed lines yield [`CorpusError::Record`] and reading
/// continues.
pub struct ArticleReader<R> {
    lines: Lines<R>,
    line: usize,
    failed: bool,
}

impl<R: BufRead> ArticleReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line: 0,
            failed: false,
        }
    }
}

impl<R: BufRead> Iterator for ArticleReader<R> {
    type Item = Result<Ingested, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            return Some(parse_article(self.line, &text).map(|article| Ingested {
                line: self.line,
                article,
            }));
        }
    }
}

/// Opens an article file. Failing to open is fatal; per-line problems are
/// reported through the stream.
pub fn ingest(path: &Path) -> Result<ArticleReader<BufReader<File>>, CorpusError> {
    Ok(ArticleReader::new(BufReader::new(File::open(path)?)))
}

/// Writes articles as line-delimited JSON.
pub fn write_articles<'a, W: Write>(
    mut out: W,
    articles: impl IntoIterator<Item = &'a Article>,
) -> Result<(), CorpusError> {
    for a in articles {
        serde_json::to_writer(&mut out, a)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
