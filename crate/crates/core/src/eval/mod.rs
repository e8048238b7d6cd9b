//! Summary-quality metrics: ROUGE-1/2/L, length fraction and a repetition
//! flag, plus corpus-level mean (standard deviation) aggregation.

mod aggregate;
mod rouge;
mod stem;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::word_tokenize;

pub use aggregate::{aggregate, render_table, EvalSummary, MeanStd, RunningStats};
pub use rouge::{f1, lcs_length, rouge_l, rouge_n, RougeScore};
pub use stem::{
    stem_normalize, stemmer_by_name, IdentityStemmer, LithuanianLightStemmer, Stemmer,
    STEMMER_NAMES,
};

/// A text is repetitive when a non-stop word occurs more than this many
/// times.
pub const REPETITION_THRESHOLD: usize = 7;

/// Lithuanian "and", exempt from the repetition rule.
pub const DEFAULT_STOP_WORDS: &[&str] = &["ir"];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("reference text is empty")]
    EmptyReference,
    #[error("cannot aggregate zero records")]
    NoRecords,
    #[error("unknown stemmer {0:?}")]
    UnknownStemmer(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub length_fraction: f64,
    pub repetitive: bool,
}

/// Generated-to-reference ratio of character counts (Unicode scalars).
pub fn length_fraction(generated: &str, reference: &str) -> Result<f64, EvalError> {
    let reference_chars = reference.chars().count();
    if reference_chars == 0 {
        return Err(EvalError::EmptyReference);
    }
    Ok(generated.chars().count() as f64 / reference_chars as f64)
}

/// True iff some lowercase word outside `stop_words` occurs more than
/// [`REPETITION_THRESHOLD`] times.
pub fn is_repetitive(text: &str, stop_words: &HashSet<String>) -> bool {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for word in word_tokenize(text, true) {
        if stop_words.contains(&word) {
            continue;
        }
        let c = counts.entry(word).or_insert(0);
        *c += 1;
        if *c > REPETITION_THRESHOLD {
            return true;
        }
    }
    false
}

/// Scores one candidate against its reference.
pub struct Evaluator {
    stemmer: Box<dyn Stemmer>,
    stop_words: HashSet<String>,
}

impl Evaluator {
    pub fn new(stemmer: Box<dyn Stemmer>, stop_words: HashSet<String>) -> Self {
        Self {
            stemmer,
            stop_words,
        }
    }

    /// Uses the named stemmer and [`DEFAULT_STOP_WORDS`].
    pub fn with_stemmer(name: &str) -> Result<Self, EvalError> {
        Ok(Self::new(
            stemmer_by_name(name)?,
            DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect(),
        ))
    }

    pub fn stemmer_name(&self) -> &'static str {
        self.stemmer.name()
    }

    /// ROUGE runs on lowercased, stemmed word tokens; length fraction and
    /// repetition use the raw texts.
    pub fn evaluate(&self, candidate: &str, reference: &str) -> Result<EvalRecord, EvalError> {
        let length_fraction = length_fraction(candidate, reference)?;
        let cand = stem_normalize(&word_tokenize(candidate, true), self.stemmer.as_ref());
        let refs = stem_normalize(&word_tokenize(reference, true), self.stemmer.as_ref());
        Ok(EvalRecord {
            rouge1: rouge_n(&cand, &refs, 1),
            rouge2: rouge_n(&cand, &refs, 2),
            rouge_l: rouge_l(&cand, &refs),
            length_fraction,
            repetitive: is_repetitive(candidate, &self.stop_words),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stops() -> HashSet<String> {
        DEFAULT_STOP_WORDS.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn length_fraction_cases() {
        assert_eq!(length_fraction("abc", "xyz").unwrap(), 1.0);
        assert_eq!(
            length_fraction(&"a".repeat(80), &"b".repeat(100)).unwrap(),
            0.8
        );
        assert_eq!(length_fraction("", "ref").unwrap(), 0.0);
        // Diacritics count once.
        assert_eq!(length_fraction("ąčę", "abc").unwrap(), 1.0);
        assert!(matches!(
            length_fraction("x", ""),
            Err(EvalError::EmptyReference)
        ));
    }

    #[test]
    fn repetition_rule() {
        let eight = ["labas"; 8].join(" ");
        assert!(is_repetitive(&eight, &stops()));
        let seven = ["labas"; 7].join(" ");
        assert!(!is_repetitive(&seven, &stops()));
        let conj = format!(
            "{} {}",
            vec!["ir"; 20].join(" "),
            ["kitas"; 7].join(" ")
        );
        assert!(!is_repetitive(&conj, &stops()));
        // Case and punctuation do not hide repeats.
        assert!(is_repetitive(
            "Labas, labas. LABAS! labas labas labas labas labas",
            &stops()
        ));
    }

    #[test]
    fn repetition_ignores_order() {
        let a = "x y x y x y x y x y x y x y x y";
        let mut words: Vec<&str> = a.split(' ').collect();
        words.sort_unstable();
        assert_eq!(
            is_repetitive(a, &stops()),
            is_repetitive(&words.join(" "), &stops())
        );
    }

    #[test]
    fn evaluator_stems_before_rouge() {
        let plain = Evaluator::with_stemmer("identity").unwrap();
        let lt = Evaluator::with_stemmer("lithuanian-light").unwrap();
        let r = plain.evaluate("Namas stovi", "namo stovi").unwrap();
        assert_eq!(r.rouge1.f1, 0.5);
        let r = lt.evaluate("Namas stovi", "namo stovi").unwrap();
        assert_eq!(r.rouge1.f1, 1.0);
        assert!(Evaluator::with_stemmer("nope").is_err());
    }
}
