//! Language-model contract, probability shaping and likelihood.
//!
//! All logarithms are natural; likelihoods are reported in nats.

mod ngram;
mod table;

use std::ops::Deref;

use thiserror::Error;

use crate::tokenizer::{TokenId, TokenSequence, TokenizerError, Vocabulary};

pub use ngram::{NGramModel, BEGIN};
pub use table::{fixture_m1, BigramTableModel};

/// Tolerance on the total mass of a [`Distribution`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("temperature must be finite and > 0, got {0}")]
    InvalidTemperature(f64),
    #[error("every logit is -inf")]
    AllMasked,
    #[error("logit {index} is {value}; only finite values or -inf are allowed")]
    InvalidLogits { index: usize, value: f64 },
    #[error("probability vector is not normalized (sum {sum})")]
    NotNormalized { sum: f64 },
    #[error("probability {value} at index {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("context {context:?} was never observed and alpha = 0")]
    UndefinedDistribution { context: Vec<TokenId> },
    #[error("no transition row for context {context:?}")]
    UnknownContext { context: Vec<TokenId> },
    #[error("zero probability for token {token} in sequence {sequence} at position {position}")]
    ZeroProbability {
        sequence: usize,
        position: usize,
        token: TokenId,
    },
    #[error("n-gram order must be >= 1")]
    InvalidOrder,
    #[error("smoothing alpha must be finite and >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("model was trained with vocabulary {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },
    #[error("model output has length {found}, vocabulary has {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Next-token scorer conditioned on a prefix of token ids.
///
/// Implementations must be deterministic for a fixed prefix and return one
/// entry per vocabulary id.
pub trait LanguageModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    fn next_logits(&self, prefix: &[TokenId]) -> Result<Logits, LmError>;

    /// Normalized next-token distribution. The default is the softmax of
    /// [`LanguageModel::next_logits`]; count-based models override it with
    /// their exact probabilities.
    fn next_distribution(&self, prefix: &[TokenId]) -> Result<Distribution, LmError> {
        softmax(&self.next_logits(prefix)?)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for &M {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn next_logits(&self, prefix: &[TokenId]) -> Result<Logits, LmError> {
        (**self).next_logits(prefix)
    }

    fn next_distribution(&self, prefix: &[TokenId]) -> Result<Distribution, LmError> {
        (**self).next_distribution(prefix)
    }
}

/// Unnormalized log-scores, one per vocabulary id. `-inf` marks a banned
/// token.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits(pub Vec<f64>);

impl Deref for Logits {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Logits {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A probability vector over vocabulary ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates entries in `[0, 1]` summing to 1 within
    /// [`NORMALIZATION_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self, LmError> {
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(LmError::InvalidProbability { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(LmError::NotNormalized { sum });
        }
        Ok(Self(probs))
    }

    /// Divides nonnegative weights by their sum. Returns `None` when the
    /// total weight is zero.
    pub fn from_weights(mut weights: Vec<f64>) -> Option<Self> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return None;
        }
        for w in &mut weights {
            *w /= sum;
        }
        Some(Self(weights))
    }

    /// All mass on `id`.
    pub fn one_hot(len: usize, id: TokenId) -> Self {
        let mut probs = vec![0.0; len];
        probs[id as usize] = 1.0;
        Self(probs)
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![1.0 / len as f64; len])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Highest-probability id; ties go to the lower id.
    pub fn argmax(&self) -> TokenId {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best as TokenId
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    pub fn support(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i as TokenId)
    }
}

impl Deref for Distribution {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Max-shifted softmax; `-inf` entries get probability 0.
pub fn softmax(logits: &Logits) -> Result<Distribution, LmError> {
    let mut max = f64::NEG_INFINITY;
    for (index, &value) in logits.iter().enumerate() {
        if value.is_nan() || value == f64::INFINITY {
            return Err(LmError::InvalidLogits { index, value });
        }
        max = max.max(value);
    }
    if max == f64::NEG_INFINITY {
        return Err(LmError::AllMasked);
    }
    let weights: Vec<f64> = logits.iter().map(|&y| (y - max).exp()).collect();
    Ok(Distribution::from_weights(weights).expect("max entry contributes weight 1"))
}

/// Softmax of `logits / tau`.
pub fn apply_temperature(logits: &Logits, tau: f64) -> Result<Distribution, LmError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(LmError::InvalidTemperature(tau));
    }
    if tau == 1.0 {
        return softmax(logits);
    }
    softmax(&Logits(logits.iter().map(|&y| y / tau).collect()))
}

/// Negative log-likelihood of a dataset, in nats.
///
/// Every sequence is scored through a terminal eos (appended unless already
/// present), so each sequence contributes `len + 1` events.
pub fn negative_log_likelihood<M: LanguageModel + ?Sized>(
    model: &M,
    dataset: &[TokenSequence],
) -> Result<f64, LmError> {
    let eos = model.vocab().eos();
    let mut total = 0.0;
    for (k, seq) in dataset.iter().enumerate() {
        model.vocab().check_ids(seq)?;
        let mut ids = seq.to_vec();
        if ids.last() != Some(&eos) {
            ids.push(eos);
        }
        let mut seq_log_prob = 0.0;
        for i in 0..ids.len() {
            let dist = model.next_distribution(&ids[..i])?;
            let p = dist[ids[i] as usize];
            if p <= 0.0 {
                return Err(LmError::ZeroProbability {
                    sequence: k,
                    position: i,
                    token: ids[i],
                });
            }
            seq_log_prob += p.ln();
        }
        total -= seq_log_prob;
    }
    Ok(total)
}
