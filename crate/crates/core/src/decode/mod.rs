//! Greedy, beam and sampling decoders over any [`LanguageModel`].
//!
//! Each step shapes the model's next-token distribution in a fixed order:
//! temperature, then top-k, then top-p, then the no-repeat n-gram ban, then
//! renormalization. Greedy and plain beam search skip the top-k/top-p
//! truncation. Hypothesis scores are sums of the natural log of the selected
//! token's probability under the shaped distribution.

mod filters;
mod sample;
mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lm::{apply_temperature, Distribution, LanguageModel, LmError};
use crate::tokenizer::{detokenize, TokenId, TokenSequence, TokenizerError, Vocabulary};

pub use filters::{banned_tokens, block_repeated_ngrams, top_k_filter, top_p_filter, TOP_P_SLACK};
pub use sample::{rng_from_seed, sample_decode, sample_token, DecodeRng};
pub use search::{beam_search, beam_search_hypotheses, greedy_decode};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("invalid decode config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] LmError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Beam,
    Sample,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Beam => "beam",
            Method::Sample => "sample",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(Method::Greedy),
            "beam" => Ok(Method::Beam),
            "sample" => Ok(Method::Sample),
            other => Err(format!("unknown decoding method {other:?}")),
        }
    }
}

/// Decoding parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeConfig {
    pub method: Method,
    pub beam_size: usize,
    pub top_k: Option<usize>,
    pub top_p: Option<f64>,
    pub temperature: f64,
    pub no_repeat_ngram_size: Option<usize>,
    /// Maximum number of generated tokens (eos included).
    pub max_length: usize,
    pub seed: u64,
    /// Beam search draws each hypothesis' successors from its truncated
    /// distribution instead of expanding every token.
    pub sample_within_beam: bool,
    /// Exponent of the final beam ranking `log_prob / len^penalty`.
    /// 0 ranks by raw log-probability.
    pub length_penalty: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            method: Method::Beam,
            beam_size: 10,
            top_k: None,
            top_p: None,
            temperature: 1.0,
            no_repeat_ngram_size: Some(2),
            max_length: 64,
            seed: 0,
            sample_within_beam: false,
            length_penalty: 0.0,
        }
    }
}

impl DecodeConfig {
    pub fn greedy() -> Self {
        Self {
            method: Method::Greedy,
            beam_size: 1,
            no_repeat_ngram_size: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let fail = |m: String| Err(DecodeError::InvalidConfig(m));
        if self.beam_size == 0 {
            return fail("beam_size must be >= 1".into());
        }
        if self.max_length == 0 {
            return fail("max_length must be >= 1".into());
        }
        if self.top_k == Some(0) {
            return fail("top_k must be >= 1".into());
        }
        if let Some(p) = self.top_p {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("top_p must be in (0, 1], got {p}"));
            }
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return fail(format!("temperature must be > 0, got {}", self.temperature));
        }
        if self.no_repeat_ngram_size == Some(0) {
            return fail("no_repeat_ngram_size must be >= 1 when set".into());
        }
        if !self.length_penalty.is_finite() {
            return fail("length_penalty must be finite".into());
        }
        Ok(())
    }
}

/// A partial or complete output sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub ids: TokenSequence,
    pub log_prob: f64,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Generated continuation, eos included when produced.
    pub tokens: TokenSequence,
    /// Detokenized continuation with special tokens removed.
    pub text: String,
    pub score: f64,
    pub steps: usize,
}

impl DecodeResult {
    pub(crate) fn from_hypothesis(
        hyp: Hypothesis,
        vocab: &Vocabulary,
    ) -> Result<Self, DecodeError> {
        let visible: Vec<TokenId> = hyp
            .ids
            .iter()
            .copied()
            .filter(|&t| !vocab.is_special(t))
            .collect();
        Ok(Self {
            text: detokenize(&visible, vocab)?,
            score: hyp.log_prob,
            steps: hyp.ids.len(),
            tokens: hyp.ids,
        })
    }
}

/// Runs the decoder selected by `config.method`.
pub fn decode<M: LanguageModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    match config.method {
        Method::Greedy => greedy_decode(model, prompt, config),
        Method::Beam => beam_search(model, prompt, config),
        Method::Sample => sample_decode(model, prompt, config),
    }
}

/// Decodes every prompt independently; prompt `i` uses seed
/// `config.seed + i`. Results follow prompt order and a failing prompt does
/// not stop the batch. Runs on the current rayon pool.
pub fn batch_decode<M: LanguageModel + ?Sized, P: AsRef<[TokenId]> + Sync>(
    model: &M,
    prompts: &[P],
    config: &DecodeConfig,
) -> Vec<Result<DecodeResult, DecodeError>> {
    prompts
        .par_iter()
        .enumerate()
        .map(|(i, prompt)| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            decode(model, prompt.as_ref(), &cfg)
        })
        .collect()
}

/// The shaped next-token distribution for one step.
///
/// `context` is prompt plus generated tokens; `generated` alone feeds the
/// repetition ban.
pub(crate) fn step_distribution<M: LanguageModel + ?Sized>(
    model: &M,
    context: &[TokenId],
    generated: &[TokenId],
    config: &DecodeConfig,
    truncate: bool,
) -> Result<Distribution, DecodeError> {
    let vocab_size = model.vocab().len();
    let mut dist = if config.temperature == 1.0 {
        model.next_distribution(context)?
    } else {
        apply_temperature(&model.next_logits(context)?, config.temperature)?
    };
    if dist.len() != vocab_size {
        return Err(LmError::WrongLength {
            expected: vocab_size,
            found: dist.len(),
        }
        .into());
    }
    if truncate {
        if let Some(k) = config.top_k {
            dist = top_k_filter(&dist, k);
        }
        if let Some(p) = config.top_p {
            dist = top_p_filter(&dist, p);
        }
    }
    if let Some(n) = config.no_repeat_ngram_size {
        dist = block_repeated_ngrams(generated, &dist, n, model.vocab().eos());
    }
    Ok(dist)
}

pub(crate) fn check_prompt(vocab: &Vocabulary, prompt: &[TokenId]) -> Result<(), DecodeError> {
    vocab.check_ids(prompt)?;
    Ok(())
}
