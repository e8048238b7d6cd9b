use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Distribution, LanguageModel, LmError, Logits};
use crate::tokenizer::{TokenId, TokenSequence, Vocabulary};

/// Begin-of-sequence padding symbol. It sits outside the vocabulary range,
/// appears only in contexts and is never predicted.
pub const BEGIN: TokenId = TokenId::MAX;

const FORMAT: &str = "sumdec-ngram";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    next: BTreeMap<TokenId, u64>,
}

/// Count-based n-gram model with additive smoothing:
/// `P(w | ctx) = (count(ctx, w) + alpha) / (total(ctx) + alpha * V)`.
///
/// Contexts are the last `order - 1` ids of the prefix, left-padded with
/// [`BEGIN`]. Each training sequence ends with a terminal eos.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    vocab: Arc<Vocabulary>,
    counts: HashMap<Vec<TokenId>, ContextCounts>,
}

impl NGramModel {
    pub fn train<'a, I>(
        vocab: Arc<Vocabulary>,
        sequences: I,
        order: usize,
        alpha: f64,
    ) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        if order == 0 {
            return Err(LmError::InvalidOrder);
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(LmError::InvalidAlpha(alpha));
        }
        let eos = vocab.eos();
        let mut counts: HashMap<Vec<TokenId>, ContextCounts> = HashMap::new();
        let mut seen = 0usize;
        let mut padded = Vec::new();
        for seq in sequences {
            vocab.check_ids(seq)?;
            seen += 1;
            padded.clear();
            padded.resize(order - 1, BEGIN);
            padded.extend_from_slice(seq);
            if seq.last() != Some(&eos) {
                padded.push(eos);
            }
            for window in padded.windows(order) {
                let (context, next) = window.split_at(order - 1);
                let entry = counts.entry(context.to_vec()).or_default();
                entry.total += 1;
                *entry.next.entry(next[0]).or_insert(0) += 1;
            }
        }
        if seen == 0 {
            return Err(LmError::EmptyCorpus);
        }
        Ok(Self {
            order,
            alpha,
            vocab,
            counts,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    /// Raw count of `next` after `context` (context given without padding
    /// shortcuts: exactly `order - 1` ids, [`BEGIN`] allowed).
    pub fn count(&self, context: &[TokenId], next: TokenId) -> u64 {
        self.counts
            .get(context)
            .and_then(|c| c.next.get(&next))
            .copied()
            .unwrap_or(0)
    }

    /// The conditioning context for a prefix.
    pub fn context_of(&self, prefix: &[TokenId]) -> Vec<TokenId> {
        let width = self.order - 1;
        let mut context = Vec::with_capacity(width);
        if prefix.len() < width {
            context.resize(width - prefix.len(), BEGIN);
            context.extend_from_slice(prefix);
        } else {
            context.extend_from_slice(&prefix[prefix.len() - width..]);
        }
        context
    }

    fn probabilities(&self, prefix: &[TokenId]) -> Result<Vec<f64>, LmError> {
        let v = self.vocab.len();
        let context = self.context_of(prefix);
        match self.counts.get(&context) {
            Some(c) => {
                let denom = c.total as f64 + self.alpha * v as f64;
                let mut probs = vec![self.alpha / denom; v];
                for (&id, &n) in &c.next {
                    probs[id as usize] = (n as f64 + self.alpha) / denom;
                }
                Ok(probs)
            }
            None if self.alpha > 0.0 => Ok(vec![1.0 / v as f64; v]),
            None => Err(LmError::UndefinedDistribution { context }),
        }
    }

    /// Serializes order, alpha, vocabulary fingerprint and count tables.
    /// With `embed_vocabulary` the vocabulary file text is stored as well.
    pub fn to_json(&self, embed_vocabulary: bool) -> Result<String, LmError> {
        let mut contexts: Vec<StoredContext> = self
            .counts
            .iter()
            .map(|(context, c)| StoredContext {
                context: context.clone(),
                next: c.next.iter().map(|(&id, &n)| (id, n)).collect(),
            })
            .collect();
        contexts.sort_by(|a, b| a.context.cmp(&b.context));
        let stored = StoredModel {
            format: FORMAT.to_string(),
            version: FORMAT_VERSION,
            order: self.order,
            alpha: self.alpha,
            vocab_fingerprint: self.vocab.fingerprint(),
            vocabulary: embed_vocabulary.then(|| self.vocab.to_file_string()),
            contexts,
        };
        Ok(serde_json::to_string(&stored)?)
    }

    /// Loads a persisted model. An explicit vocabulary takes precedence over
    /// an embedded one; either way its fingerprint must match.
    pub fn from_json(text: &str, vocab: Option<Arc<Vocabulary>>) -> Result<Self, LmError> {
        let stored: StoredModel = serde_json::from_str(text)?;
        if stored.format != FORMAT || stored.version != FORMAT_VERSION {
            return Err(LmError::Format(format!(
                "unsupported format {} v{}",
                stored.format, stored.version
            )));
        }
        if stored.order == 0 {
            return Err(LmError::InvalidOrder);
        }
        if !(stored.alpha >= 0.0 && stored.alpha.is_finite()) {
            return Err(LmError::InvalidAlpha(stored.alpha));
        }
        let vocab = match (vocab, stored.vocabulary) {
            (Some(v), _) => v,
            (None, Some(text)) => Arc::new(Vocabulary::parse(&text)?),
            (None, None) => {
                return Err(LmError::Format(
                    "no vocabulary supplied and none embedded".to_string(),
                ))
            }
        };
        let found = vocab.fingerprint();
        if found != stored.vocab_fingerprint {
            return Err(LmError::VocabularyMismatch {
                expected: stored.vocab_fingerprint,
                found,
            });
        }
        let v = vocab.len() as TokenId;
        let mut counts = HashMap::with_capacity(stored.contexts.len());
        for sc in stored.contexts {
            if sc.context.len() != stored.order - 1
                || sc.context.iter().any(|&id| id >= v && id != BEGIN)
            {
                return Err(LmError::Format(format!("bad context {:?}", sc.context)));
            }
            let mut c = ContextCounts::default();
            for (id, n) in sc.next {
                if id >= v || n == 0 {
                    return Err(LmError::Format(format!("bad count entry ({id}, {n})")));
                }
                c.total += n;
                c.next.insert(id, n);
            }
            if counts.insert(sc.context, c).is_some() {
                return Err(LmError::Format("duplicate context".to_string()));
            }
        }
        Ok(Self {
            order: stored.order,
            alpha: stored.alpha,
            vocab,
            counts,
        })
    }
}

impl LanguageModel for NGramModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_logits(&self, prefix: &[TokenId]) -> Result<Logits, LmError> {
        Ok(Logits(
            self.probabilities(prefix)?
                .into_iter()
                .map(f64::ln)
                .collect(),
        ))
    }

    fn next_distribution(&self, prefix: &[TokenId]) -> Result<Distribution, LmError> {
        Distribution::new(self.probabilities(prefix)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredModel {
    format: String,
    version: u32,
    order: usize,
    alpha: f64,
    vocab_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary: Option<String>,
    contexts: Vec<StoredContext>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredContext {
    context: Vec<TokenId>,
    next: Vec<(TokenId, u64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::negative_log_likelihood;

    // ids: a = 0, b = 1, eos = 2
    fn ab_vocab() -> Arc<Vocabulary> {
        Arc::new(
            Vocabulary::new(
                vec![
                    ("a".into(), -1.0),
                    ("b".into(), -1.0),
                    ("<eos>".into(), -1.0),
                ],
                "<eos>",
                None,
                None,
            )
            .unwrap(),
        )
    }

    fn abab(alpha: f64) -> NGramModel {
        let corpus = [TokenSequence(vec![0, 1, 0, 1])];
        NGramModel::train(ab_vocab(), &corpus, 2, alpha).unwrap()
    }

    #[test]
    fn bigram_hand_counts() {
        let m = abab(0.0);
        assert_eq!(m.count(&[0], 1), 2);
        assert_eq!(m.count(&[1], 0), 1);
        assert_eq!(m.count(&[1], 2), 1);
        assert_eq!(m.count(&[BEGIN], 0), 1);
        assert_eq!(m.count(&[0], 0), 0);
    }

    #[test]
    fn single_token_corpus_with_padding() {
        let m = NGramModel::train(ab_vocab(), &[TokenSequence(vec![0])], 2, 0.0).unwrap();
        assert_eq!(m.count(&[BEGIN], 0), 1);
        assert_eq!(m.count(&[0], 2), 1);
        assert_eq!(m.context_count(), 2);
    }

    #[test]
    fn unigram_order_ignores_context() {
        let m = NGramModel::train(ab_vocab(), &[TokenSequence(vec![0, 1, 0, 1])], 1, 0.0).unwrap();
        assert_eq!(m.count(&[], 0), 2);
        assert_eq!(m.count(&[], 1), 2);
        assert_eq!(m.count(&[], 2), 1);
        let d1 = m.next_distribution(&[]).unwrap();
        let d2 = m.next_distribution(&[1, 0, 1]).unwrap();
        assert_eq!(d1, d2);
        assert!((d1[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn unsmoothed_and_smoothed_conditionals() {
        let d = abab(0.0).next_distribution(&[1, 0]).unwrap();
        assert_eq!(d[1], 1.0);
        let d = abab(1.0).next_distribution(&[0]).unwrap();
        assert!((d[1] - 0.6).abs() < 1e-15);
        assert!((d[0] - 0.2).abs() < 1e-15);
        assert!((d[2] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unseen_context() {
        let corpus = [TokenSequence(vec![0, 1])];
        let m = NGramModel::train(ab_vocab(), &corpus, 3, 1.0).unwrap();
        let d = m.next_distribution(&[1, 1]).unwrap();
        assert!(d.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
        let m = NGramModel::train(ab_vocab(), &corpus, 3, 0.0).unwrap();
        assert!(matches!(
            m.next_distribution(&[1, 1]),
            Err(LmError::UndefinedDistribution { .. })
        ));
    }

    #[test]
    fn training_errors() {
        let empty: [TokenSequence; 0] = [];
        assert!(matches!(
            NGramModel::train(ab_vocab(), &empty, 2, 1.0),
            Err(LmError::EmptyCorpus)
        ));
        let one = [TokenSequence(vec![0])];
        assert!(matches!(
            NGramModel::train(ab_vocab(), &one, 0, 1.0),
            Err(LmError::InvalidOrder)
        ));
        assert!(matches!(
            NGramModel::train(ab_vocab(), &one, 2, -0.5),
            Err(LmError::InvalidAlpha(_))
        ));
        assert!(NGramModel::train(ab_vocab(), &[TokenSequence(vec![9])], 2, 1.0).is_err());
    }

    #[test]
    fn nll_hand_count_oracle() {
        let m = abab(0.0);
        // P(a|begin) = 1, P(b|a) = 1, P(eos|b) = 1/2
        let nll = negative_log_likelihood(&m, &[TokenSequence(vec![0, 1])]).unwrap();
        assert!((nll - 2f64.ln()).abs() < 1e-12);
        let err = negative_log_likelihood(&m, &[TokenSequence(vec![1])]).unwrap_err();
        assert!(matches!(
            err,
            LmError::ZeroProbability {
                sequence: 0,
                position: 0,
                token: 1
            }
        ));
    }

    #[test]
    fn json_round_trip_and_vocab_binding() {
        let m = abab(0.5);
        let text = m.to_json(true).unwrap();
        let back = NGramModel::from_json(&text, None).unwrap();
        for prefix in [&[][..], &[0], &[1], &[0, 1]] {
            assert_eq!(
                m.next_distribution(prefix).unwrap(),
                back.next_distribution(prefix).unwrap()
            );
        }
        assert_eq!(text, back.to_json(true).unwrap());

        let bare = m.to_json(false).unwrap();
        assert!(matches!(
            NGramModel::from_json(&bare, None),
            Err(LmError::Format(_))
        ));
        assert!(NGramModel::from_json(&bare, Some(ab_vocab())).is_ok());
        let other = Arc::new(
            Vocabulary::new(
                vec![
                    ("a".into(), -2.0),
                    ("b".into(), -1.0),
                    ("<eos>".into(), -1.0),
                ],
                "<eos>",
                None,
                None,
            )
            .unwrap(),
        );
        assert!(matches!(
            NGramModel::from_json(&bare, Some(other)),
            Err(LmError::VocabularyMismatch { .. })
        ));
    }
}
