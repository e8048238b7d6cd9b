use std::collections::HashMap;
use std::sync::Arc;

use super::{Distribution, LanguageModel, LmError, Logits};
use crate::tokenizer::{TokenId, Vocabulary};

/// A first-order model given by explicit probability rows: one row for the
/// empty prefix and one per preceding token.
#[derive(Debug, Clone)]
pub struct BigramTableModel {
    vocab: Arc<Vocabulary>,
    initial: Distribution,
    rows: HashMap<TokenId, Distribution>,
}

impl BigramTableModel {
    pub fn new(
        vocab: Arc<Vocabulary>,
        initial: Vec<f64>,
        rows: impl IntoIterator<Item = (TokenId, Vec<f64>)>,
    ) -> Result<Self, LmError> {
        let check = |probs: Vec<f64>| {
            if probs.len() != vocab.len() {
                return Err(LmError::WrongLength {
                    expected: vocab.len(),
                    found: probs.len(),
                });
            }
            Distribution::new(probs)
        };
        let initial = check(initial)?;
        let rows = rows
            .into_iter()
            .map(|(id, p)| Ok((id, check(p)?)))
            .collect::<Result<_, LmError>>()?;
        Ok(Self {
            vocab,
            initial,
            rows,
        })
    }

    fn row(&self, prefix: &[TokenId]) -> Result<&Distribution, LmError> {
        match prefix.last() {
            None => Ok(&self.initial),
            Some(last) => self.rows.get(last).ok_or(LmError::UnknownContext {
                context: vec![*last],
            }),
        }
    }
}

impl LanguageModel for BigramTableModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_logits(&self, prefix: &[TokenId]) -> Result<Logits, LmError> {
        Ok(Logits(self.row(prefix)?.iter().map(|p| p.ln()).collect()))
    }

    fn next_distribution(&self, prefix: &[TokenId]) -> Result<Distribution, LmError> {
        self.row(prefix).cloned()
    }
}

/// Three-token fixture (`A` = 0, `B` = 1, `<eos>` = 2) on which greedy
/// search is suboptimal and a beam of two finds the best sequence.
///
/// | prefix ends with | A    | B    | eos  |
/// |------------------|------|------|------|
/// | (empty)          | 0.55 | 0.45 | 0    |
/// | A                | 0.3  | 0.2  | 0.5  |
/// | B                | 0.05 | 0.05 | 0.9  |
pub fn fixture_m1() -> BigramTableModel {
    let third = (1.0f64 / 3.0).ln();
    let vocab = Vocabulary::new(
        vec![
            ("A".into(), third),
            ("B".into(), third),
            ("<eos>".into(), third),
        ],
        "<eos>",
        None,
        None,
    )
    .expect("fixture vocabulary");
    BigramTableModel::new(
        Arc::new(vocab),
        vec![0.55, 0.45, 0.0],
        [(0, vec![0.3, 0.2, 0.5]), (1, vec![0.05, 0.05, 0.9])],
    )
    .expect("fixture rows are normalized")
}
