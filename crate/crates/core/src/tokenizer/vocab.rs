use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{TokenId, TokenizerError};

pub const EOS_NAME: &str = "<eos>";
pub const UNK_NAME: &str = "<unk>";
pub const PAD_NAME: &str = "<pad>";

/// Names of the special tokens, as they appear in the JSON header of a
/// vocabulary file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialNames {
    pub eos: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unk: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<String>,
}

/// Token inventory with unigram log-probabilities.
///
/// Ids are dense in `[0, len)` and follow insertion order. `eos` is always
/// present; `unk` and `pad` are optional.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    log_probs: Vec<f64>,
    index: HashMap<String, TokenId>,
    eos: TokenId,
    unk: Option<TokenId>,
    pad: Option<TokenId>,
    max_token_chars: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from `(surface, log_prob)` entries. Special tokens
    /// are referenced by surface and must be among the entries.
    pub fn new(
        entries: Vec<(String, f64)>,
        eos: &str,
        unk: Option<&str>,
        pad: Option<&str>,
    ) -> Result<Self, TokenizerError> {
        if entries.len() > TokenId::MAX as usize {
            return Err(TokenizerError::InvalidVocabulary(
                "too many entries".to_string(),
            ));
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut log_probs = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut max_token_chars = 0;
        for (id, (token, log_prob)) in entries.into_iter().enumerate() {
            if token.is_empty() {
                return Err(TokenizerError::InvalidVocabulary(format!(
                    "empty token at id {id}"
                )));
            }
            if log_prob.is_nan() || log_prob > 0.0 {
                return Err(TokenizerError::InvalidVocabulary(format!(
                    "log-probability {log_prob} of {token:?} is not <= 0"
                )));
            }
            if index.insert(token.clone(), id as TokenId).is_some() {
                return Err(TokenizerError::InvalidVocabulary(format!(
                    "duplicate token {token:?}"
                )));
            }
            max_token_chars = max_token_chars.max(token.chars().count());
            tokens.push(token);
            log_probs.push(log_prob);
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| TokenizerError::MissingSpecial(name.to_string()))
        };
        let eos = lookup(eos)?;
        let unk = unk.map(lookup).transpose()?;
        let pad = pad.map(lookup).transpose()?;
        Ok(Self {
            tokens,
            log_probs,
            index,
            eos,
            unk,
            pad,
            max_token_chars,
        })
    }

    /// Builds a vocabulary whose log-probabilities are relative frequencies
    /// of the given counts. Zero counts are rejected.
    pub fn from_counts(
        counts: Vec<(String, u64)>,
        eos: &str,
        unk: Option<&str>,
        pad: Option<&str>,
    ) -> Result<Self, TokenizerError> {
        let total: u64 = counts.iter().map(|(_, c)| c).sum();
        if counts.iter().any(|(_, c)| *c == 0) {
            return Err(TokenizerError::InvalidVocabulary(
                "zero count in frequency table".to_string(),
            ));
        }
        let entries = counts
            .into_iter()
            .map(|(t, c)| (t, (c as f64 / total as f64).ln()))
            .collect();
        Self::new(entries, eos, unk, pad)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn unk(&self) -> Option<TokenId> {
        self.unk
    }

    pub fn pad(&self) -> Option<TokenId> {
        self.pad
    }

    pub fn is_special(&self, id: TokenId) -> bool {
        id == self.eos || Some(id) == self.unk || Some(id) == self.pad
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn log_prob(&self, id: TokenId) -> Option<f64> {
        self.log_probs.get(id as usize).copied()
    }

    pub(crate) fn max_token_chars(&self) -> usize {
        self.max_token_chars
    }

    /// Checks that every id is in range.
    pub fn check_ids(&self, ids: &[TokenId]) -> Result<(), TokenizerError> {
        match ids.iter().find(|&&id| id as usize >= self.len()) {
            Some(&id) => Err(TokenizerError::UnknownId {
                id,
                vocab_size: self.len(),
            }),
            None => Ok(()),
        }
    }

    pub fn special_names(&self) -> SpecialNames {
        let name = |id: TokenId| self.tokens[id as usize].clone();
        SpecialNames {
            eos: name(self.eos),
            unk: self.unk.map(name),
            pad: self.pad.map(name),
        }
    }

    /// Parses the tab-separated vocabulary format.
    ///
    /// An optional first line holding a JSON object names the special tokens;
    /// without it the reserved names `<eos>`, `<unk>` and `<pad>` are used
    /// (only `<eos>` is mandatory).
    pub fn parse(text: &str) -> Result<Self, TokenizerError> {
        let mut lines = text.lines().enumerate().peekable();
        let mut header: Option<SpecialNames> = None;
        if let Some((_, first)) = lines.peek() {
            if first.trim_start().starts_with('{') {
                let parsed = serde_json::from_str(first).map_err(|e| TokenizerError::Parse {
                    line: 1,
                    message: format!("bad header: {e}"),
                })?;
                header = Some(parsed);
                lines.next();
            }
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (token, value) = line
                .rsplit_once('\t')
                .ok_or_else(|| TokenizerError::Parse {
                    line: lineno + 1,
                    message: "expected token<TAB>log_prob".to_string(),
                })?;
            let log_prob: f64 = value.trim().parse().map_err(|_| TokenizerError::Parse {
                line: lineno + 1,
                message: format!("invalid log-probability {value:?}"),
            })?;
            entries.push((token.to_string(), log_prob));
        }
        match header {
            Some(names) => Self::new(
                entries,
                &names.eos,
                names.unk.as_deref(),
                names.pad.as_deref(),
            ),
            None => {
                let present = |name: &str| entries.iter().any(|(t, _)| t == name);
                let unk = present(UNK_NAME).then_some(UNK_NAME);
                let pad = present(PAD_NAME).then_some(PAD_NAME);
                Self::new(entries, EOS_NAME, unk, pad)
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self, TokenizerError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Serializes to the tab-separated format, always with a JSON header.
    pub fn to_file_string(&self) -> String {
        let mut out = serde_json::to_string(&self.special_names()).expect("header serializes");
        out.push('\n');
        for (token, lp) in self.tokens.iter().zip(&self.log_probs) {
            let _ = writeln!(out, "{token}\t{lp}");
        }
        out
    }

    /// Hex SHA-256 of the canonical file form. Used to bind persisted models
    /// to the vocabulary they were trained with.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_file_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Vocabulary {
        Vocabulary::new(
            vec![
                ("a".into(), -1.0),
                ("b".into(), -2.0),
                ("<eos>".into(), -3.0),
            ],
            "<eos>",
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn ids_are_dense_in_insertion_order() {
        let v = abc();
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.eos(), 2);
        assert_eq!(v.unk(), None);
    }

    #[test]
    fn rejects_positive_log_prob_duplicates_and_missing_eos() {
        let bad = Vocabulary::new(
            vec![("a".into(), 0.5), ("<eos>".into(), -1.0)],
            "<eos>",
            None,
            None,
        );
        assert!(matches!(bad, Err(TokenizerError::InvalidVocabulary(_))));
        let dup = Vocabulary::new(
            vec![
                ("a".into(), -1.0),
                ("a".into(), -1.0),
                ("<eos>".into(), -1.0),
            ],
            "<eos>",
            None,
            None,
        );
        assert!(matches!(dup, Err(TokenizerError::InvalidVocabulary(_))));
        let no_eos = Vocabulary::new(vec![("a".into(), -1.0)], "<eos>", None, None);
        assert!(matches!(no_eos, Err(TokenizerError::MissingSpecial(_))));
    }

    #[test]
    fn parses_reserved_names_without_header() {
        let v = Vocabulary::parse("<eos>\t-1\n<unk>\t-9.5\nab\t-0.5\n a\t-2\n").unwrap();
        assert_eq!(v.eos(), 0);
        assert_eq!(v.unk(), Some(1));
        assert_eq!(v.pad(), None);
        assert_eq!(v.id(" a"), Some(3));
        assert_eq!(v.log_prob(2), Some(-0.5));
    }

    #[test]
    fn parses_json_header() {
        let v = Vocabulary::parse("{\"eos\":\"</s>\",\"unk\":\"?\"}\n</s>\t-1\n?\t-5\nx\t-0.1\n")
            .unwrap();
        assert_eq!(v.eos(), 0);
        assert_eq!(v.unk(), Some(1));
        assert!(v.is_special(1));
        assert!(!v.is_special(2));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = Vocabulary::parse("<eos>\t-1\nbroken\n").unwrap_err();
        assert!(matches!(err, TokenizerError::Parse { line: 2, .. }));
    }

    #[test]
    fn file_form_round_trips_and_fingerprint_is_stable() {
        let v = Vocabulary::parse("<eos>\t-1\n<pad>\t-7\nlabas\t-0.123456789\n").unwrap();
        let back = Vocabulary::parse(&v.to_file_string()).unwrap();
        assert_eq!(v, back);
        assert_eq!(v.fingerprint(), back.fingerprint());
        assert_ne!(v.fingerprint(), abc().fingerprint());
    }

    #[test]
    fn from_counts_uses_relative_frequency() {
        let v = Vocabulary::from_counts(
            vec![("x".into(), 3), ("<eos>".into(), 1)],
            "<eos>",
            None,
            None,
        )
        .unwrap();
        assert!((v.log_prob(0).unwrap() - 0.75f64.ln()).abs() < 1e-15);
    }
}
