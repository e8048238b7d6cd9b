use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{char_len, longest_common_substring_len, normalize_whitespace, Article, CorpusError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// Summaries must be strictly longer than this.
    pub min_summary_chars: usize,
    /// Bodies must be strictly longer than this.
    pub min_body_chars: usize,
    /// Body length must be at least this multiple of the summary length.
    pub min_body_to_summary_ratio: f64,
    /// Overlap ratio must be strictly below this.
    pub max_overlap_ratio: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_summary_chars: 10,
            min_body_chars: 100,
            min_body_to_summary_ratio: 2.0,
            max_overlap_ratio: 0.2,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if !(self.min_body_to_summary_ratio >= 0.0 && self.min_body_to_summary_ratio.is_finite()) {
            return Err(CorpusError::InvalidConfig(format!(
                "min_body_to_summary_ratio must be >= 0, got {}",
                self.min_body_to_summary_ratio
            )));
        }
        if !(0.0..=1.0).contains(&self.max_overlap_ratio) {
            return Err(CorpusError::InvalidConfig(format!(
                "max_overlap_ratio must be in [0, 1], got {}",
                self.max_overlap_ratio
            )));
        }
        Ok(())
    }
}

/// Rejection rules, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SummaryTooShort,
    BodyTooShort,
    BodyToSummaryRatio,
    OverlapTooHigh,
}

impl RejectReason {
    pub const ALL: [RejectReason; 4] = [
        RejectReason::SummaryTooShort,
        RejectReason::BodyTooShort,
        RejectReason::BodyToSummaryRatio,
        RejectReason::OverlapTooHigh,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::SummaryTooShort => "summary_too_short",
            RejectReason::BodyTooShort => "body_too_short",
            RejectReason::BodyToSummaryRatio => "body_to_summary_ratio",
            RejectReason::OverlapTooHigh => "overlap_too_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Keep,
    Reject(RejectReason),
}

impl Decision {
    pub fn is_keep(&self) -> bool {
        matches!(self, Decision::Keep)
    }
}

/// Longest common substring length divided by the summary length, both in
/// characters. Case and diacritics are compared as-is.
pub fn overlap_ratio(summary: &str, body: &str) -> Result<f64, CorpusError> {
    let summary_chars = char_len(summary);
    if summary_chars == 0 {
        return Err(CorpusError::EmptySummary);
    }
    Ok(longest_common_substring_len(summary, body) as f64 / summary_chars as f64)
}

/// Applies the rejection rules to whitespace-normalized text; the first
/// failing rule names the reason.
pub fn filter_article(article: &Article, config: &FilterConfig) -> Decision {
    let summary = normalize_whitespace(&article.summary);
    let body = normalize_whitespace(&article.body);
    let summary_chars = char_len(&summary);
    let body_chars = char_len(&body);
    if summary_chars <= config.min_summary_chars {
        return Decision::Reject(RejectReason::SummaryTooShort);
    }
    if body_chars <= config.min_body_chars {
        return Decision::Reject(RejectReason::BodyTooShort);
    }
    if (body_chars as f64) < config.min_body_to_summary_ratio * summary_chars as f64 {
        return Decision::Reject(RejectReason::BodyToSummaryRatio);
    }
    let ratio = overlap_ratio(&summary, &body).expect("summary is longer than the minimum");
    if ratio >= config.max_overlap_ratio {
        return Decision::Reject(RejectReason::OverlapTooHigh);
    }
    Decision::Keep
}

/// Record-parallel filtering on the current rayon pool; decisions follow
/// input order.
pub fn filter_articles(articles: &[Article], config: &FilterConfig) -> Vec<Decision> {
    articles
        .par_iter()
        .map(|a| filter_article(a, config))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn article(summary: &str, body: &str) -> Article {
        Article {
            source: "t".into(),
            url: None,
            published_at: None,
            summary: summary.into(),
            body: body.into(),
        }
    }

    /// Distinct characters so that overlaps are controlled: `n` chars drawn
    /// cyclically from `alphabet`.
    fn text(alphabet: &str, n: usize) -> String {
        alphabet.chars().cycle().take(n).collect()
    }

    #[test]
    fn overlap_fixtures() {
        assert!((overlap_ratio("abcdef", "zzcdefzz").unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(overlap_ratio("abcdef", "abcdef").unwrap(), 1.0);
        assert!((overlap_ratio("abcdef", "zbzdzfz").unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(matches!(
            overlap_ratio("", "x"),
            Err(CorpusError::EmptySummary)
        ));
    }

    #[test]
    fn summary_of_ten_chars_is_rejected() {
        let d = filter_article(
            &article(&text("abcde", 10), &text("xyz", 300)),
            &FilterConfig::default(),
        );
        assert_eq!(d, Decision::Reject(RejectReason::SummaryTooShort));
    }

    #[test]
    fn comfortable_article_is_kept() {
        // Summary cycles through 10 letters, body through 3 others, so the
        // shared substring is empty.
        let d = filter_article(
            &article(&text("abcdefghij", 100), &text("xyz", 300)),
            &FilterConfig::default(),
        );
        assert_eq!(d, Decision::Keep);
    }

    #[test]
    fn body_ratio_rule() {
        let d = filter_article(
            &article(&text("abcdefghij", 100), &text("xyz", 150)),
            &FilterConfig::default(),
        );
        assert_eq!(d, Decision::Reject(RejectReason::BodyToSummaryRatio));
    }

    #[test]
    fn rules_apply_to_normalized_text() {
        // 11 characters only after collapsing the inner whitespace run.
        let spaced = "abcde     fghij";
        let d = filter_article(
            &article(spaced, &text("xyz", 300)),
            &FilterConfig::default(),
        );
        assert_eq!(d, Decision::Keep);
        let d = filter_article(
            &article("  abcdefghij  ", &text("xyz", 300)),
            &FilterConfig::default(),
        );
        assert_eq!(d, Decision::Reject(RejectReason::SummaryTooShort));
    }

    #[test]
    fn config_validation() {
        assert!(FilterConfig::default().validate().is_ok());
        let bad = FilterConfig {
            max_overlap_ratio: 1.5,
            ..FilterConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn decision_json() {
        assert_eq!(serde_json::to_string(&Decision::Keep).unwrap(), r#""keep""#);
        assert_eq!(
            serde_json::to_string(&Decision::Reject(RejectReason::OverlapTooHigh)).unwrap(),
            r#"{"reject":"overlap_too_high"}"#
        );
    }
}
