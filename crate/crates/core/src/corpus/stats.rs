use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Article, Decision, RejectReason};

/// Kept-article count and publication date range for one source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceStats {
    pub count: usize,
    pub earliest: Option<NaiveDate>,
    pub latest: Option<NaiveDate>,
}

/// Filtering outcome counts. `kept` plus all rejection counts equals
/// `total`; malformed input lines are counted separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total: usize,
    pub kept: usize,
    pub rejected_by_reason: BTreeMap<RejectReason, usize>,
    pub malformed: usize,
    pub per_source: BTreeMap<String, SourceStats>,
}

impl Default for FilterReport {
    fn default() -> Self {
        Self {
            total: 0,
            kept: 0,
            rejected_by_reason: RejectReason::ALL.iter().map(|&r| (r, 0)).collect(),
            malformed: 0,
            per_source: BTreeMap::new(),
        }
    }
}

impl FilterReport {
    pub fn add(&mut self, article: &Article, decision: &Decision) {
        self.total += 1;
        match decision {
            Decision::Keep => {
                self.kept += 1;
                let s = self.per_source.entry(article.source.clone()).or_default();
                s.count += 1;
                if let Some(date) = article.published_at {
                    s.earliest = Some(s.earliest.map_or(date, |e| e.min(date)));
                    s.latest = Some(s.latest.map_or(date, |l| l.max(date)));
                }
            }
            Decision::Reject(reason) => *self.rejected_by_reason.entry(*reason).or_insert(0) += 1,
        }
    }

    pub fn add_malformed(&mut self) {
        self.malformed += 1;
    }

    /// Combines counts from another partial report.
    pub fn merge(&mut self, other: &FilterReport) {
        self.total += other.total;
        self.kept += other.kept;
        self.malformed += other.malformed;
        for (reason, n) in &other.rejected_by_reason {
            *self.rejected_by_reason.entry(*reason).or_insert(0) += n;
        }
        for (source, theirs) in &other.per_source {
            let s = self.per_source.entry(source.clone()).or_default();
            s.count += theirs.count;
            s.earliest = match (s.earliest, theirs.earliest) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            s.latest = match (s.latest, theirs.latest) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
    }

    pub fn rejected(&self) -> usize {
        self.rejected_by_reason.values().sum()
    }

    /// Aligned per-source table: source, article count, first and last date,
    /// sorted by descending count.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<[String; 4]> = Vec::new();
        let mut sources: Vec<(&String, &SourceStats)> = self.per_source.iter().collect();
        sources.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.0.cmp(b.0)));
        let date = |d: Option<NaiveDate>| d.map_or_else(|| "-".to_string(), |d| d.to_string());
        for (source, s) in sources {
            rows.push([
                source.clone(),
                s.count.to_string(),
                date(s.earliest),
                date(s.latest),
            ]);
        }
        rows.push([
            "Total".to_string(),
            self.kept.to_string(),
            String::new(),
            String::new(),
        ]);
        let header = ["Website", "Article count", "From", "To"].map(String::from);
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&header).chain(&rows) {
            let mut line = String::new();
            let _ = write!(line, "{:<w$}", row[0], w = widths[0]);
            let _ = write!(line, "  {:>w$}", row[1], w = widths[1]);
            let _ = write!(line, "  {:>w$}", row[2], w = widths[2]);
            let _ = write!(line, "  {:>w$}", row[3], w = widths[3]);
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Sequential reduction of filter decisions into a report.
pub fn corpus_stats<'a, I>(decisions: I) -> FilterReport
where
    I: IntoIterator<Item = (&'a Article, &'a Decision)>,
{
    let mut report = FilterReport::default();
    for (article, decision) in decisions {
        report.add(article, decision);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn art(source: &str, date: Option<(i32, u32, u32)>) -> Article {
        Article {
            source: source.into(),
            url: None,
            published_at: date.and_then(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d)),
            summary: "s".into(),
            body: "b".into(),
        }
    }

    #[test]
    fn empty_stream() {
        let r = corpus_stats(std::iter::empty());
        assert_eq!((r.total, r.kept, r.rejected(), r.malformed), (0, 0, 0, 0));
        assert!(r.per_source.is_empty());
        assert_eq!(r.rejected_by_reason.len(), 4);
    }

    #[test]
    fn counts_and_ranges() {
        let arts = [
            art("a", Some((2020, 9, 23))),
            art("a", Some((2007, 7, 9))),
            art("a", None),
            art("b", Some((1999, 1, 1))),
        ];
        let decisions = [
            Decision::Keep,
            Decision::Keep,
            Decision::Keep,
            Decision::Reject(RejectReason::OverlapTooHigh),
        ];
        let r = corpus_stats(arts.iter().zip(&decisions));
        assert_eq!(r.kept, 3);
        assert_eq!(r.total, 4);
        assert_eq!(r.rejected_by_reason[&RejectReason::OverlapTooHigh], 1);
        let a = &r.per_source["a"];
        assert_eq!(a.count, 3);
        assert_eq!(a.earliest, NaiveDate::from_ymd_opt(2007, 7, 9));
        assert_eq!(a.latest, NaiveDate::from_ymd_opt(2020, 9, 23));
        assert!(!r.per_source.contains_key("b"));

        let table = r.render_table();
        assert!(table.lines().nth(1).unwrap().starts_with('a'));
        assert!(table.contains("2007-07-09  2020-09-23"));
    }

    #[test]
    fn merge_is_order_independent() {
        let arts = [
            art("a", Some((2010, 1, 1))),
            art("b", None),
            art("a", Some((2001, 5, 5))),
        ];
        let ds = [
            Decision::Keep,
            Decision::Reject(RejectReason::BodyTooShort),
            Decision::Keep,
        ];
        let whole = corpus_stats(arts.iter().zip(&ds));
        let mut left = corpus_stats(arts[2..].iter().zip(&ds[2..]));
        left.merge(&corpus_stats(arts[..2].iter().zip(&ds[..2])));
        assert_eq!(whole, left);
    }

    #[test]
    fn json_uses_reason_names() {
        let json = serde_json::to_string(&FilterReport::default()).unwrap();
        assert!(json.contains(r#""summary_too_short":0"#));
    }
}
