use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalError, EvalRecord};

/// Streaming mean and variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / count as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        self.count = count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean and sample standard deviation (divisor `n - 1`, 0 for a single
    /// value).
    pub fn finish(&self) -> MeanStd {
        let std = if self.count > 1 {
            (self.m2.max(0.0) / (self.count - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd {
            mean: self.mean,
            std,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// `"0.298 (0.154)"`-style cell.
    pub fn render(&self, decimals: usize) -> String {
        format!("{:.*} ({:.*})", decimals, self.mean, decimals, self.std)
    }
}

/// Corpus-level F-scores and length fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub count: u64,
    pub rouge1: MeanStd,
    pub rouge2: MeanStd,
    #[serde(rename = "rougeL")]
    pub rouge_l: MeanStd,
    pub length_fraction: MeanStd,
    pub repetitive: u64,
}

pub fn aggregate<'a, I>(records: I) -> Result<EvalSummary, EvalError>
where
    I: IntoIterator<Item = &'a EvalRecord>,
{
    let mut r1 = RunningStats::default();
    let mut r2 = RunningStats::default();
    let mut rl = RunningStats::default();
    let mut lf = RunningStats::default();
    let mut repetitive = 0;
    for rec in records {
        r1.push(rec.rouge1.f1);
        r2.push(rec.rouge2.f1);
        rl.push(rec.rouge_l.f1);
        lf.push(rec.length_fraction);
        repetitive += u64::from(rec.repetitive);
    }
    if r1.count() == 0 {
        return Err(EvalError::NoRecords);
    }
    Ok(EvalSummary {
        count: r1.count(),
        rouge1: r1.finish(),
        rouge2: r2.finish(),
        rouge_l: rl.finish(),
        length_fraction: lf.finish(),
        repetitive,
    })
}

/// Aligned text table, one row per labelled summary: ROUGE F-scores with
/// three decimals, length fraction with two.
pub fn render_table(rows: &[(&str, &EvalSummary)]) -> String {
    let header = [
        "Decoding method",
        "ROUGE-1",
        "ROUGE-2",
        "ROUGE-L",
        "Length fraction",
    ];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|(label, s)| {
            [
                label.to_string(),
                s.rouge1.render(3),
                s.rouge2.render(3),
                s.rouge_l.render(3),
                s.length_fraction.render(2),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header.map(String::from));
    for row in &body {
        line(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::RougeScore;

    fn record(f: f64, lf: f64) -> EvalRecord {
        let s = RougeScore {
            precision: f,
            recall: f,
            f1: f,
        };
        EvalRecord {
            rouge1: s,
            rouge2: s,
            rouge_l: s,
            length_fraction: lf,
            repetitive: false,
        }
    }

    #[test]
    fn two_values() {
        let s = aggregate(&[record(0.2, 1.0), record(0.4, 1.0)]).unwrap();
        assert!((s.rouge1.mean - 0.3).abs() < 1e-15);
        assert!((s.rouge1.std - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((s.rouge1.std - 0.1414).abs() < 1e-4);
    }

    #[test]
    fn single_and_identical_records() {
        let s = aggregate(&[record(0.7, 0.9)]).unwrap();
        assert_eq!(s.rouge2.std, 0.0);
        let same = vec![record(0.1, 0.3); 17];
        let s = aggregate(&same).unwrap();
        assert_eq!(s.rouge_l.mean, 0.1);
        assert_eq!(s.rouge_l.std, 0.0);
        assert_eq!(s.length_fraction.mean, 0.3);
        assert!(matches!(aggregate(&[]), Err(EvalError::NoRecords)));
    }

    #[test]
    fn merge_matches_sequential() {
        let xs = [0.1, 0.5, 0.25, 0.9, 0.33, 0.0, 1.0];
        let mut all = RunningStats::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (RunningStats::default(), RunningStats::default());
        xs[..3].iter().for_each(|&x| a.push(x));
        xs[3..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.finish().mean - all.finish().mean).abs() < 1e-15);
        assert!((a.finish().std - all.finish().std).abs() < 1e-15);
    }

    #[test]
    fn cell_format() {
        let cell = MeanStd {
            mean: 0.298,
            std: 0.154,
        };
        assert_eq!(cell.render(3), "0.298 (0.154)");
        assert_eq!(
            MeanStd {
                mean: 0.79,
                std: 0.4
            }
            .render(2),
            "0.79 (0.40)"
        );
    }

    #[test]
    fn table_layout() {
        let s = aggregate(&[record(0.2, 0.5), record(0.4, 1.0)]).unwrap();
        let table = render_table(&[("Greedy beam search", &s)]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("Decoding method"));
        assert!(lines[1].starts_with("Greedy beam search"));
        assert!(lines[1].contains("0.300 (0.141)"));
        assert!(lines[1].ends_with("0.75 (0.35)"));
    }
}
