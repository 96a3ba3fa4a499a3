//! Word-level precision, recall, F1 and OOV recall.
//!
//! A predicted word counts as correct when the same character span is a word
//! in the gold segmentation of that sentence.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::corpus::SegmentedSentence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub gold_words: usize,
    pub pred_words: usize,
    pub correct_words: usize,
    pub gold_oov: usize,
    pub correct_oov: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the gold side has no OOV words.
    pub r_oov: Option<f64>,
    pub counts: EvalCounts,
}

impl EvalReport {
    pub fn from_counts(counts: EvalCounts) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(counts.correct_words, counts.pred_words);
        let recall = ratio(counts.correct_words, counts.gold_words);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let r_oov = (counts.gold_oov > 0).then(|| ratio(counts.correct_oov, counts.gold_oov));
        Self {
            precision,
            recall,
            f1,
            r_oov,
            counts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        writeln!(f, "{:<10}{:>10}", "metric", "value")?;
        writeln!(f, "{:<10}{:>10}", "P", pct(self.precision))?;
        writeln!(f, "{:<10}{:>10}", "R", pct(self.recall))?;
        writeln!(f, "{:<10}{:>10}", "F1", pct(self.f1))?;
        let oov = self.r_oov.map(pct).unwrap_or_else(|| "-".into());
        writeln!(f, "{:<10}{:>10}", "R_oov", oov)?;
        write!(
            f,
            "gold={} pred={} correct={} gold_oov={} correct_oov={}",
            c.gold_words, c.pred_words, c.correct_words, c.gold_oov, c.correct_oov
        )
    }
}

/// Scores `pred` against `gold` sentence by sentence. Words not in
/// `train_vocab` are OOV.
pub fn evaluate(
    gold: &[SegmentedSentence],
    pred: &[SegmentedSentence],
    train_vocab: &HashSet<String>,
) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Pairing {
            id: format!("line {}", gold.len().min(pred.len()) + 1),
            reason: format!("{} gold sentences but {} predicted", gold.len(), pred.len()),
        });
    }
    let mut counts = EvalCounts::default();
    for (line, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.chars() != p.chars() {
            return Err(Error::Pairing {
                id: format!("line {}", line + 1),
                reason: "gold and predicted characters differ".into(),
            });
        }
        let pred_spans: HashSet<(usize, usize)> = p.spans().into_iter().collect();
        counts.gold_words += g.words().len();
        counts.pred_words += pred_spans.len();
        for (word, span) in g.words().iter().zip(g.spans()) {
            let hit = pred_spans.contains(&span);
            let oov = !train_vocab.contains(word);
            counts.correct_words += hit as usize;
            counts.gold_oov += oov as usize;
            counts.correct_oov += (hit && oov) as usize;
        }
    }
    Ok(EvalReport::from_counts(counts))
}

/// Share of predicted words that are a single character.
pub fn single_char_ratio(pred: &[SegmentedSentence]) -> f64 {
    let (single, total) = pred
        .iter()
        .flat_map(|s| s.words())
        .fold((0, 0), |(s, t), w| (s + (w.chars().count() == 1) as usize, t + 1));
    if total == 0 {
        0.0
    } else {
        single as f64 / total as f64
    }
}

pub fn vocabulary(corpus: &[SegmentedSentence]) -> HashSet<String> {
    corpus.iter().flat_map(|s| s.words().iter().cloned()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}±{:.2}", 100.0 * self.mean, 100.0 * self.std)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateReport {
    pub runs: usize,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    /// Over the runs that report an OOV recall.
    pub r_oov: Option<MeanStd>,
}

impl fmt::Display for AggregateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let oov = self.r_oov.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        write!(
            f,
            "P {}  R {}  F1 {}  R_oov {}  (n={})",
            self.precision, self.recall, self.f1, oov, self.runs
        )
    }
}

/// Mean and population standard deviation of each metric across runs.
pub fn aggregate_runs(reports: &[EvalReport]) -> Result<AggregateReport> {
    let collect = |f: fn(&EvalReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    let precision =
        MeanStd::of(&collect(|r| r.precision)).ok_or_else(|| Error::Config("no reports to aggregate".into()))?;
    let oov: Vec<f64> = reports.iter().filter_map(|r| r.r_oov).collect();
    Ok(AggregateReport {
        runs: reports.len(),
        precision,
        recall: MeanStd::of(&collect(|r| r.recall)).expect("non-empty"),
        f1: MeanStd::of(&collect(|r| r.f1)).expect("non-empty"),
        r_oov: MeanStd::of(&oov),
    })
}
