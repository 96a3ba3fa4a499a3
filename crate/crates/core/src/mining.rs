//! Pause-based word-boundary mining and threshold sweeps.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignedSentence;
use crate::corpus::SegmentedSentence;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_GRID: [f64; 5] = [30.0, 40.0, 50.0, 60.0, 70.0];
pub const DEFAULT_ALPHA_GRID: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

/// Thresholds for accepting a gap as a word boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// Absolute pause floor in ms.
    pub min_ms: f64,
    /// Pause floor as a fraction of the sentence's mean character duration.
    pub alpha: f64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            min_ms: 50.0,
            alpha: 0.30,
        }
    }
}

impl MiningConfig {
    pub fn new(min_ms: f64, alpha: f64) -> Result<Self> {
        if !(min_ms >= 0.0) || !(alpha >= 0.0) {
            return Err(Error::Config(format!(
                "thresholds must be non-negative (min_ms={min_ms}, alpha={alpha})"
            )));
        }
        Ok(Self { min_ms, alpha })
    }

    /// The effective pause cut-off for a sentence with the given mean
    /// character duration.
    pub fn threshold_ms(&self, mean_char_ms: f64) -> f64 {
        self.min_ms.max(self.alpha * mean_char_ms)
    }
}

/// A sentence with some word boundaries confirmed. Gaps not listed are
/// unknown, not joined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAnnotation {
    id: String,
    chars: Vec<char>,
    boundaries: Vec<usize>,
}

impl PartialAnnotation {
    /// Boundaries may come in any order; duplicates or out-of-range gaps are
    /// an error.
    pub fn new(id: impl Into<String>, chars: Vec<char>, mut boundaries: Vec<usize>) -> Result<Self> {
        let id = id.into();
        if chars.is_empty() {
            return Err(Error::Pairing {
                id,
                reason: "empty sentence".into(),
            });
        }
        boundaries.sort_unstable();
        let n = chars.len();
        for w in boundaries.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Pairing {
                    id,
                    reason: format!("duplicate boundary {}", w[0]),
                });
            }
        }
        if let Some(&k) = boundaries.iter().find(|&&k| k == 0 || k >= n) {
            return Err(Error::Pairing {
                id,
                reason: format!("boundary {k} outside 1..={}", n - 1),
            });
        }
        Ok(Self { id, chars, boundaries })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Sorted gap indices; gap `k` splits after the `k`-th character.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    /// Text with mined boundaries shown as `/`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut next = self.boundaries.iter().peekable();
        for (i, c) in self.chars.iter().enumerate() {
            if next.peek() == Some(&&i) {
                out.push('/');
                next.next();
            }
            out.push(*c);
        }
        out
    }
}

/// Applies both pause conditions to every gap of `s`.
pub fn mine_boundaries(s: &AlignedSentence, cfg: &MiningConfig) -> PartialAnnotation {
    let profile = s.duration_profile();
    let floor = cfg.alpha * profile.mean_char_ms;
    let boundaries = profile
        .pause_ms
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= cfg.min_ms && p >= floor)
        .map(|(i, _)| i + 1)
        .collect();
    PartialAnnotation {
        id: s.id().to_owned(),
        chars: s.chars().to_vec(),
        boundaries,
    }
}

/// Corpus-level counts in the shape of "# Sent / # Pauses".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MiningStats {
    pub sentences: usize,
    pub boundaries: usize,
}

pub fn mine_corpus(sentences: &[AlignedSentence], cfg: &MiningConfig) -> (Vec<PartialAnnotation>, MiningStats) {
    let mined: Vec<PartialAnnotation> = sentences.par_iter().map(|s| mine_boundaries(s, cfg)).collect();
    let stats = MiningStats {
        sentences: mined.len(),
        boundaries: mined.iter().map(|p| p.boundaries.len()).sum(),
    };
    (mined, stats)
}

/// Boundary-level agreement between mined and gold boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryQuality {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mined: usize,
    pub gold: usize,
    pub correct: usize,
    /// Set when nothing was mined and precision fell back to 1.0.
    pub empty_prediction: bool,
}

impl BoundaryQuality {
    pub fn from_counts(mined: usize, gold: usize, correct: usize) -> Self {
        let empty_prediction = mined == 0;
        let precision = if mined == 0 { 1.0 } else { correct as f64 / mined as f64 };
        let recall = if gold == 0 {
            if mined == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            correct as f64 / gold as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            mined,
            gold,
            correct,
            empty_prediction,
        }
    }
}

/// Scores mined boundaries against gold segmentations paired by position.
pub fn boundary_quality(mined: &[PartialAnnotation], gold: &[SegmentedSentence]) -> Result<BoundaryQuality> {
    if mined.len() != gold.len() {
        return Err(Error::Pairing {
            id: mined
                .get(gold.len())
                .map(|p| p.id.clone())
                .unwrap_or_else(|| "<end>".into()),
            reason: format!("{} mined sentences but {} gold", mined.len(), gold.len()),
        });
    }
    let (mut n_mined, mut n_gold, mut n_correct) = (0, 0, 0);
    for (m, g) in mined.iter().zip(gold) {
        if g.chars() != m.chars {
            return Err(Error::Pairing {
                id: m.id.clone(),
                reason: "characters differ from the gold sentence".into(),
            });
        }
        let gb = g.boundaries();
        n_mined += m.boundaries.len();
        n_gold += gb.len();
        // both lists are sorted
        let (mut i, mut j) = (0, 0);
        while i < m.boundaries.len() && j < gb.len() {
            match m.boundaries[i].cmp(&gb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n_correct += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    Ok(BoundaryQuality::from_counts(n_mined, n_gold, n_correct))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub min_ms: f64,
    pub alpha: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub boundaries: usize,
}

/// Scores every `(min, alpha)` grid point, ordered by `min` then `alpha`.
pub fn sweep_thresholds(
    sentences: &[AlignedSentence],
    gold: &[SegmentedSentence],
    min_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<Vec<SweepRow>> {
    if min_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::Config("sweep grids must be non-empty".into()));
    }
    let mut mins = min_grid.to_vec();
    let mut alphas = alpha_grid.to_vec();
    mins.sort_by(f64::total_cmp);
    alphas.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(mins.len() * alphas.len());
    for &min_ms in &mins {
        for &alpha in &alphas {
            let cfg = MiningConfig::new(min_ms, alpha)?;
            let (mined, stats) = mine_corpus(sentences, &cfg);
            let q = boundary_quality(&mined, gold)?;
            rows.push(SweepRow {
                min_ms,
                alpha,
                precision: q.precision,
                recall: q.recall,
                f1: q.f1,
                boundaries: stats.boundaries,
            });
        }
    }
    Ok(rows)
}

/// The two-phase selection: fix alpha at 0 and pick the best floor by F1,
/// then sweep alpha at that floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPhaseSweep {
    pub min_phase: Vec<SweepRow>,
    pub best_min_ms: f64,
    pub alpha_phase: Vec<SweepRow>,
    pub best_alpha: f64,
}

pub fn two_phase_sweep(
    sentences: &[AlignedSentence],
    gold: &[SegmentedSentence],
    min_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<TwoPhaseSweep> {
    let min_phase = sweep_thresholds(sentences, gold, min_grid, &[0.0])?;
    let best_min_ms = best_row(&min_phase).min_ms;
    let alpha_phase = sweep_thresholds(sentences, gold, &[best_min_ms], alpha_grid)?;
    let best_alpha = best_row(&alpha_phase).alpha;
    Ok(TwoPhaseSweep {
        min_phase,
        best_min_ms,
        alpha_phase,
        best_alpha,
    })
}

// first row wins ties
fn best_row(rows: &[SweepRow]) -> &SweepRow {
    rows.iter()
        .fold(&rows[0], |best, r| if r.f1 > best.f1 { r } else { best })
}

pub fn write_sweep_tsv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "min_ms\talpha\tprecision\trecall\tf1\tboundaries")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
            r.min_ms, r.alpha, r.precision, r.recall, r.f1, r.boundaries
        )?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PartialRecord {
    id: String,
    text: String,
    boundaries: Vec<usize>,
}

pub fn write_partials<W: Write>(mut out: W, partials: &[PartialAnnotation]) -> Result<()> {
    for p in partials {
        let rec = PartialRecord {
            id: p.id.clone(),
            text: p.text(),
            boundaries: p.boundaries.clone(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io("<partials>", e))?;
    }
    Ok(())
}

pub fn read_partials<R: BufRead>(reader: R) -> Result<Vec<PartialAnnotation>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<partials>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PartialRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: idx + 1,
            message: e.to_string(),
        })?;
        let p =
            PartialAnnotation::new(rec.id, rec.text.chars().collect(), rec.boundaries).map_err(|e| Error::Format {
                line: idx + 1,
                message: e.to_string(),
            })?;
        out.push(p);
    }
    Ok(out)
}

pub fn read_partials_file(path: impl AsRef<Path>) -> Result<Vec<PartialAnnotation>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_partials(BufReader::new(file))
}
