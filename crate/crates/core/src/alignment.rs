//! Character-level speech/text alignments and the duration arithmetic on top
//! of them.
//!
//! A gap is addressed by the number of characters before it, so gap `k`
//! (`1 <= k < n`) sits between `chars[k - 1]` and `chars[k]`. Character
//! indices are ordinary zero-based offsets.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FRAME_OFFSET_MS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSentence {
    id: String,
    chars: Vec<char>,
    spans: Vec<(u64, u64)>,
    frame_offset_ms: f64,
}

/// Why a record failed the span invariants.
#[derive(Debug, Clone, PartialEq)]
pub enum SpanViolation {
    Empty,
    LengthMismatch { chars: usize, spans: usize },
    Inverted { index: usize, begin: u64, end: u64 },
    Overlap { gap: usize, end: u64, next_begin: u64 },
    BadFrameOffset(f64),
}

impl fmt::Display for SpanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpanViolation::Empty => write!(f, "sentence has no characters"),
            SpanViolation::LengthMismatch { chars, spans } => {
                write!(f, "{chars} characters but {spans} spans")
            }
            SpanViolation::Inverted { index, begin, end } => {
                write!(f, "span {index} begins after it ends ({begin} > {end})")
            }
            SpanViolation::Overlap { gap, end, next_begin } => {
                write!(f, "spans overlap at gap {gap} (end {end} > next begin {next_begin})")
            }
            SpanViolation::BadFrameOffset(v) => write!(f, "frame offset {v} is not positive"),
        }
    }
}

impl AlignedSentence {
    /// Builds a sentence, enforcing every span invariant.
    pub fn new(
        id: impl Into<String>,
        chars: Vec<char>,
        spans: Vec<(u64, u64)>,
        frame_offset_ms: f64,
    ) -> std::result::Result<Self, SpanViolation> {
        Self::build(id.into(), chars, spans, frame_offset_ms, true)
    }

    /// Like [`AlignedSentence::new`] but tolerates overlapping neighbours,
    /// which show up downstream as negative pauses.
    pub fn new_lenient(
        id: impl Into<String>,
        chars: Vec<char>,
        spans: Vec<(u64, u64)>,
        frame_offset_ms: f64,
    ) -> std::result::Result<Self, SpanViolation> {
        Self::build(id.into(), chars, spans, frame_offset_ms, false)
    }

    fn build(
        id: String,
        chars: Vec<char>,
        spans: Vec<(u64, u64)>,
        frame_offset_ms: f64,
        strict: bool,
    ) -> std::result::Result<Self, SpanViolation> {
        if chars.is_empty() {
            return Err(SpanViolation::Empty);
        }
        if chars.len() != spans.len() {
            return Err(SpanViolation::LengthMismatch {
                chars: chars.len(),
                spans: spans.len(),
            });
        }
        // NaN fails this comparison too.
        if !(frame_offset_ms > 0.0 && frame_offset_ms.is_finite()) {
            return Err(SpanViolation::BadFrameOffset(frame_offset_ms));
        }
        for (index, &(begin, end)) in spans.iter().enumerate() {
            if begin > end {
                return Err(SpanViolation::Inverted { index, begin, end });
            }
        }
        if strict {
            for (k, pair) in spans.windows(2).enumerate() {
                if pair[0].1 > pair[1].0 {
                    return Err(SpanViolation::Overlap {
                        gap: k + 1,
                        end: pair[0].1,
                        next_begin: pair[1].0,
                    });
                }
            }
        }
        Ok(Self {
            id,
            chars,
            spans,
            frame_offset_ms,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn spans(&self) -> &[(u64, u64)] {
        &self.spans
    }

    pub fn frame_offset_ms(&self) -> f64 {
        self.frame_offset_ms
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    /// Pause between the characters on either side of gap `gap`, in ms.
    pub fn pause_ms(&self, gap: usize) -> Result<f64> {
        let n = self.len();
        if gap == 0 || gap >= n {
            return Err(Error::IndexOutOfRange {
                index: gap,
                lo: 1,
                hi: n.saturating_sub(1),
            });
        }
        Ok(self.raw_pause_ms(gap))
    }

    fn raw_pause_ms(&self, gap: usize) -> f64 {
        let end = self.spans[gap - 1].1 as f64;
        let next_begin = self.spans[gap].0 as f64;
        (next_begin - end) * self.frame_offset_ms
    }

    /// Time spent pronouncing character `index`, in ms.
    pub fn char_ms(&self, index: usize) -> Result<f64> {
        match self.spans.get(index) {
            Some(&(b, e)) => Ok((e - b) as f64 * self.frame_offset_ms),
            None => Err(Error::IndexOutOfRange {
                index,
                lo: 0,
                hi: self.len() - 1,
            }),
        }
    }

    pub fn duration_profile(&self) -> DurationProfile {
        let pause_ms = (1..self.len()).map(|k| self.raw_pause_ms(k)).collect();
        let char_ms: Vec<f64> = self
            .spans
            .iter()
            .map(|&(b, e)| (e - b) as f64 * self.frame_offset_ms)
            .collect();
        let mean_char_ms = char_ms.iter().sum::<f64>() / char_ms.len() as f64;
        DurationProfile {
            pause_ms,
            char_ms,
            mean_char_ms,
        }
    }
}

/// Pause and pronunciation durations of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationProfile {
    /// `pause_ms[k - 1]` is the pause at gap `k`.
    pub pause_ms: Vec<f64>,
    pub char_ms: Vec<f64>,
    pub mean_char_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct AlignmentRecord {
    id: String,
    chars: Vec<String>,
    spans: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame_offset_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Reject records whose neighbouring spans overlap.
    pub strict: bool,
    /// Used for records without a `frame_offset_ms` field.
    pub default_frame_offset_ms: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            strict: true,
            default_frame_offset_ms: DEFAULT_FRAME_OFFSET_MS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectionKind {
    Malformed,
    Invalid,
}

/// A skipped input line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub kind: RejectionKind,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedAlignments {
    pub sentences: Vec<AlignedSentence>,
    pub rejections: Vec<Rejection>,
}

impl ParsedAlignments {
    pub fn rejected(&self) -> usize {
        self.rejections.len()
    }

    /// Sidecar report: one `line<TAB>kind<TAB>reason` row per rejection.
    pub fn write_rejections<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "line\tkind\treason")?;
        for r in &self.rejections {
            let kind = match r.kind {
                RejectionKind::Malformed => "malformed",
                RejectionKind::Invalid => "invalid",
            };
            writeln!(out, "{}\t{}\t{}", r.line, kind, r.reason)?;
        }
        Ok(())
    }
}

pub fn parse_alignment_file(path: impl AsRef<Path>, opts: ParseOptions) -> Result<ParsedAlignments> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_alignments(BufReader::new(file), opts).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses alignment JSONL. Bad records are collected as rejections; only
/// read failures abort.
pub fn parse_alignments<R: BufRead>(reader: R, opts: ParseOptions) -> Result<ParsedAlignments> {
    let mut parsed = ParsedAlignments::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<alignments>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line, opts) {
            Ok(s) => parsed.sentences.push(s),
            Err((kind, reason)) => parsed.rejections.push(Rejection {
                line: line_no,
                kind,
                reason,
            }),
        }
    }
    Ok(parsed)
}

fn parse_record(line: &str, opts: ParseOptions) -> std::result::Result<AlignedSentence, (RejectionKind, String)> {
    let rec: AlignmentRecord = serde_json::from_str(line).map_err(|e| (RejectionKind::Malformed, e.to_string()))?;
    let mut chars = Vec::with_capacity(rec.chars.len());
    for (i, s) in rec.chars.iter().enumerate() {
        let mut it = s.chars();
        match (it.next(), it.next()) {
            (Some(c), None) => chars.push(c),
            _ => {
                return Err((
                    RejectionKind::Malformed,
                    format!("chars[{i}] = {s:?} is not a single character"),
                ))
            }
        }
    }
    let ofs = rec.frame_offset_ms.unwrap_or(opts.default_frame_offset_ms);
    let built = if opts.strict {
        AlignedSentence::new(rec.id, chars, rec.spans, ofs)
    } else {
        AlignedSentence::new_lenient(rec.id, chars, rec.spans, ofs)
    };
    built.map_err(|v| (RejectionKind::Invalid, v.to_string()))
}

pub fn write_alignments<W: Write>(mut out: W, sentences: &[AlignedSentence]) -> Result<()> {
    for s in sentences {
        let rec = AlignmentRecord {
            id: s.id.clone(),
            chars: s.chars.iter().map(|c| c.to_string()).collect(),
            spans: s.spans.clone(),
            frame_offset_ms: Some(s.frame_offset_ms),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io("<alignments>", e))?;
    }
    Ok(())
}
