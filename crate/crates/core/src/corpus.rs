//! Segmented corpora: one sentence per line, words separated by a single
//! ASCII space.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentedSentence {
    words: Vec<String>,
}

impl SegmentedSentence {
    /// Fails if any word is empty or the sentence has no words.
    pub fn new(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Format {
                line: 0,
                message: "sentence has no words".into(),
            });
        }
        if let Some(i) = words.iter().position(|w| w.is_empty()) {
            return Err(Error::Format {
                line: 0,
                message: format!("word {i} is empty"),
            });
        }
        Ok(Self { words })
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        Self::new(line.split(' ').map(str::to_owned).collect())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }

    pub fn chars(&self) -> Vec<char> {
        self.words.iter().flat_map(|w| w.chars()).collect()
    }

    pub fn char_len(&self) -> usize {
        self.words.iter().map(|w| w.chars().count()).sum()
    }

    /// Character-offset spans `[start, end)` of every word.
    pub fn spans(&self) -> Vec<(usize, usize)> {
        let mut start = 0;
        self.words
            .iter()
            .map(|w| {
                let end = start + w.chars().count();
                let span = (start, end);
                start = end;
                span
            })
            .collect()
    }

    /// Gap indices between words, i.e. the end offset of every word but the
    /// last.
    pub fn boundaries(&self) -> Vec<usize> {
        let spans = self.spans();
        spans[..spans.len() - 1].iter().map(|s| s.1).collect()
    }
}

impl fmt::Display for SegmentedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<SegmentedSentence>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let sent = SegmentedSentence::parse_line(line).map_err(|e| match e {
            Error::Format { message, .. } => Error::Format { line: idx + 1, message },
            other => other,
        })?;
        out.push(sent);
    }
    Ok(out)
}

pub fn read_corpus_file(path: impl AsRef<Path>) -> Result<Vec<SegmentedSentence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn write_corpus<W: Write>(mut out: W, sentences: &[SegmentedSentence]) -> std::io::Result<()> {
    for s in sentences {
        writeln!(out, "{s}")?;
    }
    Ok(())
}
