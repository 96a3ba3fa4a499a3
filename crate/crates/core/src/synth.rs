//! Synthetic two-domain corpora with rendered speech alignments.
//!
//! A source and a target domain share a core vocabulary and each add a
//! disjoint tail. Target-domain sentences are rendered as alignments where
//! word boundaries tend to carry long pauses and word-internal gaps short
//! ones, so every stage of the pipeline has a known ground truth.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::alignment::{write_alignments, AlignedSentence};
use crate::corpus::{write_corpus, SegmentedSentence};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    /// Distinct characters available to build words from.
    pub inventory: usize,
    pub core_words: usize,
    pub source_tail_words: usize,
    pub target_tail_words: usize,
    /// Probability that a word is drawn from its domain's tail.
    pub tail_rate: f64,
    /// Relative weights of word lengths 1, 2, 3, 4.
    pub length_weights: [f64; 4],
    pub zipf_exponent: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub base_sentences: usize,
    pub partial_sentences: usize,
    pub dev_sentences: usize,
    pub test_sentences: usize,
    pub frame_offset_ms: f64,
    pub char_mean_ms: f64,
    pub char_sd_ms: f64,
    pub intra_mean_ms: f64,
    /// Half-width of the uniform short-pause distribution.
    pub intra_spread_ms: f64,
    pub inter_mean_ms: f64,
    pub inter_spread_ms: f64,
    /// Share of word boundaries that carry a long pause.
    pub boundary_pause_rate: f64,
    /// Share of word-internal gaps that carry a long pause anyway.
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            inventory: 400,
            core_words: 700,
            source_tail_words: 400,
            target_tail_words: 400,
            tail_rate: 0.3,
            length_weights: [0.2, 0.55, 0.17, 0.08],
            zipf_exponent: 1.0,
            min_words: 5,
            max_words: 14,
            base_sentences: 1500,
            partial_sentences: 3000,
            dev_sentences: 300,
            test_sentences: 300,
            frame_offset_ms: 5.0,
            char_mean_ms: 240.0,
            char_sd_ms: 40.0,
            intra_mean_ms: 20.0,
            intra_spread_ms: 20.0,
            inter_mean_ms: 90.0,
            inter_spread_ms: 30.0,
            boundary_pause_rate: 0.6,
            noise: 0.0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synth: {m}")));
        if self.inventory == 0 || self.core_words == 0 {
            return bad("vocabulary is empty");
        }
        if self.target_tail_words == 0 && self.tail_rate > 0.0 {
            return bad("tail rate is positive but the target tail is empty");
        }
        if self.source_tail_words == 0 && self.tail_rate > 0.0 {
            return bad("tail rate is positive but the source tail is empty");
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return bad("need 1 <= min_words <= max_words");
        }
        if !(0.0..=1.0).contains(&self.tail_rate)
            || !(0.0..=1.0).contains(&self.noise)
            || !(0.0..=1.0).contains(&self.boundary_pause_rate)
        {
            return bad("rates must lie in [0, 1]");
        }
        if !(self.frame_offset_ms > 0.0) || !(self.char_mean_ms > 0.0) {
            return bad("durations must be positive");
        }
        if self.length_weights.iter().any(|w| *w < 0.0) || self.length_weights.iter().sum::<f64>() <= 0.0 {
            return bad("length weights must be non-negative and not all zero");
        }
        let needed = self.core_words + self.source_tail_words + self.target_tail_words;
        let longest = self.length_weights.iter().rposition(|w| *w > 0.0).unwrap_or(0) as u32 + 1;
        let capacity = (self.inventory as f64).powi(longest as i32);
        if (needed as f64) > 0.5 * capacity {
            return bad("inventory too small for the requested vocabulary");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub source_train: Vec<SegmentedSentence>,
    pub target_dev: Vec<SegmentedSentence>,
    pub target_test: Vec<SegmentedSentence>,
    /// Gold segmentation of every alignment, in the same order.
    pub alignment_gold: Vec<SegmentedSentence>,
    pub alignments: Vec<AlignedSentence>,
}

pub const SOURCE_TRAIN_FILE: &str = "source_train.txt";
pub const TARGET_DEV_FILE: &str = "target_dev.txt";
pub const TARGET_TEST_FILE: &str = "target_test.txt";
pub const ALIGNMENTS_FILE: &str = "alignments.jsonl";
pub const ALIGNMENT_GOLD_FILE: &str = "alignments_gold.txt";
pub const SPEC_FILE: &str = "synth_spec.json";

impl SynthData {
    pub fn write_to_dir(&self, dir: impl AsRef<Path>, spec: &SynthSpec) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let corpus = |name: &str, data: &[SegmentedSentence]| -> Result<()> {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut out = BufWriter::new(file);
            write_corpus(&mut out, data)
                .and_then(|_| out.flush())
                .map_err(|e| Error::io(&path, e))
        };
        corpus(SOURCE_TRAIN_FILE, &self.source_train)?;
        corpus(TARGET_DEV_FILE, &self.target_dev)?;
        corpus(TARGET_TEST_FILE, &self.target_test)?;
        corpus(ALIGNMENT_GOLD_FILE, &self.alignment_gold)?;

        let path = dir.join(ALIGNMENTS_FILE);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        write_alignments(&mut out, &self.alignments)?;
        out.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join(SPEC_FILE);
        let text = serde_json::to_string_pretty(spec)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

struct Lexicon {
    words: Vec<String>,
    sampler: WeightedIndex<f64>,
}

impl Lexicon {
    fn new(words: Vec<String>, exponent: f64) -> Self {
        let weights: Vec<f64> = (1..=words.len()).map(|r| (r as f64).powf(-exponent)).collect();
        let sampler = WeightedIndex::new(weights).expect("non-empty lexicon");
        Self { words, sampler }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &str {
        &self.words[self.sampler.sample(rng)]
    }
}

/// Inventory characters come from the CJK Unified Ideographs block.
fn inventory_char(i: usize) -> char {
    char::from_u32(0x4E00 + 3 * i as u32).expect("inside the CJK block")
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lengths = WeightedIndex::new(spec.length_weights).map_err(|e| Error::Config(e.to_string()))?;

    let mut seen = HashSet::new();
    let mut make_words = |count: usize, rng: &mut ChaCha8Rng| -> Vec<String> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let len = lengths.sample(rng) + 1;
            let w: String = (0..len)
                .map(|_| inventory_char(rng.random_range(0..spec.inventory)))
                .collect();
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    };
    let core = Lexicon::new(make_words(spec.core_words, &mut rng), spec.zipf_exponent);
    let source_tail = make_words(spec.source_tail_words, &mut rng);
    let target_tail = make_words(spec.target_tail_words, &mut rng);
    let source_tail = (!source_tail.is_empty()).then(|| Lexicon::new(source_tail, spec.zipf_exponent));
    let target_tail = (!target_tail.is_empty()).then(|| Lexicon::new(target_tail, spec.zipf_exponent));

    let sentence = |tail: Option<&Lexicon>, rng: &mut ChaCha8Rng| -> SegmentedSentence {
        let n = rng.random_range(spec.min_words..=spec.max_words);
        let words = (0..n)
            .map(|_| match tail {
                Some(t) if rng.random_bool(spec.tail_rate) => t.sample(rng).to_owned(),
                _ => core.sample(rng).to_owned(),
            })
            .collect();
        SegmentedSentence::new(words).expect("generated words are non-empty")
    };
    let corpus = |count: usize, tail: Option<&Lexicon>, rng: &mut ChaCha8Rng| -> Vec<SegmentedSentence> {
        (0..count).map(|_| sentence(tail, rng)).collect()
    };

    let source_train = corpus(spec.base_sentences, source_tail.as_ref(), &mut rng);
    let target_dev = corpus(spec.dev_sentences, target_tail.as_ref(), &mut rng);
    let target_test = corpus(spec.test_sentences, target_tail.as_ref(), &mut rng);
    let alignment_gold = corpus(spec.partial_sentences, target_tail.as_ref(), &mut rng);

    let renderer = PauseRenderer::new(spec)?;
    let alignments = alignment_gold
        .iter()
        .enumerate()
        .map(|(i, s)| renderer.render(format!("sp-{:06}", i + 1), s, &mut rng))
        .collect();

    Ok(SynthData {
        source_train,
        target_dev,
        target_test,
        alignment_gold,
        alignments,
    })
}

struct PauseRenderer<'a> {
    spec: &'a SynthSpec,
    char_ms: Normal<f64>,
}

impl<'a> PauseRenderer<'a> {
    fn new(spec: &'a SynthSpec) -> Result<Self> {
        let char_ms = Normal::new(spec.char_mean_ms, spec.char_sd_ms).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { spec, char_ms })
    }

    fn frames(&self, ms: f64) -> u64 {
        (ms.max(0.0) / self.spec.frame_offset_ms).round() as u64
    }

    fn uniform<R: Rng>(rng: &mut R, mean: f64, spread: f64) -> f64 {
        if spread <= 0.0 {
            mean
        } else {
            rng.random_range(mean - spread..=mean + spread)
        }
    }

    fn render<R: Rng>(&self, id: String, sentence: &SegmentedSentence, rng: &mut R) -> AlignedSentence {
        let spec = self.spec;
        let boundaries: HashSet<usize> = sentence.boundaries().into_iter().collect();
        let chars = sentence.chars();
        let lo = 0.4 * spec.char_mean_ms;
        let hi = 1.6 * spec.char_mean_ms;
        let mut t = self.frames(100.0);
        let mut spans = Vec::with_capacity(chars.len());
        for i in 0..chars.len() {
            if i > 0 {
                let long = if boundaries.contains(&i) {
                    rng.random_bool(spec.boundary_pause_rate)
                } else {
                    rng.random_bool(spec.noise)
                };
                let pause = if long {
                    Self::uniform(rng, spec.inter_mean_ms, spec.inter_spread_ms)
                } else {
                    Self::uniform(rng, spec.intra_mean_ms, spec.intra_spread_ms)
                };
                t += self.frames(pause);
            }
            let dur = self.frames(self.char_ms.sample(rng).clamp(lo, hi));
            spans.push((t, t + dur));
            t += dur;
        }
        AlignedSentence::new(id, chars, spans, spec.frame_offset_ms).expect("rendered spans are monotone")
    }
}
