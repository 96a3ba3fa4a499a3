//! Word segmentation for Chinese trained with word boundaries mined from
//! speech pauses.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`alignment`] reads character-level speech/text alignments and turns
//!    frame spans into pause and pronunciation durations.
//! 2. [`mining`] marks a gap as a word boundary when its pause clears both an
//!    absolute floor and a fraction of the sentence's mean character duration.
//! 3. [`lattice`] turns mined boundaries into a constrained BMES label space and
//!    runs Viterbi and forward passes restricted to it.
//! 4. [`tagger`] trains a linear-chain CRF segmenter, either directly on the
//!    partial annotations or by completing them with a basic model first.
//!
//! [`evalkit`] scores segmentations, [`synth`] generates desk-scale synthetic
//! corpora with known ground truth, and [`cli`] wires everything into the
//! `pauseseg` command.

// negated float comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod cli;
pub mod corpus;
mod error;
pub mod evalkit;
pub mod lattice;
pub mod mining;
pub mod numerals;
pub mod pipeline;
pub mod synth;
pub mod tagger;

pub use alignment::{AlignedSentence, DurationProfile, ParseOptions, ParsedAlignments, Rejection};
pub use corpus::SegmentedSentence;
pub use error::{Error, ErrorKind, Result};
pub use evalkit::{aggregate_runs, evaluate, AggregateReport, EvalReport};
pub use lattice::{Label, LabelLattice, LabelMask};
pub use mining::{mine_boundaries, mine_corpus, MiningConfig, MiningStats, PartialAnnotation};
pub use numerals::normalize_transcript;
pub use pipeline::Strategy;
pub use tagger::{CrfModel, TrainConfig};
