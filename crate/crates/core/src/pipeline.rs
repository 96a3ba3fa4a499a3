//! Training strategies for combining manually segmented data with mined
//! partial annotations.

use std::fmt;
use std::str::FromStr;

use crate::corpus::SegmentedSentence;
use crate::error::{Error, Result};
use crate::mining::PartialAnnotation;
use crate::tagger::{complete_then_train, train, Completed, CrfModel, Example, TrainConfig, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Train on the segmented corpus only.
    BaseOnly,
    /// Complete partial annotations by constrained decoding, then retrain.
    CompleteThenTrain,
    /// Maximise the probability mass of each partial annotation's lattice.
    DirectlyTrain,
    /// Complete with a basic model while ignoring the mined boundaries.
    NoConstraintAblation,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::BaseOnly,
        Strategy::CompleteThenTrain,
        Strategy::DirectlyTrain,
        Strategy::NoConstraintAblation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::BaseOnly => "base-only",
            Strategy::CompleteThenTrain => "complete-then-train",
            Strategy::DirectlyTrain => "directly-train",
            Strategy::NoConstraintAblation => "no-constraint-ablation",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct StrategyOutput {
    pub model: CrfModel,
    pub report: TrainReport,
    /// The intermediate basic model, for the two completion strategies.
    pub basic: Option<(CrfModel, TrainReport)>,
    pub completed: Option<Vec<Completed>>,
}

pub fn run_strategy(
    strategy: Strategy,
    base: &[SegmentedSentence],
    partial: &[PartialAnnotation],
    dev: Option<&[SegmentedSentence]>,
    cfg: &TrainConfig,
) -> Result<StrategyOutput> {
    match strategy {
        Strategy::BaseOnly => {
            let examples = base_examples(base)?;
            let (model, report) = train(&examples, dev, cfg)?;
            Ok(StrategyOutput {
                model,
                report,
                basic: None,
                completed: None,
            })
        }
        Strategy::CompleteThenTrain | Strategy::NoConstraintAblation => {
            let constrained = strategy == Strategy::CompleteThenTrain;
            let out = complete_then_train(base, partial, dev, cfg, constrained)?;
            Ok(StrategyOutput {
                model: out.model,
                report: out.report,
                basic: Some((out.basic, out.basic_report)),
                completed: Some(out.completed),
            })
        }
        Strategy::DirectlyTrain => {
            let mut examples = base_examples(base)?;
            examples.extend(partial.iter().map(Example::from_partial));
            let (model, report) = train(&examples, dev, cfg)?;
            Ok(StrategyOutput {
                model,
                report,
                basic: None,
                completed: None,
            })
        }
    }
}

pub fn base_examples(base: &[SegmentedSentence]) -> Result<Vec<Example>> {
    base.iter().map(Example::from_segmented).collect()
}
