//! Linear-chain CRF segmenter over BMES labels.

mod features;
mod model;
mod objective;
mod scheme;
mod train;

pub use features::{FeatureTemplate, FeatureVocab};
pub use model::{CrfModel, SequenceScorer, MODEL_FORMAT_VERSION};
pub use objective::{nll_full, nll_partial};
pub use scheme::{check_legal, labels_to_words, words_to_labels, DecodeMode};
pub use train::{
    complete, complete_then_train, tag, train, train_with_monitor, CompleteThenTrain, Completed, Example, Target,
    TrainConfig, TrainReport,
};
