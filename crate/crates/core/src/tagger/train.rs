use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureVocab;
use super::model::{CrfModel, SequenceScorer};
use super::objective::{full_sentence_grad, partial_sentence_grad, SentenceGrad};
use super::scheme::{check_legal, labels_to_words, words_to_labels, DecodeMode};
use crate::corpus::SegmentedSentence;
use crate::error::{Error, Result};
use crate::evalkit::evaluate;
use crate::lattice::{build_lattice, constrained_viterbi, Label, LabelLattice};
use crate::mining::PartialAnnotation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Sentences per mini-batch.
    pub batch_size: usize,
    /// Epochs without a new best dev score before stopping.
    pub patience: usize,
    pub max_epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.002,
            batch_size: 256,
            patience: 10,
            max_epochs: 100,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_owned()));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max epochs must be positive");
        }
        if !(self.l2 >= 0.0) {
            return bad("l2 must be non-negative");
        }
        Ok(())
    }
}

/// Supervision attached to one training sentence.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// A single gold label path.
    Full(Vec<Label>),
    /// Every path through the lattice counts as correct.
    Partial(LabelLattice),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub chars: Vec<char>,
    pub target: Target,
}

impl Example {
    pub fn full(chars: Vec<char>, labels: Vec<Label>) -> Result<Self> {
        if chars.len() != labels.len() || chars.is_empty() {
            return Err(Error::Config(format!(
                "{} characters but {} labels",
                chars.len(),
                labels.len()
            )));
        }
        check_legal(&labels)?;
        Ok(Self {
            chars,
            target: Target::Full(labels),
        })
    }

    pub fn from_segmented(s: &SegmentedSentence) -> Result<Self> {
        Self::full(s.chars(), words_to_labels(s.words())?)
    }

    pub fn from_partial(p: &PartialAnnotation) -> Self {
        Self {
            chars: p.chars().to_vec(),
            target: Target::Partial(build_lattice(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean unregularised loss over the epoch's sentences.
    pub loss: f64,
    pub dev_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Epoch whose snapshot was returned.
    pub best_epoch: usize,
    pub best_dev_score: Option<f64>,
    pub history: Vec<EpochStats>,
}

struct Prepared {
    feats: Vec<Vec<u32>>,
    target: Target,
}

impl Prepared {
    fn grad(&self, model: &CrfModel) -> SentenceGrad {
        match &self.target {
            Target::Full(gold) => full_sentence_grad(model, &self.feats, gold),
            Target::Partial(lat) => partial_sentence_grad(model, &self.feats, lat),
        }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + Self::EPS);
        }
    }
}

/// Trains with early stopping on dev F1 when `dev` is given, otherwise for
/// `max_epochs` epochs.
pub fn train(
    examples: &[Example],
    dev: Option<&[SegmentedSentence]>,
    cfg: &TrainConfig,
) -> Result<(CrfModel, TrainReport)> {
    match dev {
        Some(dev) => {
            let mut monitor = |m: &CrfModel| dev_f1(m, dev);
            fit(examples, cfg, Some(&mut monitor))
        }
        None => fit(examples, cfg, None),
    }
}

/// Like [`train`] with a caller-supplied score evaluated after every epoch;
/// higher is better.
pub fn train_with_monitor<F>(examples: &[Example], cfg: &TrainConfig, mut monitor: F) -> Result<(CrfModel, TrainReport)>
where
    F: FnMut(&CrfModel) -> Result<f64>,
{
    fit(examples, cfg, Some(&mut monitor))
}

fn dev_f1(model: &CrfModel, dev: &[SegmentedSentence]) -> Result<f64> {
    let preds: Vec<SegmentedSentence> = dev
        .par_iter()
        .map(|s| SegmentedSentence::new(tag(model, &s.chars())))
        .collect::<Result<_>>()?;
    Ok(evaluate(dev, &preds, &Default::default())?.f1)
}

type Monitor<'a> = Option<&'a mut dyn FnMut(&CrfModel) -> Result<f64>>;

fn fit(examples: &[Example], cfg: &TrainConfig, mut monitor: Monitor<'_>) -> Result<(CrfModel, TrainReport)> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::Config("training corpus is empty".into()));
    }
    let vocab = FeatureVocab::build(examples.iter().map(|e| e.chars.as_slice()));
    let mut prepared = Vec::with_capacity(examples.len());
    for e in examples {
        let n = e.chars.len();
        match &e.target {
            Target::Full(labels) if labels.len() != n => {
                return Err(Error::Config("label count differs from sentence length".into()))
            }
            Target::Partial(lat) if lat.len() != n => {
                return Err(Error::Config("lattice length differs from sentence length".into()))
            }
            _ => {}
        }
        prepared.push(Prepared {
            feats: vocab.lookup(&e.chars),
            target: e.target.clone(),
        });
    }

    let mut model = CrfModel::new(vocab, cfg.l2).with_config(cfg.clone());
    let offset = model.transition_offset();
    let mut adam = Adam::new(model.num_params(), cfg.learning_rate);
    let mut grad = vec![0.0; model.num_params()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..prepared.len()).collect();

    let mut history = Vec::new();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut stale = 0;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let grads: Vec<SentenceGrad> = batch.par_iter().map(|&i| prepared[i].grad(&model)).collect();
            grad.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            // fixed summation order keeps runs reproducible
            for (g, &i) in grads.iter().zip(batch) {
                g.add_to(&prepared[i].feats, offset, scale, &mut grad);
                loss_sum += g.loss;
            }
            for (g, w) in grad.iter_mut().zip(model.params()) {
                *g += cfg.l2 * w;
            }
            adam.step(model.params_mut(), &grad);
        }

        let dev_score = match monitor.as_mut() {
            Some(f) => Some(f(&model)?),
            None => None,
        };
        history.push(EpochStats {
            epoch,
            loss: loss_sum / prepared.len() as f64,
            dev_score,
        });
        if let Some(score) = dev_score {
            if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                best = Some((score, epoch, model.params().to_vec()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
    }

    let epochs_run = history.len();
    let (best_epoch, best_dev_score) = match best {
        Some((score, epoch, params)) => {
            model.params_mut().copy_from_slice(&params);
            (epoch, Some(score))
        }
        None => (epochs_run, None),
    };
    Ok((
        model,
        TrainReport {
            epochs_run,
            best_epoch,
            best_dev_score,
            history,
        },
    ))
}

/// A partial annotation filled in to a full label path.
#[derive(Debug, Clone, PartialEq)]
pub struct Completed {
    pub id: String,
    pub chars: Vec<char>,
    pub labels: Vec<Label>,
}

impl Completed {
    pub fn words(&self) -> Vec<String> {
        labels_to_words(&self.chars, &self.labels, DecodeMode::Strict).expect("decoder output is scheme-legal")
    }

    pub fn to_segmented(&self) -> SegmentedSentence {
        SegmentedSentence::new(self.words()).expect("decoder output covers every character")
    }

    pub fn to_example(&self) -> Example {
        Example {
            chars: self.chars.clone(),
            target: Target::Full(self.labels.clone()),
        }
    }
}

/// Fills every partial annotation with the model's best path. With
/// `constrained` false the mined boundaries are ignored and decoding runs
/// over all scheme-legal paths.
pub fn complete<S: SequenceScorer + Sync>(
    model: &S,
    partials: &[PartialAnnotation],
    constrained: bool,
) -> Vec<Completed> {
    let trans = model.transitions();
    partials
        .par_iter()
        .map(|p| {
            let lat = if constrained {
                build_lattice(p)
            } else {
                LabelLattice::unconstrained(p.len())
            };
            let labels = constrained_viterbi(&model.emissions(p.chars()), &trans, &lat);
            Completed {
                id: p.id().to_owned(),
                chars: p.chars().to_vec(),
                labels,
            }
        })
        .collect()
}

/// Segments raw text with unconstrained scheme-legal Viterbi.
pub fn tag<S: SequenceScorer>(model: &S, chars: &[char]) -> Vec<String> {
    if chars.is_empty() {
        return Vec::new();
    }
    let lat = LabelLattice::unconstrained(chars.len());
    let labels = constrained_viterbi(&model.emissions(chars), &model.transitions(), &lat);
    labels_to_words(chars, &labels, DecodeMode::Strict).expect("decoder output is scheme-legal")
}

/// Output of the three-step complete-then-train procedure.
#[derive(Debug, Clone)]
pub struct CompleteThenTrain {
    pub basic: CrfModel,
    pub basic_report: TrainReport,
    pub completed: Vec<Completed>,
    pub model: CrfModel,
    pub report: TrainReport,
}

/// Trains a basic model on `base`, completes `partial` with it and trains
/// the final model on both.
pub fn complete_then_train(
    base: &[SegmentedSentence],
    partial: &[PartialAnnotation],
    dev: Option<&[SegmentedSentence]>,
    cfg: &TrainConfig,
    constrained: bool,
) -> Result<CompleteThenTrain> {
    let base_examples: Vec<Example> = base.iter().map(Example::from_segmented).collect::<Result<_>>()?;
    let (basic, basic_report) = train(&base_examples, dev, cfg)?;
    let completed = complete(&basic, partial, constrained);
    let mut all = base_examples;
    all.extend(completed.iter().map(Completed::to_example));
    let (model, report) = train(&all, dev, cfg)?;
    Ok(CompleteThenTrain {
        basic,
        basic_report,
        completed,
        model,
        report,
    })
}
