//! Negative log-likelihoods for full and partial supervision.
//!
//! Both objectives normalise over every scheme-legal path, i.e. the lattice
//! with only the sentence-edge constraints.

use super::model::{CrfModel, SequenceScorer};
use super::scheme::check_legal;
use crate::error::{Error, Result};
use crate::lattice::{forward_backward, path_score, Label, LabelLattice, Marginals, LEGAL_PAIRS, NUM_LABELS};

/// Loss and gradient of one sentence without the L2 term, in a sparse form
/// that pairs with the sentence's feature ids.
pub(crate) struct SentenceGrad {
    pub loss: f64,
    /// Per-position gradient w.r.t. the emission score of each label.
    pub emission: Vec<[f64; NUM_LABELS]>,
    /// Gradient w.r.t. the legal transitions, in `LEGAL_PAIRS` order.
    pub transition: [f64; LEGAL_PAIRS.len()],
}

impl SentenceGrad {
    pub fn add_to(&self, feats: &[Vec<u32>], transition_offset: usize, scale: f64, grad: &mut [f64]) {
        for (ids, delta) in feats.iter().zip(&self.emission) {
            for &f in ids {
                let base = f as usize * NUM_LABELS;
                for y in 0..NUM_LABELS {
                    grad[base + y] += scale * delta[y];
                }
            }
        }
        for (k, g) in self.transition.iter().enumerate() {
            grad[transition_offset + k] += scale * g;
        }
    }
}

fn expectations(m: &Marginals) -> (Vec<[f64; NUM_LABELS]>, [f64; LEGAL_PAIRS.len()]) {
    let mut trans = [0.0; LEGAL_PAIRS.len()];
    for p in &m.pairwise {
        for (k, &(a, b)) in LEGAL_PAIRS.iter().enumerate() {
            trans[k] += p[a][b];
        }
    }
    (m.unary.clone(), trans)
}

pub(crate) fn full_sentence_grad(model: &CrfModel, feats: &[Vec<u32>], gold: &[Label]) -> SentenceGrad {
    let emissions = model.emissions_for(feats);
    let trans = model.transitions();
    let n = gold.len();
    let full = forward_backward(&emissions, &trans, &LabelLattice::unconstrained(n));
    let (mut emission, mut transition) = expectations(&full);
    for (i, l) in gold.iter().enumerate() {
        emission[i][l.code()] -= 1.0;
    }
    for w in gold.windows(2) {
        let k = LEGAL_PAIRS
            .iter()
            .position(|&p| p == (w[0].code(), w[1].code()))
            .expect("gold path is scheme-legal");
        transition[k] -= 1.0;
    }
    SentenceGrad {
        loss: full.log_partition - path_score(&emissions, &trans, gold),
        emission,
        transition,
    }
}

pub(crate) fn partial_sentence_grad(model: &CrfModel, feats: &[Vec<u32>], lat: &LabelLattice) -> SentenceGrad {
    let emissions = model.emissions_for(feats);
    let trans = model.transitions();
    let full = forward_backward(&emissions, &trans, &LabelLattice::unconstrained(lat.len()));
    let restricted = forward_backward(&emissions, &trans, lat);
    let (mut emission, mut transition) = expectations(&full);
    let (r_em, r_tr) = expectations(&restricted);
    for (row, r) in emission.iter_mut().zip(&r_em) {
        for y in 0..NUM_LABELS {
            row[y] -= r[y];
        }
    }
    for (t, r) in transition.iter_mut().zip(&r_tr) {
        *t -= r;
    }
    SentenceGrad {
        loss: full.log_partition - restricted.log_partition,
        emission,
        transition,
    }
}

fn with_l2(model: &CrfModel, feats: &[Vec<u32>], sg: SentenceGrad) -> (f64, Vec<f64>) {
    let l2 = model.l2();
    let params = model.params();
    let mut grad: Vec<f64> = params.iter().map(|w| l2 * w).collect();
    sg.add_to(feats, model.transition_offset(), 1.0, &mut grad);
    let penalty = 0.5 * l2 * params.iter().map(|w| w * w).sum::<f64>();
    (sg.loss + penalty, grad)
}

/// Negative log-probability of the gold path plus the L2 penalty, with the
/// gradient over [`CrfModel::params`].
pub fn nll_full(model: &CrfModel, chars: &[char], gold: &[Label]) -> Result<(f64, Vec<f64>)> {
    if chars.len() != gold.len() || chars.is_empty() {
        return Err(Error::Config(format!(
            "{} characters but {} gold labels",
            chars.len(),
            gold.len()
        )));
    }
    check_legal(gold)?;
    let feats = model.vocab().lookup(chars);
    let sg = full_sentence_grad(model, &feats, gold);
    Ok(with_l2(model, &feats, sg))
}

/// Negative log of the probability mass inside `lat`, plus the L2 penalty.
pub fn nll_partial(model: &CrfModel, chars: &[char], lat: &LabelLattice) -> Result<(f64, Vec<f64>)> {
    if chars.len() != lat.len() {
        return Err(Error::Config(format!(
            "{} characters but lattice of length {}",
            chars.len(),
            lat.len()
        )));
    }
    let feats = model.vocab().lookup(chars);
    let sg = partial_sentence_grad(model, &feats, lat);
    Ok(with_l2(model, &feats, sg))
}
