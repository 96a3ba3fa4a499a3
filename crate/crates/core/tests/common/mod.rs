//! Independent brute-force oracles shared by the integration tests and the
//! acceptance runner. Nothing here calls the code it checks.

#![allow(dead_code)]

use std::collections::HashSet;

use pauseseg::corpus::SegmentedSentence;
use pauseseg::lattice::{Label, LabelLattice, NUM_LABELS};
use pauseseg::mining::PartialAnnotation;
use pauseseg::tagger::{CrfModel, FeatureVocab};
use rand::Rng;

const LETTERS: [char; 4] = ['B', 'M', 'E', 'S'];
const LEGAL_BIGRAMS: [&str; 8] = ["BM", "BE", "MM", "ME", "EB", "ES", "SB", "SS"];

fn letter(code: usize) -> char {
    LETTERS[code]
}

/// Scheme legality checked letter by letter.
pub fn oracle_legal(path: &[usize]) -> bool {
    let Some((&first, &last)) = path.first().zip(path.last()) else {
        return false;
    };
    if !"BS".contains(letter(first)) || !"ES".contains(letter(last)) {
        return false;
    }
    path.windows(2).all(|w| {
        let pair: String = [letter(w[0]), letter(w[1])].iter().collect();
        LEGAL_BIGRAMS.contains(&pair.as_str())
    })
}

/// Consistency with mined boundaries: left of a boundary ends a word, right
/// of it starts one.
pub fn oracle_respects(path: &[usize], boundaries: &[usize]) -> bool {
    boundaries
        .iter()
        .all(|&k| "ES".contains(letter(path[k - 1])) && "BS".contains(letter(path[k])))
}

/// Every label sequence of length `n` as code vectors.
pub fn all_sequences(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..NUM_LABELS.pow(n as u32)).map(move |mut x| {
        let mut v = vec![0; n];
        for slot in v.iter_mut() {
            *slot = x % NUM_LABELS;
            x /= NUM_LABELS;
        }
        v
    })
}

pub fn oracle_paths(n: usize, boundaries: &[usize]) -> Vec<Vec<usize>> {
    all_sequences(n)
        .filter(|p| oracle_legal(p) && oracle_respects(p, boundaries))
        .collect()
}

pub fn oracle_score(em: &[[f64; 4]], trans: &[[f64; 4]; 4], path: &[usize]) -> f64 {
    let mut s = em[0][path[0]];
    for i in 1..path.len() {
        s += trans[path[i - 1]][path[i]] + em[i][path[i]];
    }
    s
}

/// Log-sum-exp of path scores, shifted by the maximum.
pub fn oracle_log_sum(scores: &[f64]) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

pub fn to_codes(labels: &[Label]) -> Vec<usize> {
    labels.iter().map(|l| l.code()).collect()
}

pub fn random_boundaries<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (1..n).filter(|_| rng.random_bool(0.35)).collect()
}

pub fn random_emissions<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<[f64; 4]> {
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(-scale..scale)))
        .collect()
}

/// Random scores in every cell, illegal ones included.
pub fn random_transitions<R: Rng>(rng: &mut R, scale: f64) -> [[f64; 4]; 4] {
    std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-scale..scale)))
}

pub fn random_chars<R: Rng>(rng: &mut R, n: usize, alphabet: &[char]) -> Vec<char> {
    (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

/// A random scheme-legal gold path, built from random word lengths.
pub fn random_gold<R: Rng>(rng: &mut R, n: usize) -> Vec<Label> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(1..=(n - out.len()).min(4));
        if len == 1 {
            out.push(Label::S);
        } else {
            out.push(Label::B);
            out.extend(std::iter::repeat_n(Label::M, len - 2));
            out.push(Label::E);
        }
    }
    out
}

pub fn partial(chars: &[char], boundaries: Vec<usize>) -> PartialAnnotation {
    PartialAnnotation::new("t", chars.to_vec(), boundaries).expect("valid boundaries")
}

pub fn lattice_for(chars: &[char], boundaries: &[usize]) -> LabelLattice {
    pauseseg::lattice::build_lattice(&partial(chars, boundaries.to_vec()))
}

/// A model whose vocabulary comes from `corpus` and whose weights are drawn
/// uniformly from `(-scale, scale)`.
pub fn random_model<R: Rng>(rng: &mut R, corpus: &[Vec<char>], l2: f64, scale: f64) -> CrfModel {
    let vocab = FeatureVocab::build(corpus.iter().map(|c| c.as_slice()));
    let mut model = CrfModel::new(vocab, l2);
    for w in model.params_mut() {
        *w = rng.random_range(-scale..scale);
    }
    model
}

/// Integer counts from span-set intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleCounts {
    pub gold: usize,
    pub pred: usize,
    pub correct: usize,
    pub gold_oov: usize,
    pub correct_oov: usize,
}

fn span_set(words: &[String]) -> Vec<(usize, usize, String)> {
    let mut at = 0;
    words
        .iter()
        .map(|w| {
            let len = w.chars().count();
            at += len;
            (at - len, at, w.clone())
        })
        .collect()
}

pub fn oracle_eval(gold: &[SegmentedSentence], pred: &[SegmentedSentence], vocab: &HashSet<String>) -> OracleCounts {
    let mut c = OracleCounts::default();
    for (g, p) in gold.iter().zip(pred) {
        let gs = span_set(g.words());
        let ps: HashSet<(usize, usize)> = span_set(p.words()).into_iter().map(|(a, b, _)| (a, b)).collect();
        c.gold += gs.len();
        c.pred += ps.len();
        for (a, b, w) in gs {
            let hit = ps.contains(&(a, b));
            let oov = !vocab.contains(&w);
            if hit {
                c.correct += 1;
            }
            if oov {
                c.gold_oov += 1;
                if hit {
                    c.correct_oov += 1;
                }
            }
        }
    }
    c
}

/// Random segmentation of `chars` with word lengths up to `max_len`.
pub fn random_segmentation<R: Rng>(rng: &mut R, chars: &[char], max_len: usize) -> SegmentedSentence {
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let len = rng.random_range(1..=max_len.min(chars.len() - i));
        words.push(chars[i..i + len].iter().collect());
        i += len;
    }
    SegmentedSentence::new(words).expect("non-empty words")
}

/// Recursive colloquial reading, built top-down from place values.
pub fn oracle_numeral(n: u64) -> String {
    const D: [&str; 10] = ["零", "一", "二", "三", "四", "五", "六", "七", "八", "九"];
    fn head(d: u64) -> &'static str {
        if d == 2 {
            "两"
        } else {
            D[d as usize]
        }
    }
    // `inner` marks a section that follows a higher unit: no bare 十.
    fn below_10k(n: u64, inner: bool) -> String {
        match n {
            0..=9 => D[n as usize].to_string(),
            10..=19 if !inner => format!("十{}", if n.is_multiple_of(10) { "" } else { D[(n % 10) as usize] }),
            10..=99 => format!(
                "{}十{}",
                D[(n / 10) as usize],
                if n.is_multiple_of(10) { "" } else { D[(n % 10) as usize] }
            ),
            100..=999 => {
                let rest = n % 100;
                let tail = match rest {
                    0 => String::new(),
                    1..=9 => format!("零{}", D[rest as usize]),
                    _ => below_10k(rest, true),
                };
                format!("{}百{}", head(n / 100), tail)
            }
            _ => {
                let rest = n % 1000;
                let tail = match rest {
                    0 => String::new(),
                    1..=99 => format!("零{}", below_10k(rest, true)),
                    _ => below_10k(rest, true),
                };
                format!("{}千{}", head(n / 1000), tail)
            }
        }
    }
    if n < 10_000 {
        return below_10k(n, false);
    }
    let (high, low) = (n / 10_000, n % 10_000);
    let high_text = if high == 2 {
        "两".to_string()
    } else {
        below_10k(high, false)
    };
    let low_text = match low {
        0 => String::new(),
        1..=999 => format!("零{}", below_10k(low, true)),
        _ => below_10k(low, true),
    };
    format!("{high_text}万{low_text}")
}
