mod common;

use std::collections::HashSet;

use common::*;
use pauseseg::evalkit::evaluate;
use pauseseg::lattice::{
    constrained_log_forward, constrained_viterbi, constrained_viterbi_scored, count_legal_paths, forward_backward,
    path_score, Label, LabelLattice,
};
use pauseseg::numerals::chinese_numeral;
use pauseseg::tagger::{nll_full, nll_partial, SequenceScorer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn numerals_match_recursive_reading_below_ten_thousand() {
    for n in 0..10_000 {
        assert_eq!(chinese_numeral(n).unwrap(), oracle_numeral(n), "{n}");
    }
}

#[test]
fn numerals_match_recursive_reading_above_ten_thousand() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut values: Vec<u64> = (0..20_000).map(|_| rng.random_range(10_000..=99_999_999)).collect();
    values.extend([
        10_000, 10_001, 10_010, 10_100, 11_000, 20_000, 20_002, 100_000, 200_000, 99_999_999,
    ]);
    for n in values {
        assert_eq!(chinese_numeral(n).unwrap(), oracle_numeral(n), "{n}");
    }
    assert!(chinese_numeral(100_000_000).is_err());
}

#[test]
fn lattice_counts_and_scores_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let chars = vec!['字'; n];
        let b = random_boundaries(&mut rng, n);
        let lat = lattice_for(&chars, &b);
        let paths = oracle_paths(n, &b);
        assert_eq!(count_legal_paths(&lat).unwrap(), paths.len() as u64);

        let em = random_emissions(&mut rng, n, 3.0);
        let tr = random_transitions(&mut rng, 2.0);
        let scores: Vec<f64> = paths.iter().map(|p| oracle_score(&em, &tr, p)).collect();
        let want = oracle_log_sum(&scores);
        let got = constrained_log_forward(&em, &tr, &lat);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");

        let (path, score) = constrained_viterbi_scored(&em, &tr, &lat);
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((score - best).abs() < 1e-9);
        assert!((path_score(&em, &tr, &path) - best).abs() < 1e-9);
        assert!(paths.contains(&to_codes(&path)));
    }
}

#[test]
fn viterbi_ties_prefer_small_codes_late() {
    // among all maximal paths, the winner compares smallest from the end
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let b = random_boundaries(&mut rng, n);
        let lat = lattice_for(&vec!['字'; n], &b);
        // integer scores make ties common
        let em: Vec<[f64; 4]> = (0..n)
            .map(|_| std::array::from_fn(|_| rng.random_range(0..2) as f64))
            .collect();
        let tr: [[f64; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(0..2) as f64));
        let paths = oracle_paths(n, &b);
        let best = paths
            .iter()
            .map(|p| oracle_score(&em, &tr, p))
            .fold(f64::NEG_INFINITY, f64::max);
        let want = paths
            .iter()
            .filter(|p| oracle_score(&em, &tr, p) == best)
            .min_by_key(|p| p.iter().rev().copied().collect::<Vec<_>>())
            .unwrap();
        assert_eq!(&to_codes(&constrained_viterbi(&em, &tr, &lat)), want);
    }
}

#[test]
fn marginals_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let b = random_boundaries(&mut rng, n);
        let lat = lattice_for(&vec!['字'; n], &b);
        let em = random_emissions(&mut rng, n, 2.0);
        let tr = random_transitions(&mut rng, 2.0);
        let paths = oracle_paths(n, &b);
        let scores: Vec<f64> = paths.iter().map(|p| oracle_score(&em, &tr, p)).collect();
        let z = oracle_log_sum(&scores);
        let m = forward_backward(&em, &tr, &lat);
        assert!((m.log_partition - z).abs() < 1e-9);
        for i in 0..n {
            for y in 0..4 {
                let p: f64 = paths
                    .iter()
                    .zip(&scores)
                    .filter(|(p, _)| p[i] == y)
                    .map(|(_, s)| (s - z).exp())
                    .sum();
                assert!((m.unary[i][y] - p).abs() < 1e-9);
            }
        }
        for i in 0..n.saturating_sub(1) {
            for a in 0..4 {
                for c in 0..4 {
                    let p: f64 = paths
                        .iter()
                        .zip(&scores)
                        .filter(|(p, _)| p[i] == a && p[i + 1] == c)
                        .map(|(_, s)| (s - z).exp())
                        .sum();
                    assert!((m.pairwise[i][a][c] - p).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn unconstrained_lattice_admits_every_legal_path() {
    for n in 1..=8 {
        let lat = LabelLattice::unconstrained(n);
        assert_eq!(count_legal_paths(&lat).unwrap(), oracle_paths(n, &[]).len() as u64);
    }
}

fn finite_difference_check(mut model: pauseseg::CrfModel, f: impl Fn(&pauseseg::CrfModel) -> (f64, Vec<f64>)) -> f64 {
    let (_, grad) = f(&model);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (k, g) in grad.iter().enumerate() {
        let w = model.params()[k];
        model.params_mut()[k] = w + h;
        let up = f(&model).0;
        model.params_mut()[k] = w - h;
        let down = f(&model).0;
        model.params_mut()[k] = w;
        worst = worst.max(((up - down) / (2.0 * h) - g).abs());
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let alphabet = ['有', '人', '在', '听'];
    for _ in 0..15 {
        let n = rng.random_range(1..=7);
        let chars = random_chars(&mut rng, n, &alphabet);
        let other = random_chars(&mut rng, 5, &alphabet);
        let l2 = rng.random_range(0.0..0.1);
        let model = random_model(&mut rng, &[chars.clone(), other], l2, 1.0);
        let gold = random_gold(&mut rng, n);
        let worst = finite_difference_check(model.clone(), |m| nll_full(m, &chars, &gold).unwrap());
        assert!(worst < 1e-5, "full: {worst}");
        let lat = lattice_for(&chars, &random_boundaries(&mut rng, n));
        let worst = finite_difference_check(model, |m| nll_partial(m, &chars, &lat).unwrap());
        assert!(worst < 1e-5, "partial: {worst}");
    }
}

#[test]
fn objectives_match_enumerated_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let alphabet = ['细', '地', '倾'];
    for _ in 0..30 {
        let n = rng.random_range(1..=6);
        let chars = random_chars(&mut rng, n, &alphabet);
        let model = random_model(&mut rng, std::slice::from_ref(&chars), 0.0, 1.0);
        let em = model.emissions(&chars);
        let tr = model.transitions();
        let all: Vec<f64> = oracle_paths(n, &[]).iter().map(|p| oracle_score(&em, &tr, p)).collect();
        let z = oracle_log_sum(&all);

        let gold = random_gold(&mut rng, n);
        let (loss, _) = nll_full(&model, &chars, &gold).unwrap();
        assert!((loss - (z - oracle_score(&em, &tr, &to_codes(&gold)))).abs() < 1e-9);

        let b = random_boundaries(&mut rng, n);
        let inside: Vec<f64> = oracle_paths(n, &b).iter().map(|p| oracle_score(&em, &tr, p)).collect();
        let (loss, _) = nll_partial(&model, &chars, &lattice_for(&chars, &b)).unwrap();
        assert!((loss - (z - oracle_log_sum(&inside))).abs() < 1e-9);
        assert!(loss >= -1e-12);
    }
}

#[test]
fn evaluate_matches_span_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let alphabet = ['有', '人', '在', '细', '地'];
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for _ in 0..k {
            let n = rng.random_range(1..=10);
            let chars = random_chars(&mut rng, n, &alphabet);
            gold.push(random_segmentation(&mut rng, &chars, 3));
            pred.push(random_segmentation(&mut rng, &chars, 3));
        }
        let vocab: HashSet<String> = ["有", "人", "在细", "地"].iter().map(|s| s.to_string()).collect();
        let got = evaluate(&gold, &pred, &vocab).unwrap().counts;
        let want = oracle_eval(&gold, &pred, &vocab);
        assert_eq!(
            (
                got.gold_words,
                got.pred_words,
                got.correct_words,
                got.gold_oov,
                got.correct_oov
            ),
            (want.gold, want.pred, want.correct, want.gold_oov, want.correct_oov)
        );
    }
}

#[test]
fn no_illegal_bigram_is_ever_decoded() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..300 {
        let n = rng.random_range(1..=12);
        let lat = LabelLattice::unconstrained(n);
        // illegal transitions get huge bonuses to tempt the decoder
        let mut tr = random_transitions(&mut rng, 1.0);
        for a in Label::ALL {
            for b in Label::ALL {
                if !a.can_precede(b) {
                    tr[a.code()][b.code()] = 1e6;
                }
            }
        }
        let path = constrained_viterbi(&random_emissions(&mut rng, n, 5.0), &tr, &lat);
        assert!(oracle_legal(&to_codes(&path)));
    }
}
