mod common;

use std::collections::HashSet;
use std::io::Cursor;

use pauseseg::alignment::{parse_alignments, write_alignments, AlignedSentence, ParseOptions};
use pauseseg::corpus::SegmentedSentence;
use pauseseg::evalkit::evaluate;
use pauseseg::lattice::{build_lattice, LabelLattice};
use pauseseg::mining::{mine_boundaries, read_partials, write_partials, MiningConfig, PartialAnnotation};
use pauseseg::numerals::normalize_transcript;
use pauseseg::tagger::{labels_to_words, tag, words_to_labels, CrfModel, DecodeMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ALPHABET: &[char] = &['有', '人', '在', '细', '地', '倾', '听'];

fn chars_strategy(max: usize) -> impl Strategy<Value = Vec<char>> {
    prop::collection::vec(prop::sample::select(ALPHABET), 1..=max)
}

fn sentence_strategy() -> impl Strategy<Value = SegmentedSentence> {
    prop::collection::vec(prop::collection::vec(prop::sample::select(ALPHABET), 1..=4), 1..=8)
        .prop_map(|ws| SegmentedSentence::new(ws.into_iter().map(|w| w.into_iter().collect()).collect()).unwrap())
}

/// Non-overlapping spans built from per-character (pause, duration) frames.
fn aligned_strategy() -> impl Strategy<Value = AlignedSentence> {
    (
        prop::collection::vec((0u64..40, 1u64..80), 1..=12),
        prop::sample::select(vec![1.0, 5.0, 10.0]),
    )
        .prop_map(|(frames, ofs)| {
            let mut t = 0;
            let spans: Vec<(u64, u64)> = frames
                .iter()
                .map(|&(gap, dur)| {
                    let b = t + gap;
                    t = b + dur;
                    (b, t)
                })
                .collect();
            let chars = (0..spans.len()).map(|i| ALPHABET[i % ALPHABET.len()]).collect();
            AlignedSentence::new("p", chars, spans, ofs).unwrap()
        })
}

proptest! {
    #[test]
    fn normalize_is_idempotent_and_clean(s in "[0-9a-z有人在，。！ 　「」$%0-9]{0,24}") {
        let once = normalize_transcript(&s).unwrap();
        prop_assert_eq!(normalize_transcript(&once).unwrap(), once.clone());
        prop_assert!(!once.chars().any(|c| c.is_ascii_digit() || c.is_whitespace() || "，。！「」$%".contains(c)));
    }

    #[test]
    fn pauses_are_non_negative_and_profile_agrees(s in aligned_strategy()) {
        let p = s.duration_profile();
        prop_assert_eq!(p.pause_ms.len(), s.len() - 1);
        for k in 1..s.len() {
            let pause = s.pause_ms(k).unwrap();
            prop_assert!(pause >= 0.0);
            prop_assert_eq!(pause, p.pause_ms[k - 1]);
        }
        for i in 0..s.len() {
            prop_assert_eq!(s.char_ms(i).unwrap(), p.char_ms[i]);
        }
        let mean = p.char_ms.iter().sum::<f64>() / s.len() as f64;
        prop_assert!((p.mean_char_ms - mean).abs() < 1e-9);
        prop_assert!(s.pause_ms(0).is_err());
        prop_assert!(s.pause_ms(s.len()).is_err());
    }

    #[test]
    fn mining_is_monotone(s in aligned_strategy(), m1 in 0.0..150.0f64, m2 in 0.0..150.0f64,
                          a1 in 0.0..1.0f64, a2 in 0.0..1.0f64) {
        let (lo_m, hi_m) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        let (lo_a, hi_a) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let loose = mine_boundaries(&s, &MiningConfig::new(lo_m, lo_a).unwrap());
        let tight = mine_boundaries(&s, &MiningConfig::new(hi_m, hi_a).unwrap());
        let loose: HashSet<usize> = loose.boundaries().iter().copied().collect();
        prop_assert!(tight.boundaries().iter().all(|b| loose.contains(b)));
        for &k in tight.boundaries() {
            prop_assert!((1..s.len()).contains(&k));
        }
    }

    #[test]
    fn zero_thresholds_mine_every_gap(s in aligned_strategy()) {
        let all = mine_boundaries(&s, &MiningConfig::new(0.0, 0.0).unwrap());
        prop_assert_eq!(all.boundaries().to_vec(), (1..s.len()).collect::<Vec<_>>());
    }

    #[test]
    fn alignments_round_trip(sents in prop::collection::vec(aligned_strategy(), 0..5)) {
        let mut buf = Vec::new();
        write_alignments(&mut buf, &sents).unwrap();
        let parsed = parse_alignments(Cursor::new(&buf), ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.rejected(), 0);
        prop_assert_eq!(parsed.sentences, sents);
    }

    #[test]
    fn partials_round_trip(chars in chars_strategy(10), mask in prop::collection::vec(any::<bool>(), 10)) {
        let b: Vec<usize> = (1..chars.len()).filter(|&k| mask[k]).collect();
        let pa = vec![PartialAnnotation::new("x", chars, b).unwrap()];
        let mut buf = Vec::new();
        write_partials(&mut buf, &pa).unwrap();
        prop_assert_eq!(read_partials(Cursor::new(&buf)).unwrap(), pa);
    }

    #[test]
    fn labels_round_trip(s in sentence_strategy()) {
        let labels = words_to_labels(s.words()).unwrap();
        prop_assert!(common::oracle_legal(&common::to_codes(&labels)));
        let back = labels_to_words(&s.chars(), &labels, DecodeMode::Strict).unwrap();
        prop_assert_eq!(back, s.words().to_vec());
    }

    #[test]
    fn gold_path_lies_in_lattice_of_its_own_boundaries(s in sentence_strategy(),
                                                       keep in prop::collection::vec(any::<bool>(), 32)) {
        let b: Vec<usize> = s.boundaries().into_iter().filter(|&k| keep[k % 32]).collect();
        let lat = build_lattice(&PartialAnnotation::new("g", s.chars(), b).unwrap());
        prop_assert!(lat.contains(&words_to_labels(s.words()).unwrap()));
    }

    #[test]
    fn lattice_membership_matches_oracle(n in 1usize..=6, keep in prop::collection::vec(any::<bool>(), 6)) {
        let b: Vec<usize> = (1..n).filter(|&k| keep[k]).collect();
        let lat = common::lattice_for(&vec!['字'; n], &b);
        for p in common::all_sequences(n) {
            let labels: Vec<_> = p.iter().map(|&c| pauseseg::Label::ALL[c]).collect();
            let want = common::oracle_legal(&p) && common::oracle_respects(&p, &b);
            prop_assert_eq!(lat.contains(&labels), want);
        }
        prop_assert!(LabelLattice::unconstrained(n).len() == n);
    }

    #[test]
    fn precision_and_recall_swap(g in prop::collection::vec(sentence_strategy(), 1..4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<SegmentedSentence> = g.iter().map(|s| common::random_segmentation(&mut rng, &s.chars(), 3)).collect();
        let none = HashSet::new();
        let gp = evaluate(&g, &p, &none).unwrap();
        let pg = evaluate(&p, &g, &none).unwrap();
        prop_assert_eq!(gp.precision, pg.recall);
        prop_assert_eq!(gp.recall, pg.precision);
        prop_assert_eq!(gp.f1, pg.f1);
        let same = evaluate(&g, &g, &none).unwrap();
        prop_assert_eq!((same.precision, same.recall, same.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn tag_partitions_input(chars in chars_strategy(20), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model: CrfModel = common::random_model(&mut rng, &[ALPHABET.to_vec()], 0.0, 3.0);
        let words = tag(&model, &chars);
        prop_assert!(words.iter().all(|w| !w.is_empty()));
        prop_assert_eq!(words.concat(), chars.iter().collect::<String>());
    }
}
