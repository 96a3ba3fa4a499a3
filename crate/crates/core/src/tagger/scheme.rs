use crate::error::{Error, Result};
use crate::lattice::Label;

/// How [`labels_to_words`] treats scheme-illegal label sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Reject the sequence.
    Strict,
    /// Start a new word at every illegal junction.
    Lenient,
}

pub fn words_to_labels<S: AsRef<str>>(words: &[S]) -> Result<Vec<Label>> {
    let mut labels = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let n = w.as_ref().chars().count();
        match n {
            0 => {
                return Err(Error::Format {
                    line: 0,
                    message: format!("word {i} is empty"),
                })
            }
            1 => labels.push(Label::S),
            _ => {
                labels.push(Label::B);
                labels.extend(std::iter::repeat_n(Label::M, n - 2));
                labels.push(Label::E);
            }
        }
    }
    Ok(labels)
}

/// Checks edge constraints and every transition of `labels`.
pub fn check_legal(labels: &[Label]) -> Result<()> {
    let (Some(first), Some(last)) = (labels.first(), labels.last()) else {
        return Ok(());
    };
    if !first.can_start() {
        return Err(Error::Scheme {
            position: 0,
            from: '^',
            to: first.as_char(),
        });
    }
    for (i, w) in labels.windows(2).enumerate() {
        if !w[0].can_precede(w[1]) {
            return Err(Error::Scheme {
                position: i + 1,
                from: w[0].as_char(),
                to: w[1].as_char(),
            });
        }
    }
    if !last.can_end() {
        return Err(Error::Scheme {
            position: labels.len() - 1,
            from: last.as_char(),
            to: '$',
        });
    }
    Ok(())
}

pub fn labels_to_words(chars: &[char], labels: &[Label], mode: DecodeMode) -> Result<Vec<String>> {
    if chars.len() != labels.len() {
        return Err(Error::Config(format!(
            "{} characters but {} labels",
            chars.len(),
            labels.len()
        )));
    }
    if mode == DecodeMode::Strict {
        check_legal(labels)?;
    }
    let mut words: Vec<String> = Vec::new();
    for (i, (&c, &l)) in chars.iter().zip(labels).enumerate() {
        let starts = i == 0 || l.can_start() || labels[i - 1].can_end();
        match words.last_mut() {
            Some(w) if !starts => w.push(c),
            _ => words.push(c.to_string()),
        }
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn worked_example_labels() {
        let words = ["有", "人", "在", "细细", "地", "倾听"];
        assert_eq!(words_to_labels(&words).unwrap(), vec![S, S, S, B, E, S, B, E]);
        assert_eq!(words_to_labels(&["倾听"]).unwrap(), vec![B, E]);
        assert_eq!(words_to_labels(&["一"]).unwrap(), vec![S]);
        assert_eq!(words_to_labels(&["一二三四"]).unwrap(), vec![B, M, M, E]);
        assert!(words_to_labels(&["一", ""]).is_err());
    }

    #[test]
    fn inverse() {
        let chars: Vec<char> = "有人".chars().collect();
        assert_eq!(
            labels_to_words(&chars, &[B, E], DecodeMode::Strict).unwrap(),
            vec!["有人"]
        );
        let chars: Vec<char> = "细细地".chars().collect();
        assert_eq!(
            labels_to_words(&chars, &[S, S, S], DecodeMode::Strict).unwrap(),
            vec!["细", "细", "地"]
        );
    }

    #[test]
    fn strict_rejects_with_position() {
        let chars: Vec<char> = "abc".chars().collect();
        match labels_to_words(&chars, &[B, S, S], DecodeMode::Strict) {
            Err(Error::Scheme { position, from, to }) => assert_eq!((position, from, to), (1, 'B', 'S')),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            labels_to_words(&chars, &[S, S, B], DecodeMode::Strict),
            Err(Error::Scheme { position: 2, .. })
        ));
        assert!(matches!(
            labels_to_words(&chars, &[M, E, S], DecodeMode::Strict),
            Err(Error::Scheme { position: 0, .. })
        ));
    }

    #[test]
    fn lenient_splits_at_illegal_junctions() {
        let chars: Vec<char> = "abcde".chars().collect();
        assert_eq!(
            labels_to_words(&chars, &[B, B, E, S, M], DecodeMode::Lenient).unwrap(),
            vec!["a", "bc", "d", "e"]
        );
        assert_eq!(
            labels_to_words(&chars, &[M, M, E, E, E], DecodeMode::Lenient).unwrap(),
            vec!["abc", "d", "e"]
        );
    }
}
