use std::collections::HashMap;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Character-window templates: unigrams at offsets -2..=2 and the bigrams
/// (c-1,c0), (c0,c+1) and (c-1,c+1). Positions outside the sentence read as
/// sentinels.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureTemplate;

impl FeatureTemplate {
    pub fn extract(&self, chars: &[char]) -> Vec<Vec<String>> {
        let n = chars.len() as isize;
        let at = |i: isize| -> String {
            if i < 0 {
                BOS.to_owned()
            } else if i >= n {
                EOS.to_owned()
            } else {
                chars[i as usize].to_string()
            }
        };
        (0..n)
            .map(|i| {
                let (l2, l1, c, r1, r2) = (at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
                vec![
                    format!("U-2={l2}"),
                    format!("U-1={l1}"),
                    format!("U0={c}"),
                    format!("U+1={r1}"),
                    format!("U+2={r2}"),
                    format!("B-1,0={l1}|{c}"),
                    format!("B0,+1={c}|{r1}"),
                    format!("B-1,+1={l1}|{r1}"),
                ]
            })
            .collect()
    }
}

/// Feature strings observed in training data, numbered by first occurrence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureVocab {
    pub fn build<'a>(sentences: impl IntoIterator<Item = &'a [char]>) -> Self {
        let mut vocab = Self::default();
        for chars in sentences {
            for feats in FeatureTemplate.extract(chars) {
                for f in feats {
                    vocab.insert(f);
                }
            }
        }
        vocab
    }

    pub fn from_names(names: Vec<String>) -> Option<Self> {
        let mut vocab = Self::default();
        for name in names {
            if vocab.index.contains_key(&name) {
                return None;
            }
            vocab.insert(name);
        }
        Some(vocab)
    }

    fn insert(&mut self, name: String) {
        if !self.index.contains_key(&name) {
            self.index.insert(name.clone(), self.names.len() as u32);
            self.names.push(name);
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Known feature ids per position; unseen features are dropped.
    pub fn lookup(&self, chars: &[char]) -> Vec<Vec<u32>> {
        FeatureTemplate
            .extract(chars)
            .into_iter()
            .map(|feats| feats.iter().filter_map(|f| self.get(f)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_at_sentence_edges() {
        let f = FeatureTemplate.extract(&['有', '人']);
        assert_eq!(f.len(), 2);
        assert_eq!(
            f[0],
            vec![
                "U-2=<s>",
                "U-1=<s>",
                "U0=有",
                "U+1=人",
                "U+2=</s>",
                "B-1,0=<s>|有",
                "B0,+1=有|人",
                "B-1,+1=<s>|人"
            ]
        );
    }

    #[test]
    fn deterministic_ids() {
        let a: Vec<char> = "有人在倾听".chars().collect();
        let v1 = FeatureVocab::build([a.as_slice()]);
        let v2 = FeatureVocab::build([a.as_slice()]);
        assert_eq!(v1, v2);
        assert_eq!(v1.lookup(&a), v2.lookup(&a));
        assert_eq!(v1.get("U-2=<s>"), Some(0));
        // unseen characters only keep their sentinel features
        let unseen = v1.lookup(&['龙']);
        assert_eq!(unseen[0].len(), 4);
    }
}
