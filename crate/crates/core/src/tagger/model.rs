use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureVocab;
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::lattice::{Transitions, LEGAL, LEGAL_PAIRS, NEG_SCORE, NUM_LABELS};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT_NAME: &str = "pauseseg-crf";

/// Anything that can score a character sequence for BMES decoding.
pub trait SequenceScorer {
    fn emissions(&self, chars: &[char]) -> Vec<[f64; NUM_LABELS]>;

    /// `trans[from][to]`; scheme-illegal entries are never consulted.
    fn transitions(&self) -> Transitions;
}

/// Feature-template CRF.
///
/// Parameters live in one flat vector: four emission weights per feature
/// (indexed `feature * 4 + label`) followed by the eight legal transition
/// weights in [`LEGAL_PAIRS`] order. Illegal transitions have no parameter
/// and always read as [`NEG_SCORE`].
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    vocab: FeatureVocab,
    weights: Vec<f64>,
    l2: f64,
    config: Option<TrainConfig>,
}

impl CrfModel {
    pub fn new(vocab: FeatureVocab, l2: f64) -> Self {
        let weights = vec![0.0; vocab.len() * NUM_LABELS + LEGAL_PAIRS.len()];
        Self {
            vocab,
            weights,
            l2,
            config: None,
        }
    }

    pub(crate) fn with_config(mut self, config: TrainConfig) -> Self {
        self.config = Some(config);
        self
    }

    pub fn vocab(&self) -> &FeatureVocab {
        &self.vocab
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn config(&self) -> Option<&TrainConfig> {
        self.config.as_ref()
    }

    pub fn num_params(&self) -> usize {
        self.weights.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.weights
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn transition_offset(&self) -> usize {
        self.vocab.len() * NUM_LABELS
    }

    pub(crate) fn emissions_for(&self, feats: &[Vec<u32>]) -> Vec<[f64; NUM_LABELS]> {
        feats
            .iter()
            .map(|ids| {
                let mut row = [0.0; NUM_LABELS];
                for &f in ids {
                    let base = f as usize * NUM_LABELS;
                    for (y, r) in row.iter_mut().enumerate() {
                        *r += self.weights[base + y];
                    }
                }
                row
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_json(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let off = self.transition_offset();
        let file = ModelFile {
            format: MODEL_FORMAT_NAME.into(),
            version: MODEL_FORMAT_VERSION,
            labels: "BMES".into(),
            l2: self.l2,
            config: self.config.clone(),
            features: self.vocab.names().to_vec(),
            emission: self.weights[..off]
                .chunks_exact(NUM_LABELS)
                .map(|c| [c[0], c[1], c[2], c[3]])
                .collect(),
            transitions: self.transitions(),
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(reader)?;
        let version = value.get("version").and_then(|v| v.as_u64());
        match version {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::ModelVersion {
                    found: v as u32,
                    expected: MODEL_FORMAT_VERSION,
                })
            }
            None => return Err(Error::Model("missing version".into())),
        }
        let file: ModelFile = serde_json::from_value(value)?;
        if file.format != MODEL_FORMAT_NAME || file.labels != "BMES" {
            return Err(Error::Model(format!("unexpected format {:?}", file.format)));
        }
        if file.features.len() != file.emission.len() {
            return Err(Error::Model(format!(
                "{} features but {} emission rows",
                file.features.len(),
                file.emission.len()
            )));
        }
        for (from, row) in file.transitions.iter().enumerate() {
            for (to, &w) in row.iter().enumerate() {
                if !LEGAL[from][to] && w != NEG_SCORE {
                    return Err(Error::Model(format!(
                        "illegal transition {from}->{to} carries weight {w}"
                    )));
                }
            }
        }
        let vocab =
            FeatureVocab::from_names(file.features).ok_or_else(|| Error::Model("duplicate feature names".into()))?;
        let mut weights: Vec<f64> = file.emission.into_iter().flatten().collect();
        weights.extend(LEGAL_PAIRS.iter().map(|&(a, b)| file.transitions[a][b]));
        Ok(Self {
            vocab,
            weights,
            l2: file.l2,
            config: file.config,
        })
    }
}

impl SequenceScorer for CrfModel {
    fn emissions(&self, chars: &[char]) -> Vec<[f64; NUM_LABELS]> {
        self.emissions_for(&self.vocab.lookup(chars))
    }

    fn transitions(&self) -> Transitions {
        let mut t = [[NEG_SCORE; NUM_LABELS]; NUM_LABELS];
        let off = self.transition_offset();
        for (k, &(a, b)) in LEGAL_PAIRS.iter().enumerate() {
            t[a][b] = self.weights[off + k];
        }
        t
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    labels: String,
    l2: f64,
    config: Option<TrainConfig>,
    features: Vec<String>,
    emission: Vec<[f64; NUM_LABELS]>,
    transitions: Transitions,
}
