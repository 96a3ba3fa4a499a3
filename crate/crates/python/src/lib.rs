//! Python bindings for `pauseseg`.
//!
//! Labels cross the boundary as the letters `B`, `M`, `E`, `S`; a lattice is
//! a list of strings, one per position, naming its allowed labels.

use std::collections::HashSet;

use pauseseg::alignment::{parse_alignment_file as parse_file, AlignedSentence, ParseOptions};
use pauseseg::corpus::SegmentedSentence;
use pauseseg::lattice::{self, Label, LabelLattice, LabelMask};
use pauseseg::mining::{self, MiningConfig, PartialAnnotation};
use pauseseg::pipeline::{run_strategy, Strategy};
use pauseseg::tagger::{self, SequenceScorer};
use pauseseg::{CrfModel, Error, TrainConfig};
use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn labels_str(labels: &[Label]) -> String {
    labels.iter().map(|l| l.as_char()).collect()
}

fn mask_str(m: LabelMask) -> String {
    m.labels().map(|l| l.as_char()).collect()
}

fn parse_lattice(allowed: &[String]) -> PyResult<LabelLattice> {
    let masks = allowed
        .iter()
        .map(|cell| {
            cell.chars()
                .map(|c| Label::from_char(c).ok_or_else(|| PyValueError::new_err(format!("unknown label {c:?}"))))
                .collect::<PyResult<Vec<_>>>()
                .map(|ls| LabelMask::of(&ls))
        })
        .collect::<PyResult<Vec<_>>>()?;
    LabelLattice::from_allowed(masks).map_err(py_err)
}

fn lattice_or_free(allowed: Option<Vec<String>>, n: usize) -> PyResult<LabelLattice> {
    let lat = match allowed {
        Some(a) => parse_lattice(&a)?,
        None => LabelLattice::unconstrained(n),
    };
    if lat.len() != n {
        return Err(PyValueError::new_err(format!(
            "{n} emission rows but {} lattice positions",
            lat.len()
        )));
    }
    if n == 0 {
        return Err(PyValueError::new_err("empty sequence"));
    }
    Ok(lat)
}

fn segmented(lines: &[String]) -> PyResult<Vec<SegmentedSentence>> {
    lines
        .iter()
        .map(|l| SegmentedSentence::parse_line(l).map_err(py_err))
        .collect()
}

/// Character-level forced alignment of one sentence.
#[pyclass(name = "AlignedSentence", module = "pypauseseg", frozen)]
struct PyAligned(AlignedSentence);

#[pymethods]
impl PyAligned {
    #[new]
    #[pyo3(signature = (id, text, spans, frame_offset_ms = 5.0, strict = true))]
    fn new(id: String, text: &str, spans: Vec<(u64, u64)>, frame_offset_ms: f64, strict: bool) -> PyResult<Self> {
        let chars: Vec<char> = text.chars().collect();
        let built = if strict {
            AlignedSentence::new(id, chars, spans, frame_offset_ms)
        } else {
            AlignedSentence::new_lenient(id, chars, spans, frame_offset_ms)
        };
        built.map(PyAligned).map_err(|v| PyValueError::new_err(v.to_string()))
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id().to_owned()
    }

    #[getter]
    fn text(&self) -> String {
        self.0.text()
    }

    #[getter]
    fn spans(&self) -> Vec<(u64, u64)> {
        self.0.spans().to_vec()
    }

    #[getter]
    fn frame_offset_ms(&self) -> f64 {
        self.0.frame_offset_ms()
    }

    /// Pause in ms at gap `gap`, between characters `gap - 1` and `gap`.
    fn pause_ms(&self, gap: usize) -> PyResult<f64> {
        self.0.pause_ms(gap).map_err(py_err)
    }

    fn char_ms(&self, index: usize) -> PyResult<f64> {
        self.0.char_ms(index).map_err(py_err)
    }

    fn duration_profile<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let p = self.0.duration_profile();
        let d = PyDict::new(py);
        d.set_item("pause_ms", p.pause_ms)?;
        d.set_item("char_ms", p.char_ms)?;
        d.set_item("mean_char_ms", p.mean_char_ms)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("AlignedSentence(id={:?}, text={:?})", self.0.id(), self.0.text())
    }
}

/// A sentence with some known word boundaries.
#[pyclass(name = "PartialAnnotation", module = "pypauseseg", frozen)]
struct PyPartial(PartialAnnotation);

#[pymethods]
impl PyPartial {
    #[new]
    fn new(id: String, text: &str, boundaries: Vec<usize>) -> PyResult<Self> {
        PartialAnnotation::new(id, text.chars().collect(), boundaries)
            .map(PyPartial)
            .map_err(py_err)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id().to_owned()
    }

    #[getter]
    fn text(&self) -> String {
        self.0.text()
    }

    #[getter]
    fn boundaries(&self) -> Vec<usize> {
        self.0.boundaries().to_vec()
    }

    /// Text with `/` at every known boundary.
    fn render(&self) -> String {
        self.0.render()
    }

    fn lattice(&self) -> Vec<String> {
        lattice::build_lattice(&self.0)
            .allowed()
            .iter()
            .map(|&m| mask_str(m))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("PartialAnnotation({:?})", self.0.render())
    }
}

/// Feature-template linear-chain CRF segmenter.
#[pyclass(name = "CrfModel", module = "pypauseseg", frozen)]
struct PyModel(CrfModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        CrfModel::load(path).map(PyModel).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(py_err)
    }

    #[getter]
    fn num_params(&self) -> usize {
        self.0.num_params()
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.0.vocab().len()
    }

    /// Segments `text` into words.
    fn tag(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        tagger::tag(&self.0, &chars)
    }

    /// Fills partial annotations with the best path; `constrained` keeps the
    /// known boundaries.
    #[pyo3(signature = (partials, constrained = true))]
    fn complete(&self, py: Python<'_>, partials: Vec<PyRef<'_, PyPartial>>, constrained: bool) -> Vec<Vec<String>> {
        let partials: Vec<PartialAnnotation> = partials.iter().map(|p| p.0.clone()).collect();
        let model = &self.0;
        py.detach(|| tagger::complete(model, &partials, constrained))
            .iter()
            .map(|c| c.words())
            .collect()
    }

    /// Per-character scores in `B M E S` order.
    fn emissions(&self, text: &str) -> Vec<[f64; 4]> {
        self.0.emissions(&text.chars().collect::<Vec<_>>())
    }

    fn transitions(&self) -> [[f64; 4]; 4] {
        self.0.transitions()
    }
}

#[pyfunction]
fn normalize_transcript(text: &str) -> PyResult<String> {
    pauseseg::normalize_transcript(text).map_err(py_err)
}

#[pyfunction]
fn chinese_numeral(value: u64) -> PyResult<String> {
    pauseseg::numerals::chinese_numeral(value).map_err(py_err)
}

type Parsed = (Vec<PyAligned>, Vec<(usize, String)>);

/// Reads an alignment JSONL file. Returns the valid sentences and the
/// `(line, reason)` of every rejected record.
#[pyfunction]
#[pyo3(signature = (path, strict = true, frame_offset_ms = 5.0))]
fn parse_alignment_file(path: &str, strict: bool, frame_offset_ms: f64) -> PyResult<Parsed> {
    let opts = ParseOptions {
        strict,
        default_frame_offset_ms: frame_offset_ms,
    };
    let parsed = parse_file(path, opts).map_err(py_err)?;
    Ok((
        parsed.sentences.into_iter().map(PyAligned).collect(),
        parsed.rejections.into_iter().map(|r| (r.line, r.reason)).collect(),
    ))
}

#[pyfunction]
#[pyo3(signature = (sentence, min_ms = 50.0, alpha = 0.30))]
fn mine_boundaries(sentence: PyRef<'_, PyAligned>, min_ms: f64, alpha: f64) -> PyResult<PyPartial> {
    let cfg = MiningConfig::new(min_ms, alpha).map_err(py_err)?;
    Ok(PyPartial(mining::mine_boundaries(&sentence.0, &cfg)))
}

#[pyfunction]
#[pyo3(signature = (sentences, min_ms = 50.0, alpha = 0.30))]
fn mine_corpus(sentences: Vec<PyRef<'_, PyAligned>>, min_ms: f64, alpha: f64) -> PyResult<Vec<PyPartial>> {
    let cfg = MiningConfig::new(min_ms, alpha).map_err(py_err)?;
    let sentences: Vec<AlignedSentence> = sentences.iter().map(|s| s.0.clone()).collect();
    Ok(mining::mine_corpus(&sentences, &cfg)
        .0
        .into_iter()
        .map(PyPartial)
        .collect())
}

/// Allowed labels per character given known boundaries.
#[pyfunction]
fn build_lattice(text: &str, boundaries: Vec<usize>) -> PyResult<Vec<String>> {
    Ok(PyPartial::new(String::new(), text, boundaries)?.lattice())
}

#[pyfunction]
fn count_legal_paths(allowed: Vec<String>) -> PyResult<u64> {
    lattice::count_legal_paths(&parse_lattice(&allowed)?).map_err(py_err)
}

/// Best legal path and its score. Without `allowed` every scheme-legal path
/// is considered.
#[pyfunction]
#[pyo3(signature = (emissions, transitions, allowed = None))]
fn constrained_viterbi(
    emissions: Vec<[f64; 4]>,
    transitions: [[f64; 4]; 4],
    allowed: Option<Vec<String>>,
) -> PyResult<(String, f64)> {
    let lat = lattice_or_free(allowed, emissions.len())?;
    let (path, score) = lattice::constrained_viterbi_scored(&emissions, &transitions, &lat);
    Ok((labels_str(&path), score))
}

/// Log of the summed exponentiated scores of all legal paths.
#[pyfunction]
#[pyo3(signature = (emissions, transitions, allowed = None))]
fn constrained_log_forward(
    emissions: Vec<[f64; 4]>,
    transitions: [[f64; 4]; 4],
    allowed: Option<Vec<String>>,
) -> PyResult<f64> {
    let lat = lattice_or_free(allowed, emissions.len())?;
    Ok(lattice::constrained_log_forward(&emissions, &transitions, &lat))
}

/// Word P/R/F1 and OOV recall of space-separated `pred` lines against `gold`.
#[pyfunction]
#[pyo3(signature = (gold, pred, train_vocab = None))]
fn evaluate<'py>(
    py: Python<'py>,
    gold: Vec<String>,
    pred: Vec<String>,
    train_vocab: Option<HashSet<String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let vocab = train_vocab.unwrap_or_default();
    let r = pauseseg::evaluate(&segmented(&gold)?, &segmented(&pred)?, &vocab).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("r_oov", r.r_oov)?;
    d.set_item("gold_words", r.counts.gold_words)?;
    d.set_item("pred_words", r.counts.pred_words)?;
    d.set_item("correct_words", r.counts.correct_words)?;
    Ok(d)
}

/// Trains a model with one of the four strategies. Returns the model and
/// the training report as JSON.
#[pyfunction]
#[pyo3(signature = (
    base, dev = None, partial = None, strategy = "base-only", learning_rate = 0.002,
    batch_size = 256, patience = 10, max_epochs = 100, l2 = 1e-4, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    base: Vec<String>,
    dev: Option<Vec<String>>,
    partial: Option<Vec<PyRef<'_, PyPartial>>>,
    strategy: &str,
    learning_rate: f64,
    batch_size: usize,
    patience: usize,
    max_epochs: usize,
    l2: f64,
    seed: u64,
) -> PyResult<(PyModel, String)> {
    let strategy: Strategy = strategy.parse().map_err(py_err)?;
    let cfg = TrainConfig {
        learning_rate,
        batch_size,
        patience,
        max_epochs,
        l2,
        seed,
    };
    let base = segmented(&base)?;
    let dev = dev.as_deref().map(segmented).transpose()?;
    let partial: Vec<PartialAnnotation> = partial.unwrap_or_default().iter().map(|p| p.0.clone()).collect();
    let out = py
        .detach(|| run_strategy(strategy, &base, &partial, dev.as_deref(), &cfg))
        .map_err(py_err)?;
    let report = serde_json::to_string(&out.report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((PyModel(out.model), report))
}

#[pymodule]
fn pypauseseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAligned>()?;
    m.add_class::<PyPartial>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(normalize_transcript, m)?)?;
    m.add_function(wrap_pyfunction!(chinese_numeral, m)?)?;
    m.add_function(wrap_pyfunction!(parse_alignment_file, m)?)?;
    m.add_function(wrap_pyfunction!(mine_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(mine_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(build_lattice, m)?)?;
    m.add_function(wrap_pyfunction!(count_legal_paths, m)?)?;
    m.add_function(wrap_pyfunction!(constrained_viterbi, m)?)?;
    m.add_function(wrap_pyfunction!(constrained_log_forward, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
