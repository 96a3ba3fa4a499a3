//! The `pauseseg` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 internal error. Failures
//! print one tab-separated line `error<TAB>kind<TAB>message` to stderr.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::alignment::{parse_alignment_file, ParseOptions, DEFAULT_FRAME_OFFSET_MS};
use crate::corpus::{read_corpus_file, write_corpus, SegmentedSentence};
use crate::error::{Error, ErrorKind, Result};
use crate::evalkit::{evaluate, vocabulary};
use crate::mining::{
    mine_corpus, read_partials_file, sweep_thresholds, two_phase_sweep, write_partials, write_sweep_tsv, MiningConfig,
    DEFAULT_ALPHA_GRID, DEFAULT_MIN_GRID,
};
use crate::numerals::normalize_transcript;
use crate::pipeline::{run_strategy, Strategy};
use crate::synth::{generate, SynthSpec};
use crate::tagger::{complete, tag, CrfModel, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "pauseseg",
    version,
    about = "Word segmentation with boundaries mined from speech pauses"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine word boundaries from alignments into partial annotations.
    Mine(MineArgs),
    /// Score boundary mining over a grid of thresholds.
    Sweep(SweepArgs),
    /// Generate a synthetic two-domain benchmark.
    Synth(SynthArgs),
    /// Train a segmenter.
    Train(TrainArgs),
    /// Complete partial annotations with a trained model.
    Complete(CompleteArgs),
    /// Segment raw text, one sentence per line.
    Tag(TagArgs),
    /// Score a segmentation against gold.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct AlignmentInput {
    /// Alignment JSONL file.
    #[arg(long)]
    alignments: PathBuf,
    /// Frame offset in ms for records that do not carry one.
    #[arg(long = "frame-offset", default_value_t = DEFAULT_FRAME_OFFSET_MS)]
    frame_offset: f64,
    /// Keep records whose neighbouring spans overlap.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[command(flatten)]
    input: AlignmentInput,
    /// Absolute pause floor in ms.
    #[arg(long, default_value_t = 50.0)]
    min: f64,
    /// Pause floor as a fraction of the mean character duration.
    #[arg(long, default_value_t = 0.30)]
    alpha: f64,
    /// Partial-annotation JSONL output.
    #[arg(long)]
    out: PathBuf,
    /// Rejection report; defaults to `<out>.rejections.tsv`.
    #[arg(long)]
    rejections: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: AlignmentInput,
    /// Gold segmentation of the aligned sentences, in the same order.
    #[arg(long)]
    gold: PathBuf,
    #[arg(long = "min-grid", value_delimiter = ',', default_values_t = DEFAULT_MIN_GRID)]
    min_grid: Vec<f64>,
    #[arg(long = "alpha-grid", value_delimiter = ',', default_values_t = DEFAULT_ALPHA_GRID)]
    alpha_grid: Vec<f64>,
    /// Fix alpha at 0 to pick the floor, then sweep alpha at that floor.
    #[arg(long = "two-phase")]
    two_phase: bool,
    /// TSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// JSON generator spec; flags below override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long = "base-sentences")]
    base_sentences: Option<usize>,
    #[arg(long = "partial-sentences")]
    partial_sentences: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainOpts {
    #[arg(long = "lr", default_value_t = TrainConfig::default().learning_rate)]
    learning_rate: f64,
    #[arg(long = "batch-size", default_value_t = TrainConfig::default().batch_size)]
    batch_size: usize,
    #[arg(long, default_value_t = TrainConfig::default().patience)]
    patience: usize,
    #[arg(long = "max-epochs", default_value_t = TrainConfig::default().max_epochs)]
    max_epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().l2)]
    l2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainOpts {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            l2: self.l2,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Segmented training corpus.
    #[arg(long)]
    train: PathBuf,
    /// Segmented dev corpus for early stopping.
    #[arg(long)]
    dev: Option<PathBuf>,
    /// Partial annotations from `mine`.
    #[arg(long)]
    partial: Option<PathBuf>,
    #[arg(long, default_value = "base-only", value_parser = parse_strategy)]
    strategy: Strategy,
    /// Model output.
    #[arg(long)]
    model: PathBuf,
    /// Where to write the completed corpus of a completion strategy.
    #[arg(long = "completed-out")]
    completed_out: Option<PathBuf>,
    /// JSON training report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    opts: TrainOpts,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct CompleteArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    partial: PathBuf,
    /// Segmented corpus output.
    #[arg(long)]
    out: PathBuf,
    /// Ignore mined boundaries and decode freely.
    #[arg(long = "no-constraint")]
    no_constraint: bool,
}

#[derive(Debug, Args)]
struct TagArgs {
    #[arg(long)]
    model: PathBuf,
    /// Raw text, one sentence per line; whitespace is ignored.
    #[arg(long)]
    input: PathBuf,
    /// Output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convert digits and strip punctuation first.
    #[arg(long)]
    normalize: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Segmented training corpus whose words count as in-vocabulary.
    #[arg(long = "train-vocab")]
    train_vocab: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error\tusage\t{}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let (kind, code) = match e.kind() {
                ErrorKind::Usage => ("usage", 1),
                ErrorKind::Data => ("data", 2),
                ErrorKind::Internal => ("internal", 3),
            };
            let msg = e.to_string().replace(['\n', '\t'], " ");
            eprintln!("error\t{kind}\t{msg}");
            code
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Mine(a) => cmd_mine(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Tag(a) => cmd_tag(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_alignments(input: &AlignmentInput) -> Result<crate::alignment::ParsedAlignments> {
    let opts = ParseOptions {
        strict: !input.lenient,
        default_frame_offset_ms: input.frame_offset,
    };
    if !(input.frame_offset > 0.0) {
        return Err(Error::Config("--frame-offset must be positive".into()));
    }
    parse_alignment_file(&input.alignments, opts)
}

fn cmd_mine(a: MineArgs) -> Result<()> {
    let cfg = MiningConfig::new(a.min, a.alpha)?;
    let parsed = load_alignments(&a.input)?;
    let (mined, stats) = mine_corpus(&parsed.sentences, &cfg);

    let mut out = create(&a.out)?;
    write_partials(&mut out, &mined)?;
    finish(out, &a.out)?;

    let rej_path = a.rejections.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".rejections.tsv");
        PathBuf::from(p)
    });
    let mut rej = create(&rej_path)?;
    parsed.write_rejections(&mut rej).map_err(|e| Error::io(&rej_path, e))?;
    finish(rej, &rej_path)?;

    println!(
        "sentences\t{}\tboundaries\t{}\trejected\t{}\tmin_ms\t{}\talpha\t{}",
        stats.sentences,
        stats.boundaries,
        parsed.rejected(),
        cfg.min_ms,
        cfg.alpha
    );
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let parsed = load_alignments(&a.input)?;
    let gold = read_corpus_file(&a.gold)?;
    let mut buf = Vec::new();
    if a.two_phase {
        let sweep = two_phase_sweep(&parsed.sentences, &gold, &a.min_grid, &a.alpha_grid)?;
        writeln!(buf, "# phase 1: alpha fixed at 0").ok();
        write_sweep_tsv(&mut buf, &sweep.min_phase).ok();
        writeln!(buf, "# phase 2: min_ms fixed at {}", sweep.best_min_ms).ok();
        write_sweep_tsv(&mut buf, &sweep.alpha_phase).ok();
        writeln!(buf, "# best\tmin_ms={}\talpha={}", sweep.best_min_ms, sweep.best_alpha).ok();
    } else {
        let rows = sweep_thresholds(&parsed.sentences, &gold, &a.min_grid, &a.alpha_grid)?;
        write_sweep_tsv(&mut buf, &rows).ok();
    }
    match a.out {
        Some(path) => fs::write(&path, &buf).map_err(|e| Error::io(&path, e)),
        None => io::stdout().write_all(&buf).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let mut spec: SynthSpec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(noise) = a.noise {
        spec.noise = noise;
    }
    if let Some(n) = a.base_sentences {
        spec.base_sentences = n;
    }
    if let Some(n) = a.partial_sentences {
        spec.partial_sentences = n;
    }
    let data = generate(&spec)?;
    data.write_to_dir(&a.out_dir, &spec)?;
    println!(
        "source_train\t{}\ttarget_dev\t{}\ttarget_test\t{}\talignments\t{}",
        data.source_train.len(),
        data.target_dev.len(),
        data.target_test.len(),
        data.alignments.len()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let cfg = a.opts.config();
    cfg.validate()?;
    let base = read_corpus_file(&a.train)?;
    let dev = a.dev.as_ref().map(read_corpus_file).transpose()?;
    let partial = match (&a.partial, a.strategy) {
        (_, Strategy::BaseOnly) => Vec::new(),
        (Some(p), _) => read_partials_file(p)?,
        (None, s) => return Err(Error::Config(format!("strategy {s} needs --partial"))),
    };
    let out = run_strategy(a.strategy, &base, &partial, dev.as_deref(), &cfg)?;
    out.model.save(&a.model)?;
    if let (Some(path), Some(completed)) = (&a.completed_out, &out.completed) {
        let sents: Vec<SegmentedSentence> = completed.iter().map(|c| c.to_segmented()).collect();
        let mut w = create(path)?;
        write_corpus(&mut w, &sents).map_err(|e| Error::io(path, e))?;
        finish(w, path)?;
    }
    if let Some(path) = &a.report {
        write_text(path, &(serde_json::to_string_pretty(&out.report)? + "\n"))?;
    }
    println!(
        "strategy\t{}\tepochs\t{}\tbest_epoch\t{}\tbest_dev_f1\t{}",
        a.strategy,
        out.report.epochs_run,
        out.report.best_epoch,
        out.report
            .best_dev_score
            .map(|s| format!("{:.2}", 100.0 * s))
            .unwrap_or_else(|| "-".into())
    );
    Ok(())
}

fn cmd_complete(a: CompleteArgs) -> Result<()> {
    let model = CrfModel::load(&a.model)?;
    let partial = read_partials_file(&a.partial)?;
    let completed = complete(&model, &partial, !a.no_constraint);
    let sents: Vec<SegmentedSentence> = completed.iter().map(|c| c.to_segmented()).collect();
    let mut w = create(&a.out)?;
    write_corpus(&mut w, &sents).map_err(|e| Error::io(&a.out, e))?;
    finish(w, &a.out)
}

fn cmd_tag(a: TagArgs) -> Result<()> {
    let model = CrfModel::load(&a.model)?;
    let file = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&a.input, e))?;
        let text = if a.normalize {
            normalize_transcript(&line).map_err(|e| Error::Format {
                line: i + 1,
                message: e.to_string(),
            })?
        } else {
            line.chars().filter(|c| !c.is_whitespace()).collect()
        };
        lines.push(text);
    }
    let tagged: Vec<String> = lines
        .par_iter()
        .map(|text| {
            let chars: Vec<char> = text.chars().collect();
            tag(&model, &chars).join(" ")
        })
        .collect();
    let mut buf = String::new();
    for t in tagged {
        buf.push_str(&t);
        buf.push('\n');
    }
    match a.out {
        Some(path) => write_text(&path, &buf),
        None => io::stdout()
            .write_all(buf.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let gold = read_corpus_file(&a.gold)?;
    let pred = read_corpus_file(&a.pred)?;
    let vocab = match &a.train_vocab {
        Some(p) => vocabulary(&read_corpus_file(p)?),
        None => Default::default(),
    };
    let report = evaluate(&gold, &pred, &vocab)?;
    println!("{report}");
    if let Some(path) = &a.json {
        write_text(path, &(report.to_json() + "\n"))?;
    }
    Ok(())
}
