//! Constrained BMES label space and the dynamic programs that run over it.
//!
//! Scores are unnormalised log-potentials. Emissions are an `n x 4` matrix
//! indexed by label code, transitions a `4 x 4` matrix `trans[from][to]`.
//! Scheme-illegal transitions and disallowed cells never enter a path, so
//! their matrix entries are ignored.

use std::fmt;

use crate::error::{Error, Result};
use crate::mining::PartialAnnotation;

/// Stand-in for minus infinity in score tables.
pub const NEG_SCORE: f64 = -1.0e30;

pub const NUM_LABELS: usize = 4;

pub type Emissions = [[f64; NUM_LABELS]];
pub type Transitions = [[f64; NUM_LABELS]; NUM_LABELS];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    B = 0,
    M = 1,
    E = 2,
    S = 3,
}

impl Label {
    pub const ALL: [Label; NUM_LABELS] = [Label::B, Label::M, Label::E, Label::S];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Label> {
        Self::ALL.get(code).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            Label::B => 'B',
            Label::M => 'M',
            Label::E => 'E',
            Label::S => 'S',
        }
    }

    pub fn from_char(c: char) -> Option<Label> {
        match c {
            'B' => Some(Label::B),
            'M' => Some(Label::M),
            'E' => Some(Label::E),
            'S' => Some(Label::S),
            _ => None,
        }
    }

    /// Whether `self -> next` is a legal BMES succession.
    pub fn can_precede(self, next: Label) -> bool {
        LEGAL[self.code()][next.code()]
    }

    /// Labels that may open a word sequence.
    pub fn can_start(self) -> bool {
        matches!(self, Label::B | Label::S)
    }

    pub fn can_end(self) -> bool {
        matches!(self, Label::E | Label::S)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// `LEGAL[from][to]`: B->{M,E}, M->{M,E}, E->{B,S}, S->{B,S}.
pub const LEGAL: [[bool; NUM_LABELS]; NUM_LABELS] = [
    [false, true, true, false],
    [false, true, true, false],
    [true, false, false, true],
    [true, false, false, true],
];

/// The eight legal `(from, to)` pairs in row-major order.
pub const LEGAL_PAIRS: [(usize, usize); 8] = [(0, 1), (0, 2), (1, 1), (1, 2), (2, 0), (2, 3), (3, 0), (3, 3)];

/// A subset of {B, M, E, S}, one bit per label code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelMask(u8);

impl LabelMask {
    pub const ALL: LabelMask = LabelMask(0b1111);
    pub const EMPTY: LabelMask = LabelMask(0);
    /// {B, S}: a character that starts a word.
    pub const STARTS: LabelMask = LabelMask(0b1001);
    /// {E, S}: a character that ends a word.
    pub const ENDS: LabelMask = LabelMask(0b1100);

    pub fn from_bits(bits: u8) -> Self {
        LabelMask(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn of(labels: &[Label]) -> Self {
        LabelMask(labels.iter().fold(0, |m, l| m | (1 << l.code())))
    }

    pub fn single(label: Label) -> Self {
        LabelMask(1 << label.code())
    }

    pub fn contains(self, label: Label) -> bool {
        self.0 & (1 << label.code()) != 0
    }

    pub fn intersect(self, other: LabelMask) -> Self {
        LabelMask(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: LabelMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn labels(self) -> impl Iterator<Item = Label> {
        Label::ALL.into_iter().filter(move |l| self.contains(*l))
    }
}

impl fmt::Debug for LabelMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.labels().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// Per-position allowed label sets. Always admits at least one legal path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelLattice {
    allowed: Vec<LabelMask>,
}

impl LabelLattice {
    /// Only the sentence-edge constraints: the space of every scheme-legal
    /// sequence of length `n`.
    pub fn unconstrained(n: usize) -> Self {
        assert!(n > 0, "lattice needs at least one position");
        let mut allowed = vec![LabelMask::ALL; n];
        allowed[0] = allowed[0].intersect(LabelMask::STARTS);
        allowed[n - 1] = allowed[n - 1].intersect(LabelMask::ENDS);
        Self { allowed }
    }

    /// A lattice whose only path is `labels`.
    pub fn from_path(labels: &[Label]) -> Result<Self> {
        Self::from_allowed(labels.iter().map(|&l| LabelMask::single(l)).collect())
    }

    /// Validates an explicit allowed-set list: non-empty sets, edge
    /// constraints respected and at least one legal path.
    pub fn from_allowed(allowed: Vec<LabelMask>) -> Result<Self> {
        let bad = |reason: String| Error::Config(format!("invalid lattice: {reason}"));
        let n = allowed.len();
        if n == 0 {
            return Err(bad("no positions".into()));
        }
        if let Some(i) = allowed.iter().position(|m| m.is_empty()) {
            return Err(bad(format!("position {i} allows no label")));
        }
        if !allowed[0].is_subset_of(LabelMask::STARTS) {
            return Err(bad("first position must be within {B,S}".into()));
        }
        if !allowed[n - 1].is_subset_of(LabelMask::ENDS) {
            return Err(bad("last position must be within {E,S}".into()));
        }
        let lat = Self { allowed };
        if !lat.has_legal_path() {
            return Err(bad("no legal path".into()));
        }
        Ok(lat)
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn allowed(&self) -> &[LabelMask] {
        &self.allowed
    }

    pub fn allows(&self, position: usize, label: Label) -> bool {
        self.allowed[position].contains(label)
    }

    /// Whether `labels` is a legal path through this lattice.
    pub fn contains(&self, labels: &[Label]) -> bool {
        labels.len() == self.len()
            && labels.iter().zip(&self.allowed).all(|(l, m)| m.contains(*l))
            && labels.windows(2).all(|w| w[0].can_precede(w[1]))
    }

    fn has_legal_path(&self) -> bool {
        let mut reach = self.allowed[0];
        for &mask in &self.allowed[1..] {
            let mut next = LabelMask::EMPTY;
            for to in mask.labels() {
                if reach.labels().any(|from| from.can_precede(to)) {
                    next = LabelMask(next.0 | LabelMask::single(to).0);
                }
            }
            if next.is_empty() {
                return false;
            }
            reach = next;
        }
        true
    }

    /// Allowed-cell grid, one row per label, `#` allowed and `.` excluded.
    pub fn render_grid(&self, chars: Option<&[char]>) -> String {
        let mut out = String::new();
        if let Some(chars) = chars {
            out.push_str("  ");
            for c in chars {
                out.push(' ');
                out.push(*c);
            }
            out.push('\n');
        }
        for label in Label::ALL {
            out.push(label.as_char());
            out.push(' ');
            for m in &self.allowed {
                let cell = if m.contains(label) { '#' } else { '.' };
                // wide characters in the header take two columns
                if chars.is_some() {
                    out.push(' ');
                }
                out.push(' ');
                out.push(cell);
            }
            out.push('\n');
        }
        out
    }
}

/// Encodes mined boundaries: the character left of a boundary ends a word,
/// the one to its right starts one.
pub fn build_lattice(pa: &PartialAnnotation) -> LabelLattice {
    let mut lat = LabelLattice::unconstrained(pa.len());
    for &k in pa.boundaries() {
        lat.allowed[k - 1] = lat.allowed[k - 1].intersect(LabelMask::ENDS);
        lat.allowed[k] = lat.allowed[k].intersect(LabelMask::STARTS);
    }
    debug_assert!(lat.allowed.iter().all(|m| !m.is_empty()));
    lat
}

pub const ENUMERATION_LIMIT: usize = 20;

/// Number of legal label sequences in `lat`.
pub fn count_legal_paths(lat: &LabelLattice) -> Result<u64> {
    if lat.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit(lat.len()));
    }
    let mut counts = [0u64; NUM_LABELS];
    for l in lat.allowed[0].labels() {
        counts[l.code()] = 1;
    }
    for &mask in &lat.allowed[1..] {
        let mut next = [0u64; NUM_LABELS];
        for to in mask.labels() {
            next[to.code()] = Label::ALL
                .iter()
                .filter(|from| from.can_precede(to))
                .map(|from| counts[from.code()])
                .sum();
        }
        counts = next;
    }
    Ok(counts.iter().sum())
}

/// Score of one label path.
pub fn path_score(emissions: &Emissions, trans: &Transitions, labels: &[Label]) -> f64 {
    let mut score = 0.0;
    for (i, l) in labels.iter().enumerate() {
        score += emissions[i][l.code()];
        if i > 0 {
            score += trans[labels[i - 1].code()][l.code()];
        }
    }
    score
}

fn check_shapes(emissions: &Emissions, lat: &LabelLattice) {
    assert_eq!(emissions.len(), lat.len(), "emission rows must match lattice length");
}

/// Best legal path through `lat` together with its score.
///
/// Among equal-score paths the one with the smaller label code at the last
/// position where they differ wins.
pub fn constrained_viterbi_scored(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> (Vec<Label>, f64) {
    check_shapes(emissions, lat);
    let n = lat.len();
    let mut delta = vec![[NEG_SCORE; NUM_LABELS]; n];
    let mut back = vec![[0u8; NUM_LABELS]; n];
    for l in lat.allowed[0].labels() {
        delta[0][l.code()] = emissions[0][l.code()];
    }
    for i in 1..n {
        for to in lat.allowed[i].labels() {
            let mut best: Option<(f64, u8)> = None;
            for from in lat.allowed[i - 1].labels() {
                if !from.can_precede(to) || delta[i - 1][from.code()] <= NEG_SCORE {
                    continue;
                }
                let s = delta[i - 1][from.code()] + trans[from.code()][to.code()];
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, from.code() as u8));
                }
            }
            if let Some((s, from)) = best {
                delta[i][to.code()] = s + emissions[i][to.code()];
                back[i][to.code()] = from;
            }
        }
    }
    let mut last: Option<(f64, usize)> = None;
    for l in lat.allowed[n - 1].labels() {
        let s = delta[n - 1][l.code()];
        if s > NEG_SCORE && last.is_none_or(|(b, _)| s > b) {
            last = Some((s, l.code()));
        }
    }
    let (score, mut code) = last.expect("lattice admits a legal path");
    let mut path = vec![Label::S; n];
    for i in (0..n).rev() {
        path[i] = Label::ALL[code];
        code = back[i][code] as usize;
    }
    (path, score)
}

pub fn constrained_viterbi(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> Vec<Label> {
    constrained_viterbi_scored(emissions, trans, lat).0
}

#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a <= NEG_SCORE {
        return b;
    }
    if b <= NEG_SCORE {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

fn log_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().filter(|&v| v > NEG_SCORE).collect();
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return NEG_SCORE;
    };
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn forward_table(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> Vec<[f64; NUM_LABELS]> {
    let n = lat.len();
    let mut alpha = vec![[NEG_SCORE; NUM_LABELS]; n];
    for l in lat.allowed[0].labels() {
        alpha[0][l.code()] = emissions[0][l.code()];
    }
    for i in 1..n {
        for to in lat.allowed[i].labels() {
            let prev = lat.allowed[i - 1]
                .labels()
                .filter(|from| from.can_precede(to))
                .map(|from| alpha[i - 1][from.code()] + trans[from.code()][to.code()]);
            let acc = log_sum(prev);
            if acc > NEG_SCORE {
                alpha[i][to.code()] = acc + emissions[i][to.code()];
            }
        }
    }
    alpha
}

fn backward_table(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> Vec<[f64; NUM_LABELS]> {
    let n = lat.len();
    let mut beta = vec![[NEG_SCORE; NUM_LABELS]; n];
    for l in lat.allowed[n - 1].labels() {
        beta[n - 1][l.code()] = 0.0;
    }
    for i in (0..n - 1).rev() {
        for from in lat.allowed[i].labels() {
            let next = lat.allowed[i + 1]
                .labels()
                .filter(|to| from.can_precede(*to))
                .map(|to| trans[from.code()][to.code()] + emissions[i + 1][to.code()] + beta[i + 1][to.code()]);
            beta[i][from.code()] = log_sum(next);
        }
    }
    beta
}

/// Log of the summed exponentiated scores of every legal path in `lat`.
pub fn constrained_log_forward(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> f64 {
    check_shapes(emissions, lat);
    let alpha = forward_table(emissions, trans, lat);
    log_sum(alpha[lat.len() - 1].iter().copied())
}

/// Posterior marginals over the paths of a lattice.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_partition: f64,
    /// `unary[i][y]`: probability that position `i` carries label `y`.
    pub unary: Vec<[f64; NUM_LABELS]>,
    /// `pairwise[i][a][b]`: probability of `a` at `i` followed by `b` at
    /// `i + 1`.
    pub pairwise: Vec<[[f64; NUM_LABELS]; NUM_LABELS]>,
}

pub fn forward_backward(emissions: &Emissions, trans: &Transitions, lat: &LabelLattice) -> Marginals {
    check_shapes(emissions, lat);
    let n = lat.len();
    let alpha = forward_table(emissions, trans, lat);
    let beta = backward_table(emissions, trans, lat);
    let log_z = log_sum(alpha[n - 1].iter().copied());
    let mut unary = vec![[0.0; NUM_LABELS]; n];
    for i in 0..n {
        for l in lat.allowed[i].labels() {
            let (a, b) = (alpha[i][l.code()], beta[i][l.code()]);
            if a > NEG_SCORE && b > NEG_SCORE {
                unary[i][l.code()] = (a + b - log_z).exp();
            }
        }
    }
    let mut pairwise = vec![[[0.0; NUM_LABELS]; NUM_LABELS]; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        for from in lat.allowed[i].labels() {
            let a = alpha[i][from.code()];
            if a <= NEG_SCORE {
                continue;
            }
            for to in lat.allowed[i + 1].labels() {
                let b = beta[i + 1][to.code()];
                if !from.can_precede(to) || b <= NEG_SCORE {
                    continue;
                }
                let s = a + trans[from.code()][to.code()] + emissions[i + 1][to.code()] + b;
                pairwise[i][from.code()][to.code()] = (s - log_z).exp();
            }
        }
    }
    Marginals {
        log_partition: log_z,
        unary,
        pairwise,
    }
}
