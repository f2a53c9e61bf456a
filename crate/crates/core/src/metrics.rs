//! Reference-based translation metrics: BLEU, TER, chrF, RIBES and
//! exact-match METEOR, plus a corpus scorer that runs all of them.
//!
//! All functions are pure. Scores are `f64`; the intermediate counts that
//! define them are exposed as integers or exact rationals so callers can
//! check arithmetic identities without rounding.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalizer::{pretokenize, pretokenize_split_punct};

pub const DEFAULT_BLEU_ORDER: usize = 4;
pub const DEFAULT_CHRF_ORDER: usize = 6;
pub const DEFAULT_CHRF_BETA: f64 = 2.0;
pub const DEFAULT_RIBES_ALPHA: f64 = 0.25;
pub const DEFAULT_RIBES_BETA: f64 = 0.10;
/// Longest hypothesis span TER will consider moving.
pub const TER_MAX_SHIFT_SPAN: usize = 10;
/// Upper bound on shift spans examined per greedy round.
pub const TER_MAX_SHIFT_CANDIDATES: usize = 1000;
const METEOR_NODE_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no segments to score")]
    EmptyCorpus,
    #[error("reference is empty")]
    EmptyReference,
    #[error("hypothesis has {hyp} lines but reference has {reference}")]
    LineCountMismatch { hyp: usize, reference: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPair {
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
}

impl SegmentPair {
    pub fn new<S: AsRef<str>>(hypothesis: &[S], reference: &[S]) -> Self {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_owned()).collect();
        Self {
            hypothesis: own(hypothesis),
            reference: own(reference),
        }
    }

    /// Splits both sides on whitespace.
    pub fn from_text(hypothesis: &str, reference: &str) -> Self {
        Self {
            hypothesis: pretokenize(hypothesis),
            reference: pretokenize(reference),
        }
    }
}

// ---------------------------------------------------------------- BLEU

/// Clipped n-gram statistics summed over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn new(max_n: usize) -> Self {
        Self {
            matches: vec![0; max_n],
            totals: vec![0; max_n],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    pub fn add_segment<S: AsRef<str> + Eq + std::hash::Hash>(&mut self, hyp: &[S], reference: &[S]) {
        self.hyp_len += hyp.len() as u64;
        self.ref_len += reference.len() as u64;
        for n in 1..=self.matches.len() {
            let hyp_grams = ngram_counts(hyp, n);
            let ref_grams = ngram_counts(reference, n);
            for (gram, &count) in &hyp_grams {
                let clip = ref_grams.get(gram).copied().unwrap_or(0);
                self.matches[n - 1] += count.min(clip);
            }
            self.totals[n - 1] += hyp.len().saturating_sub(n - 1) as u64;
        }
    }

    fn merge(mut self, other: BleuStats) -> BleuStats {
        for n in 0..self.matches.len() {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self
    }

    pub fn brevity_penalty(&self) -> f64 {
        brevity_penalty(self.hyp_len as usize, self.ref_len as usize)
    }

    /// Corpus BLEU on 0..100. Orders with no hypothesis n-grams are left
    /// out of the geometric mean; a zero precision on any remaining order
    /// gives 0.
    pub fn score(&self) -> f64 {
        let used: Vec<usize> = (0..self.totals.len()).filter(|&n| self.totals[n] > 0).collect();
        if used.is_empty() || used.iter().any(|&n| self.matches[n] == 0) {
            return 0.0;
        }
        let weight = 1.0 / used.len() as f64;
        let log_sum: f64 = used
            .iter()
            .map(|&n| weight * (self.matches[n] as f64 / self.totals[n] as f64).ln())
            .sum();
        100.0 * self.brevity_penalty() * log_sum.exp()
    }
}

fn ngram_counts<S: Eq + std::hash::Hash>(tokens: &[S], n: usize) -> HashMap<&[S], u64> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// `min(1, exp(1 - ref_len / hyp_len))`, and 0 for an empty hypothesis.
pub fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len == 0 {
        0.0
    } else if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

pub fn bleu_stats(pairs: &[SegmentPair], max_n: usize) -> BleuStats {
    pairs
        .par_iter()
        .map(|p| {
            let mut s = BleuStats::new(max_n);
            s.add_segment(&p.hypothesis, &p.reference);
            s
        })
        .reduce(|| BleuStats::new(max_n), BleuStats::merge)
}

pub fn bleu(pairs: &[SegmentPair], max_n: usize) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    Ok(bleu_stats(pairs, max_n).score())
}

// ----------------------------------------------------------------- TER

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum EditOp {
    Insert { pos: usize, word: String },
    Delete { pos: usize },
    Substitute { pos: usize, word: String },
    /// Remove `len` words at `src_start`, then reinsert them so they begin
    /// at `dest` in the shortened sequence.
    Shift { src_start: usize, len: usize, dest: usize },
}

/// Operations applied in order, each against the sequence produced by the
/// previous one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    pub fn cost(&self) -> usize {
        self.ops.len()
    }

    pub fn apply<S: AsRef<str>>(&self, hyp: &[S]) -> Vec<String> {
        let mut words: Vec<String> = hyp.iter().map(|s| s.as_ref().to_owned()).collect();
        for op in &self.ops {
            match op {
                EditOp::Insert { pos, word } => words.insert(*pos, word.clone()),
                EditOp::Delete { pos } => {
                    words.remove(*pos);
                }
                EditOp::Substitute { pos, word } => words[*pos] = word.clone(),
                EditOp::Shift {
                    src_start,
                    len,
                    dest,
                } => words = shifted(&words, *src_start, *len, *dest),
            }
        }
        words
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerAlignment {
    pub shifts: usize,
    /// Insertions, deletions and substitutions after shifting.
    pub edits: usize,
    pub ref_len: usize,
    pub script: EditScript,
}

impl TerAlignment {
    pub fn total_edits(&self) -> usize {
        self.shifts + self.edits
    }

    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.total_edits() as u64, self.ref_len as u64)
    }

    pub fn score(&self) -> f64 {
        self.total_edits() as f64 / self.ref_len as f64
    }
}

/// Moves `words[start..start + len]` so that it begins at `dest` once removed.
pub fn shifted<T: Clone>(words: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(words.len());
    rest.extend_from_slice(&words[..start]);
    rest.extend_from_slice(&words[start + len..]);
    let mut out = Vec::with_capacity(words.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&words[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Word-level Levenshtein distance with unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y {
                diag
            } else {
                1 + diag.min(up).min(row[j])
            };
            diag = up;
        }
    }
    row[b.len()]
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Match,
    Sub,
    Ins,
    Del,
}

/// Levenshtein alignment from `hyp` to `reference`, left to right.
fn align<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<Step> {
    let (n, m) = (hyp.len(), reference.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            d[i][j] = if hyp[i - 1] == reference[j - 1] {
                d[i - 1][j - 1]
            } else {
                1 + d[i - 1][j - 1].min(d[i - 1][j]).min(d[i][j - 1])
            };
        }
    }
    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && hyp[i - 1] == reference[j - 1] && d[i][j] == d[i - 1][j - 1] {
            steps.push(Step::Match);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 {
            steps.push(Step::Sub);
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            steps.push(Step::Del);
            i -= 1;
        } else {
            steps.push(Step::Ins);
            j -= 1;
        }
    }
    steps.reverse();
    steps
}

/// Hypothesis positions that the alignment pairs with an equal reference word.
fn matched_positions(steps: &[Step], hyp_len: usize) -> Vec<bool> {
    let mut matched = vec![false; hyp_len];
    let mut i = 0;
    for s in steps {
        match s {
            Step::Match => {
                matched[i] = true;
                i += 1;
            }
            Step::Sub | Step::Del => i += 1,
            Step::Ins => {}
        }
    }
    matched
}

struct ShiftCandidate {
    reduction: usize,
    start: usize,
    len: usize,
    dest: usize,
    result_cost: usize,
}

impl ShiftCandidate {
    /// Larger reduction, then longer span, then earlier start, then earlier
    /// destination.
    fn better_than(&self, other: &ShiftCandidate) -> bool {
        (self.reduction, self.len, other.start, other.dest)
            .cmp(&(other.reduction, other.len, self.start, self.dest))
            == Ordering::Greater
    }
}

fn best_shift<T: PartialEq + Clone>(words: &[T], reference: &[T], cost: usize) -> Option<ShiftCandidate> {
    let matched = matched_positions(&align(words, reference), words.len());
    let mut best: Option<ShiftCandidate> = None;
    let mut spans = 0;
    'outer: for start in 0..words.len() {
        for len in 1..=TER_MAX_SHIFT_SPAN.min(words.len() - start) {
            let span = &words[start..start + len];
            if matched[start..start + len].iter().all(|&m| m) {
                continue;
            }
            if !reference.windows(len).any(|w| w == span) {
                // Longer spans starting here cannot match either.
                break;
            }
            spans += 1;
            if spans > TER_MAX_SHIFT_CANDIDATES {
                break 'outer;
            }
            for dest in 0..=(words.len() - len) {
                if dest == start {
                    continue;
                }
                let candidate = shifted(words, start, len, dest);
                let result_cost = levenshtein(&candidate, reference);
                if result_cost >= cost {
                    continue;
                }
                let c = ShiftCandidate {
                    reduction: cost - result_cost,
                    start,
                    len,
                    dest,
                    result_cost,
                };
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    best = Some(c);
                }
            }
        }
    }
    best
}

fn ter_unchecked<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> TerAlignment {
    let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let mut words: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
    let mut ops = Vec::new();
    let mut cost = levenshtein(&words, &reference);
    let mut shifts = 0;
    while cost > 0 {
        let Some(c) = best_shift(&words, &reference, cost) else {
            break;
        };
        words = shifted(&words, c.start, c.len, c.dest);
        ops.push(EditOp::Shift {
            src_start: c.start,
            len: c.len,
            dest: c.dest,
        });
        shifts += 1;
        cost = c.result_cost;
    }
    let mut pos = 0;
    let mut j = 0;
    for step in align(&words, &reference) {
        match step {
            Step::Match => {
                pos += 1;
                j += 1;
            }
            Step::Sub => {
                ops.push(EditOp::Substitute {
                    pos,
                    word: reference[j].to_owned(),
                });
                pos += 1;
                j += 1;
            }
            Step::Ins => {
                ops.push(EditOp::Insert {
                    pos,
                    word: reference[j].to_owned(),
                });
                pos += 1;
                j += 1;
            }
            Step::Del => ops.push(EditOp::Delete { pos }),
        }
    }
    TerAlignment {
        shifts,
        edits: cost,
        ref_len: reference.len(),
        script: EditScript { ops },
    }
}

/// Translation edit rate of one segment, with greedy block shifts.
///
/// Each round applies the single shift that most lowers the Levenshtein
/// distance to the reference; a shift is only considered if the moved span
/// occurs somewhere in the reference and contains at least one word the
/// current alignment leaves unmatched.
pub fn ter<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Result<TerAlignment, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    Ok(ter_unchecked(hyp, reference))
}

/// Micro-averaged TER over a corpus, times 100.
pub fn corpus_ter(pairs: &[SegmentPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let (edits, ref_len) = pairs
        .par_iter()
        .map(|p| {
            let a = ter_unchecked(&p.hypothesis, &p.reference);
            (a.total_edits(), a.ref_len)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if ref_len == 0 {
        return Err(MetricsError::EmptyReference);
    }
    Ok(100.0 * edits as f64 / ref_len as f64)
}

// ---------------------------------------------------------------- chrF

/// Character n-gram F-score on 0..100 with whitespace removed.
///
/// Orders where either side has no n-grams are skipped. Two empty strings
/// score 100; otherwise a score with every order skipped is 0.
pub fn chrf(hyp: &str, reference: &str, max_char_n: usize, beta: f64) -> f64 {
    let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if h.is_empty() && r.is_empty() {
        return 100.0;
    }
    let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
    for n in 1..=max_char_n {
        if h.len() < n || r.len() < n {
            continue;
        }
        let hg = ngram_counts(&h, n);
        let rg = ngram_counts(&r, n);
        let matches: u64 = hg
            .iter()
            .map(|(g, &c)| c.min(rg.get(g).copied().unwrap_or(0)))
            .sum();
        p_sum += matches as f64 / (h.len() - n + 1) as f64;
        r_sum += matches as f64 / (r.len() - n + 1) as f64;
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    if p == 0.0 || r == 0.0 {
        return 0.0;
    }
    let b2 = beta * beta;
    100.0 * (1.0 + b2) * p * r / (b2 * p + r)
}

// --------------------------------------------------------------- RIBES

/// Reference positions of aligned hypothesis words, in hypothesis order.
///
/// The k-th occurrence of a word in the hypothesis is aligned to its k-th
/// occurrence in the reference, which reduces to direct alignment for words
/// that are unique in both sentences.
pub fn ribes_alignment<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Vec<usize> {
    let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, w) in reference.iter().enumerate() {
        positions.entry(w.as_ref()).or_default().push(j);
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut out = Vec::new();
    for w in hyp {
        let k = seen.entry(w.as_ref()).or_insert(0);
        if let Some(&j) = positions.get(w.as_ref()).and_then(|p| p.get(*k)) {
            out.push(j);
        }
        *k += 1;
    }
    out
}

/// Kendall's tau-a of a sequence against its sorted order:
/// (concordant - discordant) / C(k, 2), tied pairs counting as neither.
/// Sequences shorter than two give 0.
pub fn kendall_tau<T: Ord + Clone>(ranks: &[T]) -> Ratio<i64> {
    let k = ranks.len() as i64;
    if k < 2 {
        return Ratio::from_integer(0);
    }
    let pairs = k * (k - 1) / 2;
    let mut work = ranks.to_vec();
    let discordant = count_inversions(&mut work) as i64;
    // `work` is now sorted; count pairs of equal values.
    let mut ties = 0i64;
    let mut run = 1i64;
    for i in 1..work.len() {
        if work[i] == work[i - 1] {
            run += 1;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    ties += run * (run - 1) / 2;
    let concordant = pairs - discordant - ties;
    Ratio::new(concordant - discordant, pairs)
}

/// Strict inversions, counted while merge-sorting in place.
fn count_inversions<T: Ord + Clone>(v: &mut [T]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            inv += (mid - i) as u64;
            merged.push(v[j].clone());
            j += 1;
        } else {
            merged.push(v[i].clone());
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.clone_from_slice(&merged);
    inv
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RibesParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RibesParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_RIBES_ALPHA,
            beta: DEFAULT_RIBES_BETA,
        }
    }
}

/// Word-order score `NKT * P^alpha * BP^beta` on 0..1.
///
/// Fewer than two alignments give an NKT of 0, except a one-word hypothesis
/// equal to a one-word reference, which scores 1.
pub fn ribes<S: AsRef<str>>(hyp: &[S], reference: &[S], params: RibesParams) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let aligned = ribes_alignment(hyp, reference);
    let nkt = if aligned.len() >= 2 {
        let tau = kendall_tau(&aligned);
        (*tau.numer() as f64 / *tau.denom() as f64 + 1.0) / 2.0
    } else if hyp.len() == 1 && reference.len() == 1 && aligned.len() == 1 {
        1.0
    } else {
        0.0
    };
    if nkt == 0.0 {
        return 0.0;
    }
    let precision = aligned.len() as f64 / hyp.len() as f64;
    let bp = brevity_penalty(hyp.len(), reference.len());
    nkt * precision.powf(params.alpha) * bp.powf(params.beta)
}

// -------------------------------------------------------------- METEOR

/// An exact unigram matching: `pairs[i] = (hyp_pos, ref_pos)` in
/// hypothesis order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
}

/// Number of maximal runs adjacent in both the hypothesis and the reference.
pub fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    pairs
        .iter()
        .enumerate()
        .filter(|&(k, &(h, r))| k == 0 || !(pairs[k - 1].0 + 1 == h && pairs[k - 1].1 + 1 == r))
        .count()
}

struct MatchSearch {
    hyp: Vec<Option<usize>>,
    ref_ids: Vec<usize>,
    ref_positions: Vec<Vec<usize>>,
    target: usize,
    used: Vec<bool>,
    current: Vec<(usize, usize)>,
    best: Option<(usize, Vec<(usize, usize)>)>,
    nodes: usize,
    /// suffix_counts[i][w]: occurrences of word w in hyp[i..].
    suffix_counts: Vec<HashMap<usize, usize>>,
}

impl MatchSearch {
    fn upper_bound(&self, i: usize) -> usize {
        self.suffix_counts[i]
            .iter()
            .map(|(&w, &c)| {
                let free = self.ref_positions[w].iter().filter(|&&j| !self.used[j]).count();
                c.min(free)
            })
            .sum()
    }

    fn run(&mut self, i: usize, chunks: usize) {
        self.nodes += 1;
        if self.nodes > METEOR_NODE_LIMIT && self.best.is_some() {
            return;
        }
        if let Some((best, _)) = &self.best {
            if chunks >= *best {
                return;
            }
        }
        if self.current.len() == self.target {
            self.best = Some((chunks, self.current.clone()));
            return;
        }
        if i == self.hyp.len() || self.current.len() + self.upper_bound(i) < self.target {
            return;
        }
        if let Some(w) = self.hyp[i] {
            let follow = self
                .current
                .last()
                .filter(|&&(h, _)| h + 1 == i)
                .map(|&(_, r)| r + 1)
                .filter(|&r| r < self.ref_ids.len() && self.ref_ids[r] == w && !self.used[r]);
            let mut options: Vec<usize> = follow.into_iter().collect();
            options.extend(
                self.ref_positions[w]
                    .iter()
                    .copied()
                    .filter(|&r| !self.used[r] && Some(r) != follow),
            );
            for r in options {
                let extra = usize::from(Some(r) != follow);
                self.used[r] = true;
                self.current.push((i, r));
                self.run(i + 1, chunks + extra);
                self.current.pop();
                self.used[r] = false;
            }
        }
        self.run(i + 1, chunks);
    }
}

/// A maximum-size one-to-one exact matching with as few chunks as the
/// search finds. The search is exhaustive unless it exceeds an internal
/// node budget, in which case the best matching found so far is returned.
pub fn meteor_matching<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> Matching {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut ref_ids = Vec::with_capacity(reference.len());
    for w in reference {
        let next = ids.len();
        ref_ids.push(*ids.entry(w.as_ref()).or_insert(next));
    }
    let mut ref_positions = vec![Vec::new(); ids.len()];
    for (j, &w) in ref_ids.iter().enumerate() {
        ref_positions[w].push(j);
    }
    let hyp_ids: Vec<Option<usize>> = hyp.iter().map(|w| ids.get(w.as_ref()).copied()).collect();
    let mut hyp_counts: HashMap<usize, usize> = HashMap::new();
    for w in hyp_ids.iter().flatten() {
        *hyp_counts.entry(*w).or_insert(0) += 1;
    }
    let target: usize = hyp_counts
        .iter()
        .map(|(&w, &c)| c.min(ref_positions[w].len()))
        .sum();
    let mut suffix_counts = vec![HashMap::new(); hyp_ids.len() + 1];
    for i in (0..hyp_ids.len()).rev() {
        let mut counts = suffix_counts[i + 1].clone();
        if let Some(w) = hyp_ids[i] {
            *counts.entry(w).or_insert(0) += 1;
        }
        suffix_counts[i] = counts;
    }
    let mut search = MatchSearch {
        used: vec![false; ref_ids.len()],
        hyp: hyp_ids,
        ref_ids,
        ref_positions,
        target,
        current: Vec::new(),
        best: None,
        nodes: 0,
        suffix_counts,
    };
    search.run(0, 0);
    let (chunks, pairs) = search.best.unwrap_or_default();
    Matching { pairs, chunks }
}

/// METEOR restricted to exact matches, on 0..1:
/// `F * (1 - 0.5 * (chunks / m)^3)` with `F = 10PR / (R + 9P)`.
pub fn meteor_exact<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let matching = meteor_matching(hyp, reference);
    let m = matching.pairs.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let p = m / hyp.len() as f64;
    let r = m / reference.len() as f64;
    let f = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (matching.chunks as f64 / m).powi(3);
    f * (1.0 - penalty)
}

// -------------------------------------------------------------- corpus

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tokenization {
    #[default]
    WordSplitPunct,
    WordPlain,
}

impl Tokenization {
    pub fn name(self) -> &'static str {
        match self {
            Tokenization::WordSplitPunct => "word-split-punct",
            Tokenization::WordPlain => "word-plain",
        }
    }

    pub fn tokenize(self, line: &str) -> Vec<String> {
        match self {
            Tokenization::WordSplitPunct => pretokenize_split_punct(line),
            Tokenization::WordPlain => pretokenize(line),
        }
    }
}

impl fmt::Display for Tokenization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tokenization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word-split-punct" => Ok(Tokenization::WordSplitPunct),
            "word-plain" => Ok(Tokenization::WordPlain),
            _ => Err(format!("unknown tokenization `{s}` (expected word-split-punct or word-plain)")),
        }
    }
}

/// Corpus-level scores. `ter` is already multiplied by 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub bleu: f64,
    pub ter: f64,
    pub chrf: f64,
    pub ribes: f64,
    pub meteor_exact: f64,
    pub tokenization: Tokenization,
    pub segments: usize,
}

/// Scores line-aligned hypotheses against references. BLEU and TER are
/// corpus-level; chrF, RIBES and METEOR are averaged over segments.
pub fn score_corpus<H: AsRef<str> + Sync, R: AsRef<str> + Sync>(
    hyp_lines: &[H],
    ref_lines: &[R],
    tokenization: Tokenization,
) -> Result<MetricScore, MetricsError> {
    if hyp_lines.len() != ref_lines.len() {
        return Err(MetricsError::LineCountMismatch {
            hyp: hyp_lines.len(),
            reference: ref_lines.len(),
        });
    }
    if hyp_lines.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let pairs: Vec<SegmentPair> = hyp_lines
        .par_iter()
        .zip(ref_lines.par_iter())
        .map(|(h, r)| SegmentPair {
            hypothesis: tokenization.tokenize(h.as_ref()),
            reference: tokenization.tokenize(r.as_ref()),
        })
        .collect();
    let segment_scores: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .zip(hyp_lines.par_iter().zip(ref_lines.par_iter()))
        .map(|(p, (h, r))| {
            (
                chrf(h.as_ref(), r.as_ref(), DEFAULT_CHRF_ORDER, DEFAULT_CHRF_BETA),
                ribes(&p.hypothesis, &p.reference, RibesParams::default()),
                meteor_exact(&p.hypothesis, &p.reference),
            )
        })
        .collect();
    let n = pairs.len() as f64;
    let mean = |f: fn(&(f64, f64, f64)) -> f64| segment_scores.iter().map(f).sum::<f64>() / n;
    Ok(MetricScore {
        bleu: bleu(&pairs, DEFAULT_BLEU_ORDER)?,
        ter: corpus_ter(&pairs)?,
        chrf: mean(|s| s.0),
        ribes: mean(|s| s.1),
        meteor_exact: mean(|s| s.2),
        tokenization,
        segments: pairs.len(),
    })
}
