//! Character-level byte pair encoding.
//!
//! Words are split into characters plus an end-of-word marker and the most
//! frequent adjacent pair is merged repeatedly. On the surface every
//! non-final piece of a word carries the `@@` joiner and the final piece
//! drops the marker, so a two-piece word renders as `पं@@ खों`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merge::{apply_merge, word_pair_counts, MergeTable, Pair};
use crate::normalizer::pretokenize;
use crate::token::{DecodeIssue, Decoded, TokenSequence};

pub const END_OF_WORD: &str = "</w>";
pub const JOINER: &str = "@@";
pub const UNK: &str = "<unk>";
pub const MERGE_FILE_HEADER: &str = "#subtok-bpe v1";

/// Pairs seen fewer times than this are never merged.
const MIN_PAIR_COUNT: u64 = 2;

/// Foreign (out-of-alphabet) characters are carried as ids in this range.
const FOREIGN_BIT: u32 = 1 << 31;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BpeError {
    #[error("training corpus contains no words")]
    EmptyCorpus,
    #[error("merge file is missing the `{MERGE_FILE_HEADER}` header")]
    MissingHeader,
    #[error("merge file line {line}: {reason}")]
    MalformedMerge { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownPolicy {
    /// Unseen characters become single-character tokens.
    #[default]
    EmitChar,
    /// Unseen characters become the `<unk>` token.
    EmitUnk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub rank: usize,
}

impl MergeRule {
    pub fn merged(&self) -> String {
        format!("{}{}", self.left, self.right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpeTarget {
    NumMerges(usize),
    /// Total vocabulary size, base alphabet included.
    VocabSize(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpeConfig {
    pub end_of_word_marker: String,
    pub joiner: String,
    pub unknown_policy: UnknownPolicy,
}

impl Default for BpeConfig {
    fn default() -> Self {
        Self {
            end_of_word_marker: END_OF_WORD.to_owned(),
            joiner: JOINER.to_owned(),
            unknown_policy: UnknownPolicy::default(),
        }
    }
}

/// Word → occurrence count over a pretokenized corpus.
pub type WordFrequencyTable = BTreeMap<String, u64>;

pub fn word_frequencies<S: AsRef<str>>(corpus: &[S]) -> WordFrequencyTable {
    let mut freqs = WordFrequencyTable::new();
    for line in corpus {
        for word in pretokenize(line.as_ref()) {
            *freqs.entry(word).or_insert(0) += 1;
        }
    }
    freqs
}

/// Weighted adjacent-pair counts over word segmentations.
pub fn count_pairs(
    segmentations: &BTreeMap<String, Vec<String>>,
    freqs: &WordFrequencyTable,
) -> BTreeMap<(String, String), u64> {
    let mut interner = Interner::default();
    let mut out = BTreeMap::new();
    for (word, segments) in segmentations {
        let freq = freqs.get(word).copied().unwrap_or(0);
        let ids: Vec<u32> = segments.iter().map(|s| interner.intern(s)).collect();
        for ((l, r), n) in word_pair_counts(&ids) {
            let key = (interner.name(l).to_owned(), interner.name(r).to_owned());
            *out.entry(key).or_insert(0) += n * freq;
        }
    }
    out
}

#[derive(Debug, Default, Clone)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    fn get(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

#[derive(Debug, Clone)]
pub struct BpeModel {
    base_alphabet: BTreeSet<char>,
    merges: Vec<MergeRule>,
    config: BpeConfig,
    symbols: Interner,
    ranks: HashMap<Pair, (u32, u32)>,
}

impl PartialEq for BpeModel {
    fn eq(&self, other: &Self) -> bool {
        self.base_alphabet == other.base_alphabet
            && self.merges == other.merges
            && self.config == other.config
    }
}

impl Eq for BpeModel {}

/// Result of a training run together with the final word segmentations.
#[derive(Debug, Clone)]
pub struct BpeTraining {
    pub model: BpeModel,
    /// Internal symbols (end-of-word marker included) per training word.
    pub segmentations: BTreeMap<String, Vec<String>>,
}

#[derive(PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: String,
    right: String,
    pair: Pair,
}

impl Ord for Candidate {
    // highest count first, then smallest (left, right)
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn train_bpe<S: AsRef<str>>(corpus: &[S], target: BpeTarget) -> Result<BpeModel, BpeError> {
    train_bpe_with(corpus, target, &BpeConfig::default()).map(|t| t.model)
}

pub fn train_bpe_with<S: AsRef<str>>(
    corpus: &[S],
    target: BpeTarget,
    config: &BpeConfig,
) -> Result<BpeTraining, BpeError> {
    let freqs = word_frequencies(corpus);
    if freqs.is_empty() {
        return Err(BpeError::EmptyCorpus);
    }
    let base_alphabet: BTreeSet<char> = freqs.keys().flat_map(|w| w.chars()).collect();

    let mut symbols = Interner::default();
    for c in &base_alphabet {
        symbols.intern(&c.to_string());
    }
    let eow = symbols.intern(&config.end_of_word_marker);

    let word_list: Vec<&String> = freqs.keys().collect();
    let words: Vec<Vec<u32>> = word_list
        .iter()
        .map(|w| {
            let mut ids: Vec<u32> = w
                .chars()
                .map(|c| symbols.get(&c.to_string()).expect("alphabet symbol"))
                .collect();
            ids.push(eow);
            ids
        })
        .collect();
    let mut table = MergeTable::new(words, freqs.values().copied().collect());

    let unk_slot = usize::from(config.unknown_policy == UnknownPolicy::EmitUnk);
    let num_merges = match target {
        BpeTarget::NumMerges(n) => n,
        BpeTarget::VocabSize(v) => v.saturating_sub(base_alphabet.len() + unk_slot),
    };

    let candidate = |symbols: &Interner, pair: Pair, count: u64| Candidate {
        count,
        left: symbols.name(pair.0).to_owned(),
        right: symbols.name(pair.1).to_owned(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = table
        .pair_counts
        .iter()
        .map(|(&pair, &count)| candidate(&symbols, pair, count))
        .collect();

    let mut merges = Vec::with_capacity(num_merges);
    while merges.len() < num_merges {
        let Some(best) = heap.pop() else { break };
        if table.count(best.pair) != best.count {
            // stale entry; the live count was pushed separately
            continue;
        }
        if best.count < MIN_PAIR_COUNT {
            break;
        }
        let merged = symbols.intern(&format!("{}{}", best.left, best.right));
        let touched = table.merge(best.pair, merged);
        for pair in touched {
            let count = table.count(pair);
            if count > 0 {
                heap.push(candidate(&symbols, pair, count));
            }
        }
        merges.push(MergeRule {
            left: best.left,
            right: best.right,
            rank: merges.len(),
        });
    }

    let segmentations = word_list
        .iter()
        .zip(&table.words)
        .map(|(w, ids)| {
            (
                (*w).clone(),
                ids.iter().map(|&id| symbols.name(id).to_owned()).collect(),
            )
        })
        .collect();
    let model = BpeModel::from_parts(base_alphabet, merges, config.clone())
        .expect("trained merges are derivable");
    Ok(BpeTraining {
        model,
        segmentations,
    })
}

impl BpeModel {
    /// Builds a model from its persisted parts, checking rank contiguity and
    /// that every rule is derivable from the alphabet and earlier rules.
    pub fn from_parts(
        base_alphabet: BTreeSet<char>,
        merges: Vec<MergeRule>,
        config: BpeConfig,
    ) -> Result<Self, BpeError> {
        let mut symbols = Interner::default();
        for c in &base_alphabet {
            symbols.intern(&c.to_string());
        }
        symbols.intern(&config.end_of_word_marker);
        let mut ranks = HashMap::new();
        for (i, rule) in merges.iter().enumerate() {
            let bad = |reason: String| BpeError::MalformedMerge {
                line: i + 2,
                reason,
            };
            if rule.rank != i {
                return Err(bad(format!("rank {} out of order", rule.rank)));
            }
            if rule.left.is_empty() || rule.right.is_empty() {
                return Err(bad("empty side".into()));
            }
            let left = symbols
                .get(&rule.left)
                .ok_or_else(|| bad(format!("`{}` is not derivable", rule.left)))?;
            let right = symbols
                .get(&rule.right)
                .ok_or_else(|| bad(format!("`{}` is not derivable", rule.right)))?;
            let merged = symbols.intern(&rule.merged());
            ranks.entry((left, right)).or_insert((i as u32, merged));
        }
        Ok(Self {
            base_alphabet,
            merges,
            config,
            symbols,
            ranks,
        })
    }

    pub fn base_alphabet(&self) -> &BTreeSet<char> {
        &self.base_alphabet
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn config(&self) -> &BpeConfig {
        &self.config
    }

    pub fn joiner(&self) -> &str {
        &self.config.joiner
    }

    pub fn unk_token(&self) -> Option<&str> {
        (self.config.unknown_policy == UnknownPolicy::EmitUnk).then_some(UNK)
    }

    /// Every internal symbol the model can produce: the base alphabet, the
    /// result of each merge, and `<unk>` under the emit-unk policy.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        let mut vocab: BTreeSet<String> =
            self.base_alphabet.iter().map(|c| c.to_string()).collect();
        vocab.extend(self.merges.iter().map(MergeRule::merged));
        if let Some(unk) = self.unk_token() {
            vocab.insert(unk.to_owned());
        }
        vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary().len()
    }

    fn symbol_ids(&self, word: &str) -> Vec<u32> {
        let mut ids: Vec<u32> = word
            .chars()
            .map(|c| {
                if self.base_alphabet.contains(&c) {
                    self.symbols.get(&c.to_string()).expect("alphabet symbol")
                } else {
                    FOREIGN_BIT | c as u32
                }
            })
            .collect();
        ids.push(
            self.symbols
                .get(&self.config.end_of_word_marker)
                .expect("marker symbol"),
        );
        ids
    }

    fn merge_word(&self, mut ids: Vec<u32>) -> Vec<u32> {
        while ids.len() > 1 {
            let best = ids
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0], w[1])).map(|&r| ((w[0], w[1]), r)))
                .min_by_key(|&(_, (rank, _))| rank);
            let Some((pair, (_, merged))) = best else {
                break;
            };
            ids = apply_merge(&ids, pair, merged);
        }
        ids
    }

    fn symbol_text(&self, id: u32) -> String {
        if id & FOREIGN_BIT != 0 {
            match self.config.unknown_policy {
                UnknownPolicy::EmitChar => char::from_u32(id & !FOREIGN_BIT)
                    .map(String::from)
                    .unwrap_or_default(),
                UnknownPolicy::EmitUnk => UNK.to_owned(),
            }
        } else {
            self.symbols.name(id).to_owned()
        }
    }

    /// Internal segmentation of one word, end-of-word marker included.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        self.merge_word(self.symbol_ids(word))
            .into_iter()
            .map(|id| self.symbol_text(id))
            .collect()
    }

    pub fn encode_word(&self, word: &str) -> TokenSequence {
        let ids = self.merge_word(self.symbol_ids(word));
        let marker = self.config.end_of_word_marker.as_str();
        let mut pieces: Vec<(String, bool)> = ids
            .iter()
            .map(|&id| (self.symbol_text(id), id & FOREIGN_BIT != 0))
            .collect();
        if pieces.last().is_some_and(|(p, _)| p == marker) {
            pieces.pop();
        }
        let last = pieces.len().saturating_sub(1);
        let mut tokens = Vec::with_capacity(pieces.len());
        let mut foreign = Vec::new();
        for (i, (piece, is_foreign)) in pieces.into_iter().enumerate() {
            if is_foreign {
                foreign.push(i);
            }
            if i == last {
                let stripped = piece.strip_suffix(marker).unwrap_or(&piece);
                tokens.push(stripped.to_owned());
            } else {
                tokens.push(piece + &self.config.joiner);
            }
        }
        TokenSequence::with_out_of_model(tokens, foreign)
    }

    pub fn encode(&self, sentence: &str) -> TokenSequence {
        let mut out = TokenSequence::default();
        for word in sentence.split_whitespace() {
            out.extend(self.encode_word(word));
        }
        out
    }

    pub fn decode<S: AsRef<str>>(&self, tokens: &[S]) -> Decoded {
        decode_bpe(tokens, &self.config.joiner)
    }

    /// Merge file body: header line, then `left right` per rule in rank order.
    pub fn merges_to_text(&self) -> String {
        let mut out = String::from(MERGE_FILE_HEADER);
        out.push('\n');
        for rule in &self.merges {
            out.push_str(&rule.left);
            out.push(' ');
            out.push_str(&rule.right);
            out.push('\n');
        }
        out
    }

    pub fn from_merges_text(
        text: &str,
        base_alphabet: BTreeSet<char>,
        config: BpeConfig,
    ) -> Result<Self, BpeError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(MERGE_FILE_HEADER) {
            return Err(BpeError::MissingHeader);
        }
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (left, right) = line.split_once(' ').ok_or(BpeError::MalformedMerge {
                line: i + 2,
                reason: "expected `left right`".into(),
            })?;
            merges.push(MergeRule {
                left: left.to_owned(),
                right: right.to_owned(),
                rank: merges.len(),
            });
        }
        Self::from_parts(base_alphabet, merges, config)
    }
}

/// Joins `@@`-suffixed tokens onto their successor; words are space-separated.
pub fn decode_bpe<S: AsRef<str>>(tokens: &[S], joiner: &str) -> Decoded {
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut issue = None;
    for (i, token) in tokens.iter().enumerate() {
        let token = token.as_ref();
        let is_last = i + 1 == tokens.len();
        match token.strip_suffix(joiner) {
            Some(stem) if !is_last => current.push_str(stem),
            Some(_) => {
                issue = Some(DecodeIssue::JoinerAtSequenceEnd);
                current.push_str(token);
                words.push(std::mem::take(&mut current));
            }
            None => {
                current.push_str(token);
                words.push(std::mem::take(&mut current));
            }
        }
    }
    Decoded {
        text: words.join(" "),
        issue,
    }
}
