//! Incremental pair bookkeeping shared by the BPE and WordPiece trainers.

use std::collections::{HashMap, HashSet};

pub(crate) type Pair = (u32, u32);

/// Adjacent-pair occurrences inside one word (unweighted).
///
/// Runs of an identical pair (`a a a`) are counted greedily from the left,
/// one per non-overlapping slot, which is exactly how [`apply_merge`]
/// rewrites them.
pub(crate) fn word_pair_counts(word: &[u32]) -> Vec<(Pair, u64)> {
    let mut counts: Vec<(Pair, u64)> = Vec::new();
    let mut prev: Option<(Pair, bool)> = None;
    for w in word.windows(2) {
        let pair = (w[0], w[1]);
        let counted = !matches!(prev, Some((p, true)) if p == pair);
        if counted {
            match counts.iter_mut().find(|(p, _)| *p == pair) {
                Some((_, n)) => *n += 1,
                None => counts.push((pair, 1)),
            }
        }
        prev = Some((pair, counted));
    }
    counts
}

/// Rewrites every non-overlapping occurrence of `pair`, scanning left to right.
pub(crate) fn apply_merge(word: &[u32], pair: Pair, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && (word[i], word[i + 1]) == pair {
            out.push(merged);
            i += 2;
        } else {
            out.push(word[i]);
            i += 1;
        }
    }
    out
}

pub(crate) struct MergeTable {
    pub words: Vec<Vec<u32>>,
    pub freqs: Vec<u64>,
    pub pair_counts: HashMap<Pair, u64>,
    pub symbol_counts: HashMap<u32, u64>,
    occurrences: HashMap<Pair, Vec<usize>>,
}

impl MergeTable {
    pub fn new(words: Vec<Vec<u32>>, freqs: Vec<u64>) -> Self {
        let mut table = Self {
            words: Vec::new(),
            freqs,
            pair_counts: HashMap::new(),
            symbol_counts: HashMap::new(),
            occurrences: HashMap::new(),
        };
        for (idx, word) in words.iter().enumerate() {
            table.add_word(idx, word);
        }
        table.words = words;
        table
    }

    fn add_word(&mut self, idx: usize, word: &[u32]) {
        let freq = self.freqs[idx];
        for (pair, n) in word_pair_counts(word) {
            *self.pair_counts.entry(pair).or_insert(0) += n * freq;
            self.occurrences.entry(pair).or_default().push(idx);
        }
        for &s in word {
            *self.symbol_counts.entry(s).or_insert(0) += freq;
        }
    }

    fn remove_word(&mut self, idx: usize, word: &[u32]) {
        let freq = self.freqs[idx];
        for (pair, n) in word_pair_counts(word) {
            if let Some(c) = self.pair_counts.get_mut(&pair) {
                *c -= n * freq;
                if *c == 0 {
                    self.pair_counts.remove(&pair);
                }
            }
        }
        for &s in word {
            if let Some(c) = self.symbol_counts.get_mut(&s) {
                *c -= freq;
                if *c == 0 {
                    self.symbol_counts.remove(&s);
                }
            }
        }
    }

    /// Merges `pair` into `merged` in every word containing it and returns
    /// the pairs whose counts changed.
    pub fn merge(&mut self, pair: Pair, merged: u32) -> HashSet<Pair> {
        let mut touched = HashSet::new();
        let mut idxs = self.occurrences.remove(&pair).unwrap_or_default();
        idxs.sort_unstable();
        idxs.dedup();
        for idx in idxs {
            let old = std::mem::take(&mut self.words[idx]);
            let new = apply_merge(&old, pair, merged);
            if new.len() == old.len() {
                self.words[idx] = old;
                continue;
            }
            for (p, _) in word_pair_counts(&old) {
                touched.insert(p);
            }
            self.remove_word(idx, &old);
            self.add_word(idx, &new);
            for (p, _) in word_pair_counts(&new) {
                touched.insert(p);
            }
            self.words[idx] = new;
        }
        touched
    }

    pub fn count(&self, pair: Pair) -> u64 {
        self.pair_counts.get(&pair).copied().unwrap_or(0)
    }
}
