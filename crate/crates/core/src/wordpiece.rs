//! WordPiece training with the count metric and greedy longest-match encoding.
//!
//! A candidate pair `(x, y)` is scored as
//! `freq(x, y) / (freq(x) * freq(y))`, where the marginals count symbol
//! occurrences in the current segmentations. Word-internal pieces carry the
//! `##` prefix, so `मधुमेह` encodes as `["मधु", "##मेह"]`.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpe::word_frequencies;
use crate::merge::{MergeTable, Pair};
use crate::token::{DecodeIssue, Decoded, TokenSequence};

pub const CONTINUATION: &str = "##";
pub const DEFAULT_UNK: &str = "[UNK]";
pub const DEFAULT_MAX_WORD_CHARS: usize = 100;
pub const VOCAB_FILE_HEADER: &str = "#subtok-wp v1";

const MIN_PAIR_COUNT: u64 = 2;

pub type Score = Ratio<u128>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordPieceError {
    #[error("training corpus contains no words")]
    EmptyCorpus,
    #[error("vocabulary size {requested} is below the base inventory of {required}")]
    VocabSizeTooSmall { requested: usize, required: usize },
    #[error("marginal frequency is zero")]
    ZeroFrequency,
    #[error("vocab file is missing the `{VOCAB_FILE_HEADER}` header")]
    MissingHeader,
    #[error("vocab file does not contain the unknown token `{0}`")]
    MissingUnk(String),
}

/// Exact value of `freq_xy / (freq_x * freq_y)`.
pub fn pair_score(freq_xy: u64, freq_x: u64, freq_y: u64) -> Result<Score, WordPieceError> {
    if freq_x == 0 || freq_y == 0 {
        return Err(WordPieceError::ZeroFrequency);
    }
    Ok(Ratio::new(
        u128::from(freq_xy),
        u128::from(freq_x) * u128::from(freq_y),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub x: String,
    pub y: String,
    pub freq_xy: u64,
    pub freq_x: u64,
    pub freq_y: u64,
    #[serde(with = "score_serde")]
    pub score: Score,
}

impl ScoredPair {
    /// Surface form of the merged token.
    pub fn merged(&self) -> String {
        format!("{}{}", self.x, strip_continuation(&self.y))
    }
}

mod score_serde {
    use super::Score;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(score: &Score, s: S) -> Result<S::Ok, S::Error> {
        (score.numer(), score.denom()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Score, D::Error> {
        let (n, den) = <(u128, u128)>::deserialize(d)?;
        Ok(Score::new(n, den))
    }
}

fn strip_continuation(token: &str) -> &str {
    token.strip_prefix(CONTINUATION).unwrap_or(token)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordPieceConfig {
    pub unk_token: String,
    pub max_word_chars: usize,
    /// Stop once the best pair scores below this value.
    #[serde(with = "optional_score")]
    pub min_score_threshold: Option<Score>,
}

mod optional_score {
    use super::Score;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(score: &Option<Score>, s: S) -> Result<S::Ok, S::Error> {
        score.map(|r| (*r.numer(), *r.denom())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Score>, D::Error> {
        Ok(Option::<(u128, u128)>::deserialize(d)?.map(|(n, den)| Score::new(n, den)))
    }
}

impl Default for WordPieceConfig {
    fn default() -> Self {
        Self {
            unk_token: DEFAULT_UNK.to_owned(),
            max_word_chars: DEFAULT_MAX_WORD_CHARS,
            min_score_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPieceVocab {
    tokens: Vec<String>,
    lookup: HashSet<String>,
    config: WordPieceConfig,
    size_target: usize,
    longest_token_chars: usize,
}

#[derive(Debug, Clone)]
pub struct WordPieceTraining {
    pub vocab: WordPieceVocab,
    /// The chosen pair of every merge step, in order.
    pub steps: Vec<ScoredPair>,
}

struct Symbols {
    names: Vec<String>,
    texts: Vec<String>,
    continuation: Vec<bool>,
    groups: Vec<u32>,
    ids: HashMap<(String, bool), u32>,
    group_ids: HashMap<String, u32>,
}

impl Symbols {
    fn new() -> Self {
        Self {
            names: Vec::new(),
            texts: Vec::new(),
            continuation: Vec::new(),
            groups: Vec::new(),
            ids: HashMap::new(),
            group_ids: HashMap::new(),
        }
    }

    /// `text` without prefix; `continuation` selects the `##` form.
    fn intern(&mut self, text: &str, continuation: bool) -> u32 {
        if let Some(&id) = self.ids.get(&(text.to_owned(), continuation)) {
            return id;
        }
        let next_group = self.group_ids.len() as u32;
        let group = *self.group_ids.entry(text.to_owned()).or_insert(next_group);
        let id = self.names.len() as u32;
        self.names.push(if continuation {
            format!("{CONTINUATION}{text}")
        } else {
            text.to_owned()
        });
        self.texts.push(text.to_owned());
        self.continuation.push(continuation);
        self.groups.push(group);
        self.ids.insert((text.to_owned(), continuation), id);
        id
    }
}

pub fn train_wordpiece<S: AsRef<str>>(
    corpus: &[S],
    vocab_size: usize,
) -> Result<WordPieceVocab, WordPieceError> {
    train_wordpiece_with(corpus, vocab_size, &WordPieceConfig::default()).map(|t| t.vocab)
}

pub fn train_wordpiece_with<S: AsRef<str>>(
    corpus: &[S],
    vocab_size: usize,
    config: &WordPieceConfig,
) -> Result<WordPieceTraining, WordPieceError> {
    let freqs = word_frequencies(corpus);
    if freqs.is_empty() {
        return Err(WordPieceError::EmptyCorpus);
    }

    let mut symbols = Symbols::new();
    let words: Vec<Vec<u32>> = freqs
        .keys()
        .map(|w| {
            w.chars()
                .enumerate()
                .map(|(i, c)| symbols.intern(&c.to_string(), i > 0))
                .collect()
        })
        .collect();

    let base: BTreeSet<String> = symbols.names.iter().cloned().collect();
    let required = base.len() + 1;
    if vocab_size < required {
        return Err(WordPieceError::VocabSizeTooSmall {
            requested: vocab_size,
            required,
        });
    }

    let mut tokens: Vec<String> = Vec::with_capacity(vocab_size);
    tokens.push(config.unk_token.clone());
    tokens.extend(base.into_iter().filter(|t| *t != config.unk_token));
    let mut present: HashSet<String> = tokens.iter().cloned().collect();

    let mut table = MergeTable::new(words, freqs.values().copied().collect());
    let mut steps = Vec::new();

    while tokens.len() < vocab_size {
        let mut group_counts: HashMap<u32, u64> = HashMap::new();
        for (&sym, &n) in &table.symbol_counts {
            *group_counts.entry(symbols.groups[sym as usize]).or_insert(0) += n;
        }
        let marginal = |id: u32| group_counts[&symbols.groups[id as usize]];

        let mut best: Option<(Pair, ScoredPair, String)> = None;
        for (&pair, &count) in &table.pair_counts {
            if count < MIN_PAIR_COUNT {
                continue;
            }
            let (freq_x, freq_y) = (marginal(pair.0), marginal(pair.1));
            let score = pair_score(count, freq_x, freq_y)?;
            let candidate = ScoredPair {
                x: symbols.names[pair.0 as usize].clone(),
                y: symbols.names[pair.1 as usize].clone(),
                freq_xy: count,
                freq_x,
                freq_y,
                score,
            };
            let merged = candidate.merged();
            let better = match &best {
                None => true,
                Some((_, b, b_merged)) => {
                    score > b.score
                        || (score == b.score
                            && (&merged, &candidate.x, &candidate.y) < (b_merged, &b.x, &b.y))
                }
            };
            if better {
                best = Some((pair, candidate, merged));
            }
        }
        let Some((pair, chosen, merged)) = best else {
            break;
        };
        if config
            .min_score_threshold
            .is_some_and(|threshold| chosen.score < threshold)
        {
            break;
        }
        let text = format!(
            "{}{}",
            symbols.texts[pair.0 as usize], symbols.texts[pair.1 as usize]
        );
        let continuation = symbols.continuation[pair.0 as usize];
        let new_id = symbols.intern(&text, continuation);
        table.merge(pair, new_id);
        if present.insert(merged.clone()) {
            tokens.push(merged);
        }
        steps.push(chosen);
    }

    Ok(WordPieceTraining {
        vocab: WordPieceVocab::from_tokens(tokens, config.clone(), vocab_size)?,
        steps,
    })
}

impl WordPieceVocab {
    pub fn from_tokens(
        tokens: Vec<String>,
        config: WordPieceConfig,
        size_target: usize,
    ) -> Result<Self, WordPieceError> {
        if !tokens.contains(&config.unk_token) {
            return Err(WordPieceError::MissingUnk(config.unk_token));
        }
        let lookup: HashSet<String> = tokens.iter().cloned().collect();
        let longest_token_chars = tokens
            .iter()
            .filter(|t| **t != config.unk_token)
            .map(|t| strip_continuation(t).chars().count())
            .max()
            .unwrap_or(0);
        Ok(Self {
            tokens,
            lookup,
            config,
            size_target,
            longest_token_chars,
        })
    }

    /// Tokens in id order (id = position).
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup.contains(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_token(&self) -> &str {
        &self.config.unk_token
    }

    pub fn config(&self) -> &WordPieceConfig {
        &self.config
    }

    pub fn size_target(&self) -> usize {
        self.size_target
    }

    /// Greedy longest-match-first segmentation of one word; `[UNK]` when
    /// any position has no match or the word is too long.
    pub fn encode_word(&self, word: &str) -> TokenSequence {
        let chars: Vec<char> = word.chars().collect();
        let unk = || TokenSequence::with_out_of_model(vec![self.config.unk_token.clone()], vec![0]);
        if chars.len() > self.config.max_word_chars {
            return unk();
        }
        let mut tokens = Vec::new();
        let mut start = 0;
        let mut candidate = String::new();
        while start < chars.len() {
            let longest = (chars.len() - start).min(self.longest_token_chars);
            let mut matched = None;
            for end in (start + 1..=start + longest).rev() {
                candidate.clear();
                if start > 0 {
                    candidate.push_str(CONTINUATION);
                }
                candidate.extend(&chars[start..end]);
                if candidate != self.config.unk_token && self.lookup.contains(&candidate) {
                    matched = Some(end);
                    break;
                }
            }
            match matched {
                Some(end) => {
                    tokens.push(candidate.clone());
                    start = end;
                }
                None => return unk(),
            }
        }
        TokenSequence::new(tokens)
    }

    pub fn encode(&self, sentence: &str) -> TokenSequence {
        let mut out = TokenSequence::default();
        for word in sentence.split_whitespace() {
            out.extend(self.encode_word(word));
        }
        out
    }

    pub fn decode<S: AsRef<str>>(&self, tokens: &[S]) -> Decoded {
        decode_wordpiece(tokens)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(VOCAB_FILE_HEADER);
        out.push('\n');
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn from_text(
        text: &str,
        config: WordPieceConfig,
        size_target: usize,
    ) -> Result<Self, WordPieceError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim_end) != Some(VOCAB_FILE_HEADER) {
            return Err(WordPieceError::MissingHeader);
        }
        let tokens = lines.filter(|l| !l.is_empty()).map(str::to_owned).collect();
        Self::from_tokens(tokens, config, size_target)
    }
}

/// Strips `##` and glues continuations to the previous token.
pub fn decode_wordpiece<S: AsRef<str>>(tokens: &[S]) -> Decoded {
    let mut words: Vec<String> = Vec::new();
    let mut issue = None;
    for (i, token) in tokens.iter().enumerate() {
        let token = token.as_ref();
        match token.strip_prefix(CONTINUATION) {
            Some(rest) => {
                if i == 0 {
                    issue = Some(DecodeIssue::LeadingContinuation);
                    words.push(rest.to_owned());
                } else if let Some(last) = words.last_mut() {
                    last.push_str(rest);
                }
            }
            None => words.push(token.to_owned()),
        }
    }
    Decoded {
        text: words.join(" "),
        issue,
    }
}
