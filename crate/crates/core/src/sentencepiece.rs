//! Frequency-selected SentencePiece-style tokenizer.
//!
//! Spaces are rewritten to the meta symbol `▁` and every sentence gains a
//! leading `▁`, so whitespace is an ordinary character and decoding is
//! lossless. Training counts every contiguous substring up to
//! `max_piece_chars` and keeps the most frequent ones; single characters
//! are always kept so any training-alphabet input can be segmented.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::{Decoded, TokenSequence};

/// A piece and its training frequency.
type Piece = (String, u64);

pub const META_SYMBOL: char = '\u{2581}';
pub const DEFAULT_MAX_PIECE_CHARS: usize = 16;
pub const MODEL_FILE_MAGIC: &str = "#subtok-sp v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpError {
    #[error("training corpus contains no sentences")]
    EmptyCorpus,
    #[error("vocabulary size {requested} is below the character inventory of {required}")]
    VocabSizeTooSmall { requested: usize, required: usize },
    #[error("model file header is missing or malformed")]
    BadHeader,
    #[error("model file line {line}: {reason}")]
    MalformedPiece { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelType {
    #[default]
    Subword,
    Character,
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelType::Subword => "subword",
            ModelType::Character => "character",
        })
    }
}

impl FromStr for ModelType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subword" => Ok(ModelType::Subword),
            "character" => Ok(ModelType::Character),
            other => Err(format!("unknown model type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpConfig {
    pub vocab_size: usize,
    pub model_type: ModelType,
    pub max_piece_chars: usize,
    pub meta_symbol: char,
}

impl SpConfig {
    pub fn new(vocab_size: usize, model_type: ModelType) -> Self {
        Self {
            vocab_size,
            model_type,
            max_piece_chars: DEFAULT_MAX_PIECE_CHARS,
            meta_symbol: META_SYMBOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpModel {
    /// Pieces in selection order (frequency descending).
    pieces: Vec<(String, u64)>,
    lookup: HashMap<String, u64>,
    config: SpConfig,
    longest_piece_chars: usize,
}

/// Rewrites spaces to the meta symbol and prefixes one meta symbol.
pub fn rewrite(sentence: &str, meta: char) -> String {
    let mut out = String::with_capacity(sentence.len() + 3);
    out.push(meta);
    out.extend(sentence.chars().map(|c| if c == ' ' { meta } else { c }));
    out
}

/// Frequency descending, then shorter first, then lexicographic.
fn selection_order(a: &(String, u64), b: &(String, u64)) -> Ordering {
    b.1.cmp(&a.1)
        .then_with(|| a.0.chars().count().cmp(&b.0.chars().count()))
        .then_with(|| a.0.cmp(&b.0))
}

pub fn train_sp<S: AsRef<str>>(
    corpus: &[S],
    vocab_size: usize,
    model_type: ModelType,
) -> Result<SpModel, SpError> {
    train_sp_with(corpus, &SpConfig::new(vocab_size, model_type))
}

pub fn train_sp_with<S: AsRef<str>>(corpus: &[S], config: &SpConfig) -> Result<SpModel, SpError> {
    let streams: Vec<Vec<char>> = corpus
        .iter()
        .map(AsRef::as_ref)
        .filter(|s| !s.trim().is_empty())
        .map(|s| rewrite(s, config.meta_symbol).chars().collect())
        .collect();
    if streams.is_empty() {
        return Err(SpError::EmptyCorpus);
    }

    let max_len = match config.model_type {
        ModelType::Character => 1,
        ModelType::Subword => config.max_piece_chars.max(1),
    };
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut buf = String::new();
    for stream in &streams {
        for start in 0..stream.len() {
            buf.clear();
            for &c in stream[start..].iter().take(max_len) {
                buf.push(c);
                match counts.get_mut(buf.as_str()) {
                    Some(n) => *n += 1,
                    None => {
                        counts.insert(buf.clone(), 1);
                    }
                }
            }
        }
    }

    let (mut chars, mut multi): (Vec<Piece>, Vec<Piece>) = counts
        .into_iter()
        .partition(|(piece, _)| piece.chars().count() == 1);
    if config.vocab_size < chars.len() {
        return Err(SpError::VocabSizeTooSmall {
            requested: config.vocab_size,
            required: chars.len(),
        });
    }
    multi.sort_by(selection_order);
    multi.truncate(config.vocab_size - chars.len());
    chars.extend(multi);
    chars.sort_by(selection_order);
    Ok(SpModel::from_pieces(chars, config.clone()))
}

impl SpModel {
    pub fn from_pieces(pieces: Vec<(String, u64)>, config: SpConfig) -> Self {
        let lookup: HashMap<String, u64> = pieces.iter().cloned().collect();
        let longest_piece_chars = pieces
            .iter()
            .map(|(p, _)| p.chars().count())
            .max()
            .unwrap_or(1);
        Self {
            pieces,
            lookup,
            config,
            longest_piece_chars,
        }
    }

    pub fn pieces(&self) -> &[(String, u64)] {
        &self.pieces
    }

    pub fn piece_map(&self) -> BTreeMap<&str, u64> {
        self.pieces.iter().map(|(p, n)| (p.as_str(), *n)).collect()
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.lookup.contains_key(piece)
    }

    pub fn config(&self) -> &SpConfig {
        &self.config
    }

    pub fn meta_symbol(&self) -> char {
        self.config.meta_symbol
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Segments the rewritten sentence into the fewest pieces.
    ///
    /// Ties are broken by the larger summed piece frequency, then by the
    /// longer leftmost piece. Characters outside the model are emitted as
    /// single-character pieces and flagged out-of-model.
    pub fn encode(&self, sentence: &str) -> TokenSequence {
        let stream = rewrite(sentence, self.config.meta_symbol);
        let bounds: Vec<usize> = stream
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(stream.len()))
            .collect();
        let n = bounds.len() - 1;

        // best[i]: (pieces, frequency sum, first piece length) for stream[i..]
        let mut best: Vec<(usize, u128, usize)> = vec![(0, 0, 0); n + 1];
        for i in (0..n).rev() {
            let mut chosen: Option<(usize, u128, usize)> = None;
            for len in 1..=self.longest_piece_chars.min(n - i) {
                let piece = &stream[bounds[i]..bounds[i + len]];
                let freq = match self.lookup.get(piece) {
                    Some(&f) => u128::from(f),
                    None if len == 1 => 0,
                    None => continue,
                };
                let (rest_count, rest_freq, _) = best[i + len];
                let cand = (rest_count + 1, rest_freq + freq, len);
                let better = match chosen {
                    None => true,
                    Some((c, f, l)) => {
                        cand.0 < c || (cand.0 == c && (cand.1 > f || (cand.1 == f && len > l)))
                    }
                };
                if better {
                    chosen = Some(cand);
                }
            }
            best[i] = chosen.expect("single characters always segment");
        }

        let mut tokens = Vec::with_capacity(best[0].0);
        let mut oov = Vec::new();
        let mut i = 0;
        while i < n {
            let len = best[i].2;
            let piece = &stream[bounds[i]..bounds[i + len]];
            if !self.lookup.contains_key(piece) {
                oov.push(tokens.len());
            }
            tokens.push(piece.to_owned());
            i += len;
        }
        TokenSequence::with_out_of_model(tokens, oov)
    }

    pub fn decode<S: AsRef<str>>(&self, tokens: &[S]) -> Decoded {
        decode_sp_with(tokens, self.config.meta_symbol)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MODEL_FILE_MAGIC} meta=U+{:04X} type={}\n",
            self.config.meta_symbol as u32, self.config.model_type
        );
        for (piece, freq) in &self.pieces {
            out.push_str(piece);
            out.push('\t');
            out.push_str(&freq.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses a model file. `vocab_size` and `max_piece_chars` are not part
    /// of the file and come from the caller.
    pub fn from_text(
        text: &str,
        vocab_size: usize,
        max_piece_chars: usize,
    ) -> Result<Self, SpError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(SpError::BadHeader)?;
        let mut fields = header.split(' ');
        if fields.next() != Some("#subtok-sp") || fields.next() != Some("v1") {
            return Err(SpError::BadHeader);
        }
        let mut meta = None;
        let mut model_type = None;
        for field in fields {
            if let Some(code) = field.strip_prefix("meta=U+") {
                meta = u32::from_str_radix(code, 16).ok().and_then(char::from_u32);
            } else if let Some(t) = field.strip_prefix("type=") {
                model_type = t.parse::<ModelType>().ok();
            }
        }
        let (Some(meta_symbol), Some(model_type)) = (meta, model_type) else {
            return Err(SpError::BadHeader);
        };
        let mut pieces = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| SpError::MalformedPiece {
                line: i + 2,
                reason: reason.to_owned(),
            };
            let (piece, freq) = line.rsplit_once('\t').ok_or_else(|| bad("expected piece<TAB>frequency"))?;
            let freq = freq.parse::<u64>().map_err(|_| bad("frequency is not an integer"))?;
            pieces.push((piece.to_owned(), freq));
        }
        Ok(Self::from_pieces(
            pieces,
            SpConfig {
                vocab_size,
                model_type,
                max_piece_chars,
                meta_symbol,
            },
        ))
    }
}

pub fn decode_sp<S: AsRef<str>>(tokens: &[S]) -> Decoded {
    decode_sp_with(tokens, META_SYMBOL)
}

/// Concatenates pieces, maps the meta symbol back to a space and drops the
/// sentence-initial space.
pub fn decode_sp_with<S: AsRef<str>>(tokens: &[S], meta: char) -> Decoded {
    let joined: String = tokens
        .iter()
        .flat_map(|t| t.as_ref().chars())
        .map(|c| if c == meta { ' ' } else { c })
        .collect();
    let text = joined.strip_prefix(' ').unwrap_or(&joined).to_owned();
    Decoded::clean(text)
}
