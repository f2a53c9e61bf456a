//! A trained tokenizer of any of the three kinds, and its on-disk layout.
//!
//! A model directory holds `manifest.json` plus one algorithm file:
//! `merges.txt` (BPE), `vocab.txt` (WordPiece) or `pieces.tsv`
//! (SentencePiece). Nothing time-dependent is written, so two trainings on
//! the same corpus produce byte-identical directories.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpe::{self, BpeConfig, BpeError, BpeModel, BpeTarget};
use crate::sentencepiece::{self, ModelType, SpConfig, SpError, SpModel};
use crate::token::{Decoded, TokenSequence};
use crate::wordpiece::{self, WordPieceConfig, WordPieceError, WordPieceVocab};

pub const MANIFEST_FORMAT: &str = "subtok-model v1";
const MANIFEST_FILE: &str = "manifest.json";
const BPE_FILE: &str = "merges.txt";
const WORDPIECE_FILE: &str = "vocab.txt";
const SENTENCEPIECE_FILE: &str = "pieces.tsv";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Bpe(#[from] BpeError),
    #[error(transparent)]
    WordPiece(#[from] WordPieceError),
    #[error(transparent)]
    SentencePiece(#[from] SpError),
    #[error("bpe needs exactly one of a merge count or a vocabulary size")]
    BpeTargetMissing,
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: invalid manifest: {source}")]
    Manifest {
        path: String,
        source: serde_json::Error,
    },
    #[error("unsupported model format `{0}`")]
    UnsupportedFormat(String),
}

impl ModelError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        ModelError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bpe,
    WordPiece,
    SentencePiece,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Bpe,
        Algorithm::WordPiece,
        Algorithm::SentencePiece,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bpe => "bpe",
            Algorithm::WordPiece => "wordpiece",
            Algorithm::SentencePiece => "sentencepiece",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected bpe, wordpiece or sentencepiece)"))
    }
}

/// What to train: algorithm plus its size target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase", deny_unknown_fields)]
pub enum TokenizerSpec {
    Bpe {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        merges: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vocab_size: Option<usize>,
    },
    WordPiece {
        vocab_size: usize,
    },
    SentencePiece {
        vocab_size: usize,
        #[serde(default)]
        model_type: ModelType,
        #[serde(default = "default_max_piece_chars")]
        max_piece_chars: usize,
    },
}

fn default_max_piece_chars() -> usize {
    sentencepiece::DEFAULT_MAX_PIECE_CHARS
}

impl TokenizerSpec {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TokenizerSpec::Bpe { .. } => Algorithm::Bpe,
            TokenizerSpec::WordPiece { .. } => Algorithm::WordPiece,
            TokenizerSpec::SentencePiece { .. } => Algorithm::SentencePiece,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizerModel {
    Bpe(BpeModel),
    WordPiece(WordPieceVocab),
    SentencePiece(SpModel),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
enum Manifest {
    Bpe {
        format: String,
        base_alphabet: String,
        #[serde(flatten)]
        config: BpeConfig,
    },
    WordPiece {
        format: String,
        size_target: usize,
        #[serde(flatten)]
        config: WordPieceConfig,
    },
    SentencePiece {
        format: String,
        #[serde(flatten)]
        config: SpConfig,
    },
}

impl Manifest {
    fn format(&self) -> &str {
        match self {
            Manifest::Bpe { format, .. }
            | Manifest::WordPiece { format, .. }
            | Manifest::SentencePiece { format, .. } => format,
        }
    }
}

impl TokenizerModel {
    pub fn train<S: AsRef<str> + Sync>(spec: &TokenizerSpec, corpus: &[S]) -> Result<Self, ModelError> {
        Ok(match *spec {
            TokenizerSpec::Bpe { merges, vocab_size } => {
                let target = match (merges, vocab_size) {
                    (Some(n), None) => BpeTarget::NumMerges(n),
                    (None, Some(v)) => BpeTarget::VocabSize(v),
                    _ => return Err(ModelError::BpeTargetMissing),
                };
                TokenizerModel::Bpe(bpe::train_bpe(corpus, target)?)
            }
            TokenizerSpec::WordPiece { vocab_size } => {
                TokenizerModel::WordPiece(wordpiece::train_wordpiece(corpus, vocab_size)?)
            }
            TokenizerSpec::SentencePiece {
                vocab_size,
                model_type,
                max_piece_chars,
            } => {
                let config = SpConfig {
                    max_piece_chars,
                    ..SpConfig::new(vocab_size, model_type)
                };
                TokenizerModel::SentencePiece(sentencepiece::train_sp_with(corpus, &config)?)
            }
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            TokenizerModel::Bpe(_) => Algorithm::Bpe,
            TokenizerModel::WordPiece(_) => Algorithm::WordPiece,
            TokenizerModel::SentencePiece(_) => Algorithm::SentencePiece,
        }
    }

    pub fn encode(&self, sentence: &str) -> TokenSequence {
        match self {
            TokenizerModel::Bpe(m) => m.encode(sentence),
            TokenizerModel::WordPiece(v) => v.encode(sentence),
            TokenizerModel::SentencePiece(m) => m.encode(sentence),
        }
    }

    pub fn decode<S: AsRef<str>>(&self, tokens: &[S]) -> Decoded {
        match self {
            TokenizerModel::Bpe(m) => m.decode(tokens),
            TokenizerModel::WordPiece(v) => v.decode(tokens),
            TokenizerModel::SentencePiece(m) => m.decode(tokens),
        }
    }

    /// The token that marks an unencodable unit, if the model has one.
    pub fn unk_token(&self) -> Option<&str> {
        match self {
            TokenizerModel::Bpe(m) => m.unk_token(),
            TokenizerModel::WordPiece(v) => Some(v.unk_token()),
            TokenizerModel::SentencePiece(_) => None,
        }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            TokenizerModel::Bpe(m) => m.vocab_size(),
            TokenizerModel::WordPiece(v) => v.len(),
            TokenizerModel::SentencePiece(m) => m.len(),
        }
    }

    /// Writes `manifest.json` and the algorithm file into `dir`, creating it.
    pub fn save(&self, dir: &Path) -> Result<(), ModelError> {
        fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
        let format = MANIFEST_FORMAT.to_owned();
        let (manifest, file, body) = match self {
            TokenizerModel::Bpe(m) => (
                Manifest::Bpe {
                    format,
                    base_alphabet: m.base_alphabet().iter().collect(),
                    config: m.config().clone(),
                },
                BPE_FILE,
                m.merges_to_text(),
            ),
            TokenizerModel::WordPiece(v) => (
                Manifest::WordPiece {
                    format,
                    size_target: v.size_target(),
                    config: v.config().clone(),
                },
                WORDPIECE_FILE,
                v.to_text(),
            ),
            TokenizerModel::SentencePiece(m) => (
                Manifest::SentencePiece {
                    format,
                    config: m.config().clone(),
                },
                SENTENCEPIECE_FILE,
                m.to_text(),
            ),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        write(&dir.join(MANIFEST_FILE), &json)?;
        write(&dir.join(file), &body)
    }

    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        let manifest_path = dir.join(MANIFEST_FILE);
        let text = read(&manifest_path)?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|source| ModelError::Manifest {
                path: manifest_path.display().to_string(),
                source,
            })?;
        if manifest.format() != MANIFEST_FORMAT {
            return Err(ModelError::UnsupportedFormat(manifest.format().to_owned()));
        }
        Ok(match manifest {
            Manifest::Bpe {
                base_alphabet,
                config,
                ..
            } => {
                let body = read(&dir.join(BPE_FILE))?;
                let alphabet: BTreeSet<char> = base_alphabet.chars().collect();
                TokenizerModel::Bpe(BpeModel::from_merges_text(&body, alphabet, config)?)
            }
            Manifest::WordPiece {
                size_target,
                config,
                ..
            } => {
                let body = read(&dir.join(WORDPIECE_FILE))?;
                TokenizerModel::WordPiece(WordPieceVocab::from_text(&body, config, size_target)?)
            }
            Manifest::SentencePiece { config, .. } => {
                let body = read(&dir.join(SENTENCEPIECE_FILE))?;
                let mut model =
                    SpModel::from_text(&body, config.vocab_size, config.max_piece_chars)?;
                if model.meta_symbol() != config.meta_symbol {
                    return Err(SpError::BadHeader.into());
                }
                model = SpModel::from_pieces(model.pieces().to_vec(), config);
                TokenizerModel::SentencePiece(model)
            }
        })
    }
}

fn write(path: &Path, body: &str) -> Result<(), ModelError> {
    fs::write(path, body).map_err(|e| ModelError::io(path, e))
}

fn read(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|e| ModelError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORPUS: [&str; 3] = [
        "उन्होंने कहा , अब हमारे पास 4 महीने के चूहे हैं",
        "he said , now we have 4 months old rats",
        "मधुमेह ग्रस्त नहीं हैं , लेकिन पहले मधुमेह ग्रस्त थे",
    ];

    fn specs() -> Vec<TokenizerSpec> {
        vec![
            TokenizerSpec::Bpe {
                merges: Some(20),
                vocab_size: None,
            },
            TokenizerSpec::WordPiece { vocab_size: 120 },
            TokenizerSpec::SentencePiece {
                vocab_size: 120,
                model_type: ModelType::Subword,
                max_piece_chars: 8,
            },
        ]
    }

    #[test]
    fn save_load_round_trip() {
        for spec in specs() {
            let model = TokenizerModel::train(&spec, &CORPUS).unwrap();
            let dir = tempfile::tempdir().unwrap();
            model.save(dir.path()).unwrap();
            let back = TokenizerModel::load(dir.path()).unwrap();
            assert_eq!(back, model, "{}", spec.algorithm());
            for line in CORPUS {
                assert_eq!(back.encode(line), model.encode(line));
            }
        }
    }

    #[test]
    fn spec_json_shape() {
        let spec: TokenizerSpec =
            serde_json::from_str(r#"{"algo":"sentencepiece","vocab_size":50,"model_type":"character"}"#)
                .unwrap();
        assert_eq!(
            spec,
            TokenizerSpec::SentencePiece {
                vocab_size: 50,
                model_type: ModelType::Character,
                max_piece_chars: 16
            }
        );
        let bpe = TokenizerSpec::Bpe {
            merges: None,
            vocab_size: None,
        };
        assert!(matches!(
            TokenizerModel::train(&bpe, &CORPUS),
            Err(ModelError::BpeTargetMissing)
        ));
    }

    #[test]
    fn missing_model_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            TokenizerModel::load(&dir.path().join("nope")),
            Err(ModelError::Io { .. })
        ));
    }
}
