//! Subword tokenization and machine-translation evaluation toolkit.
//!
//! The crate bundles three trainable subword tokenizers, a script-aware
//! text normalizer for Indic and Latin text, a set of reference-based
//! evaluation metrics and a harness that ties them together into
//! per-direction comparison reports.
//!
//! - [`normalizer`]: cleanup applied before any training or encoding.
//! - [`bpe`]: byte pair encoding with the `@@` joiner convention.
//! - [`wordpiece`]: count-metric WordPiece with `##` continuation prefixes.
//! - [`sentencepiece`]: frequency-selected pieces over a meta-symbol stream.
//! - [`metrics`]: BLEU, TER, chrF, RIBES and exact-match METEOR.
//! - [`harness`]: corpus I/O, tokenizer statistics and report emission.

pub mod bpe;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod normalizer;
pub mod sentencepiece;
pub mod token;
pub mod wordpiece;

mod merge;

pub use model::{ModelError, TokenizerModel};
pub use normalizer::{normalize, pretokenize, NormalizationConfig, ScriptId};
pub use token::{DecodeIssue, Decoded, TokenSequence};
