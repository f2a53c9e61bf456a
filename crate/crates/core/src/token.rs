use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// Ordered subword tokens of one sentence.
///
/// `out_of_model` lists the indices of tokens the encoder had to fabricate
/// because the input contained characters absent from the trained model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
    out_of_model: Vec<usize>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        Self {
            tokens,
            out_of_model: Vec::new(),
        }
    }

    pub(crate) fn with_out_of_model(tokens: Vec<String>, out_of_model: Vec<usize>) -> Self {
        Self {
            tokens,
            out_of_model,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn out_of_model(&self) -> &[usize] {
        &self.out_of_model
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    /// Appends another sequence, shifting its out-of-model indices.
    pub fn extend(&mut self, other: TokenSequence) {
        let offset = self.tokens.len();
        self.out_of_model
            .extend(other.out_of_model.into_iter().map(|i| i + offset));
        self.tokens.extend(other.tokens);
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.tokens
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        Self::new(tokens)
    }
}

impl<'a> From<Vec<&'a str>> for TokenSequence {
    fn from(tokens: Vec<&'a str>) -> Self {
        Self::new(tokens.into_iter().map(str::to_owned).collect())
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Non-fatal problems found while decoding a token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeIssue {
    /// The last token carries a joiner with nothing to join to; kept verbatim.
    JoinerAtSequenceEnd,
    /// The first token is a `##` continuation; its prefix was stripped anyway.
    LeadingContinuation,
}

impl fmt::Display for DecodeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeIssue::JoinerAtSequenceEnd => f.write_str("dangling joiner at sequence end"),
            DecodeIssue::LeadingContinuation => {
                f.write_str("sequence starts with a continuation token")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub text: String,
    pub issue: Option<DecodeIssue>,
}

impl Decoded {
    pub(crate) fn clean(text: String) -> Self {
        Self { text, issue: None }
    }
}
