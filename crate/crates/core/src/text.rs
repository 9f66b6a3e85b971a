//! Tokenized text.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How raw strings are split into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenPolicy {
    /// Split on Unicode whitespace.
    #[default]
    Whitespace,
    /// One token per non-whitespace character, for scripts written without spaces.
    Character,
}

impl TokenPolicy {
    pub fn tokenize(self, raw: &str) -> Vec<String> {
        match self {
            TokenPolicy::Whitespace => raw.split_whitespace().map(str::to_owned).collect(),
            TokenPolicy::Character => raw.chars().filter(|c| !c.is_whitespace()).map(String::from).collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TokenPolicy::Whitespace => "whitespace",
            TokenPolicy::Character => "character",
        }
    }
}

impl fmt::Display for TokenPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whitespace" => Ok(TokenPolicy::Whitespace),
            "character" | "char" => Ok(TokenPolicy::Character),
            other => Err(Error::InvalidArgument(format!("unknown tokenization policy {other:?}"))),
        }
    }
}

/// A raw string together with its tokens under a fixed policy.
///
/// The tokens are always the policy applied to `raw`; the only way to build a
/// `Text` is through [`Text::new`], so the two cannot drift apart.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Text {
    raw: String,
    tokens: Vec<String>,
    policy: TokenPolicy,
}

impl Text {
    pub fn new(raw: impl Into<String>, policy: TokenPolicy) -> Self {
        let raw = raw.into();
        let tokens = policy.tokenize(&raw);
        Text { raw, tokens, policy }
    }

    pub fn whitespace(raw: impl Into<String>) -> Self {
        Text::new(raw, TokenPolicy::Whitespace)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn policy(&self) -> TokenPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// True when the text has no tokens (empty or whitespace-only raw string).
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Returns a new text with `f` applied to the raw string, re-tokenized under
    /// the same policy.
    pub fn map_raw(&self, f: impl FnOnce(&str) -> String) -> Text {
        Text::new(f(&self.raw), self.policy)
    }
}

impl fmt::Display for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}
