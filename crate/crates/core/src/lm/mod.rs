//! Conditional language models supplying `p(a | b)` token by token.
//!
//! Every backend defines a distribution over the vocabulary plus an
//! end-of-sequence outcome. Ids `0..V` are vocabulary tokens (`0` is the shared
//! unknown token) and id `V` is EOS, so there are `V + 1` outcomes per step.

mod io;
mod loglinear;
mod ngram;
mod uniform;

use std::collections::{BTreeSet, HashMap};

pub use io::{load_model, model_to_string, parse_model, save_model, HEADER_MAGIC};
pub(crate) use loglinear::GradBuffer;
pub use loglinear::LogLinearLm;
pub use ngram::{NGramCopyLm, NGramParams};
pub use uniform::UniformLm;

use crate::error::{Error, Result};
use crate::text::Text;

pub type TokenId = u32;

pub const UNK: TokenId = 0;
/// Sentence-start padding used in n-gram contexts and bigram features. Never an outcome.
pub const BOS: TokenId = TokenId::MAX;

pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";

fn is_reserved(tok: &str) -> bool {
    matches!(tok, UNK_TOKEN | BOS_TOKEN | EOS_TOKEN)
}

/// A frozen token vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocab {
    /// Sorted, de-duplicated vocabulary with `<unk>` at id 0. Reserved names are dropped.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = tokens
            .into_iter()
            .map(|s| s.as_ref().to_owned())
            .filter(|s| !is_reserved(s))
            .collect();
        Self::from_ordered(std::iter::once(UNK_TOKEN.to_owned()).chain(set))
    }

    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a Text>) -> Self {
        Self::from_tokens(texts.into_iter().flat_map(|t| t.tokens().iter()))
    }

    /// `size` entries: `<unk>` followed by `<t1>`, `<t2>`, ... placeholders.
    pub fn placeholder(size: usize) -> Self {
        assert!(size >= 1, "vocabulary needs at least the unknown token");
        Self::from_ordered(std::iter::once(UNK_TOKEN.to_owned()).chain((1..size).map(|i| format!("<t{i}>"))))
    }

    /// Builds from an explicit id order; the first entry must be `<unk>`.
    pub(crate) fn from_ordered(tokens: impl IntoIterator<Item = String>) -> Self {
        let tokens: Vec<String> = tokens.into_iter().collect();
        debug_assert_eq!(tokens.first().map(String::as_str), Some(UNK_TOKEN));
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Vocab { tokens, index }
    }

    /// Number of vocabulary tokens `V`, including `<unk>` and excluding EOS.
    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    /// Number of outcomes per step, `V + 1`.
    pub fn n_outcomes(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn eos(&self) -> TokenId {
        self.tokens.len() as TokenId
    }

    pub fn id(&self, token: &str) -> TokenId {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn encode(&self, text: &Text) -> Vec<TokenId> {
        text.tokens().iter().map(|t| self.id(t)).collect()
    }

    /// Surface form of an id; EOS and BOS get their reserved names.
    pub fn token(&self, id: TokenId) -> &str {
        if id == BOS {
            BOS_TOKEN
        } else if id == self.eos() {
            EOS_TOKEN
        } else {
            &self.tokens[id as usize]
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Maps ids outside the outcome range to `<unk>`.
    pub fn clamp(&self, id: TokenId) -> TokenId {
        if (id as usize) < self.n_outcomes() {
            id
        } else {
            UNK
        }
    }
}

/// A conditional language model over a frozen vocabulary.
///
/// Implementations must return a proper distribution with every outcome
/// strictly positive, and must be pure functions of their parameters.
pub trait ConditionalLm: Send + Sync {
    fn vocab(&self) -> &Vocab;

    /// Log-probabilities of all `V + 1` outcomes after `prefix`, given `condition`.
    fn next_logprobs(&self, condition: &[TokenId], prefix: &[TokenId]) -> Vec<f64>;

    fn token_logprob_ids(&self, condition: &[TokenId], prefix: &[TokenId], next: TokenId) -> f64 {
        self.next_logprobs(condition, prefix)[next as usize]
    }

    /// Sum of token log-probabilities of `target` followed by EOS.
    fn sequence_logprob_ids(&self, condition: &[TokenId], target: &[TokenId]) -> f64 {
        let eos = self.vocab().eos();
        (0..=target.len())
            .map(|t| {
                let next = target.get(t).copied().unwrap_or(eos);
                self.token_logprob_ids(condition, &target[..t], next)
            })
            .sum()
    }
}

/// `log p(next | prefix, condition)`. Out-of-range ids are treated as `<unk>`.
pub fn token_logprob<M: ConditionalLm + ?Sized>(model: &M, condition: &Text, prefix: &[TokenId], next: TokenId) -> f64 {
    let vocab = model.vocab();
    let cond = vocab.encode(condition);
    let prefix: Vec<TokenId> = prefix
        .iter()
        .map(|&id| if id == vocab.eos() { UNK } else { vocab.clamp(id) })
        .collect();
    model.token_logprob_ids(&cond, &prefix, vocab.clamp(next))
}

/// Length-normalized log-probability of `target` given `condition`.
///
/// The EOS step is included and counted in the length, so the result is the
/// sum of `|target| + 1` token log-probabilities divided by `|target| + 1`.
pub fn sequence_avg_logprob<M: ConditionalLm + ?Sized>(model: &M, condition: &Text, target: &Text) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let vocab = model.vocab();
    let cond = vocab.encode(condition);
    let tgt = vocab.encode(target);
    Ok(model.sequence_logprob_ids(&cond, &tgt) / (tgt.len() + 1) as f64)
}

/// Numerically stable `log(sum(exp(xs)))`.
pub(crate) fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Any backend, as loaded from a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Uniform(UniformLm),
    NGramCopy(NGramCopyLm),
    LogLinear(LogLinearLm),
}

impl Model {
    pub fn backend_name(&self) -> &'static str {
        match self {
            Model::Uniform(_) => UniformLm::BACKEND,
            Model::NGramCopy(_) => NGramCopyLm::BACKEND,
            Model::LogLinear(_) => LogLinearLm::BACKEND,
        }
    }
}

impl ConditionalLm for Model {
    fn vocab(&self) -> &Vocab {
        match self {
            Model::Uniform(m) => m.vocab(),
            Model::NGramCopy(m) => m.vocab(),
            Model::LogLinear(m) => m.vocab(),
        }
    }

    fn next_logprobs(&self, condition: &[TokenId], prefix: &[TokenId]) -> Vec<f64> {
        match self {
            Model::Uniform(m) => m.next_logprobs(condition, prefix),
            Model::NGramCopy(m) => m.next_logprobs(condition, prefix),
            Model::LogLinear(m) => m.next_logprobs(condition, prefix),
        }
    }

    fn token_logprob_ids(&self, condition: &[TokenId], prefix: &[TokenId], next: TokenId) -> f64 {
        match self {
            Model::Uniform(m) => m.token_logprob_ids(condition, prefix, next),
            Model::NGramCopy(m) => m.token_logprob_ids(condition, prefix, next),
            Model::LogLinear(m) => m.token_logprob_ids(condition, prefix, next),
        }
    }

    fn sequence_logprob_ids(&self, condition: &[TokenId], target: &[TokenId]) -> f64 {
        match self {
            Model::Uniform(m) => m.sequence_logprob_ids(condition, target),
            Model::NGramCopy(m) => m.sequence_logprob_ids(condition, target),
            Model::LogLinear(m) => m.sequence_logprob_ids(condition, target),
        }
    }
}

impl From<UniformLm> for Model {
    fn from(m: UniformLm) -> Self {
        Model::Uniform(m)
    }
}

impl From<NGramCopyLm> for Model {
    fn from(m: NGramCopyLm) -> Self {
        Model::NGramCopy(m)
    }
}

impl From<LogLinearLm> for Model {
    fn from(m: LogLinearLm) -> Self {
        Model::LogLinear(m)
    }
}
