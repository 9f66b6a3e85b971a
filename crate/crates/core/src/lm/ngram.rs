//! Interpolated n-gram + copy model.
//!
//! `p(t | prefix, b) = λ · p_ng(t | last n−1 tokens) + (1 − λ) · p_copy(t | b)`
//!
//! Both channels are add-k smoothed over the `V + 1` outcomes. `p_ng` is
//! estimated from the training outputs padded with `n − 1` start symbols and
//! terminated by EOS. `p_copy` is the relative frequency of `t` among the
//! condition's tokens plus one EOS.

use std::collections::BTreeMap;

use super::{ConditionalLm, TokenId, Vocab, BOS};
use crate::corpus::ParallelPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramParams {
    pub order: usize,
    /// Weight of the n-gram channel; `1 - lambda` goes to the copy channel.
    pub lambda: f64,
    pub addk: f64,
}

impl Default for NGramParams {
    fn default() -> Self {
        NGramParams {
            order: 2,
            lambda: 0.5,
            addk: 1.0,
        }
    }
}

impl NGramParams {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(self.addk > 0.0 && self.addk.is_finite()) {
            return Err(Error::InvalidArgument(format!("addk must be > 0, got {}", self.addk)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct ContextCounts {
    pub(crate) total: u64,
    pub(crate) next: BTreeMap<TokenId, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramCopyLm {
    params: NGramParams,
    vocab: Vocab,
    counts: BTreeMap<Vec<TokenId>, ContextCounts>,
}

impl NGramCopyLm {
    pub const BACKEND: &'static str = "ngram_copy";

    /// Closed-form maximum-likelihood counts from the outputs of `pairs`.
    ///
    /// The vocabulary is every token seen on either side.
    pub fn fit(pairs: &[ParallelPair], params: NGramParams) -> Result<Self> {
        params.validate()?;
        if pairs.is_empty() {
            return Err(Error::EmptyExamples);
        }
        let vocab = Vocab::from_texts(pairs.iter().flat_map(|p| [&p.input, &p.output]));
        let mut model = NGramCopyLm {
            params,
            vocab,
            counts: BTreeMap::new(),
        };
        for p in pairs {
            let ids = model.vocab.encode(&p.output);
            model.observe(&ids);
        }
        Ok(model)
    }

    pub(crate) fn from_parts(
        params: NGramParams,
        vocab: Vocab,
        counts: BTreeMap<Vec<TokenId>, ContextCounts>,
    ) -> Result<Self> {
        params.validate()?;
        Ok(NGramCopyLm { params, vocab, counts })
    }

    fn observe(&mut self, ids: &[TokenId]) {
        let eos = self.vocab.eos();
        for t in 0..=ids.len() {
            let next = ids.get(t).copied().unwrap_or(eos);
            let ctx = self.context(&ids[..t]);
            let entry = self.counts.entry(ctx).or_default();
            entry.total += 1;
            *entry.next.entry(next).or_default() += 1;
        }
    }

    /// The last `order - 1` tokens of the prefix, left-padded with BOS.
    fn context(&self, prefix: &[TokenId]) -> Vec<TokenId> {
        let n = self.params.order - 1;
        let take = prefix.len().min(n);
        let mut ctx = vec![BOS; n - take];
        ctx.extend_from_slice(&prefix[prefix.len() - take..]);
        ctx
    }

    pub fn params(&self) -> NGramParams {
        self.params
    }

    pub(crate) fn counts(&self) -> &BTreeMap<Vec<TokenId>, ContextCounts> {
        &self.counts
    }

    pub fn with_params(mut self, params: NGramParams) -> Result<Self> {
        params.validate()?;
        if params.order != self.params.order {
            return Err(Error::InvalidArgument(
                "cannot change the order of a trained model".into(),
            ));
        }
        self.params = params;
        Ok(self)
    }

    /// Raw count of `next` after `context` (context given as exactly `order - 1` ids).
    pub fn count(&self, context: &[TokenId], next: TokenId) -> u64 {
        self.counts
            .get(context)
            .and_then(|c| c.next.get(&next))
            .copied()
            .unwrap_or(0)
    }

    /// Unsmoothed relative frequencies `c(ctx, t) / c(ctx)` for every observed n-gram.
    pub fn mle_table(&self) -> BTreeMap<(Vec<TokenId>, TokenId), f64> {
        let mut out = BTreeMap::new();
        for (ctx, c) in &self.counts {
            for (&t, &n) in &c.next {
                out.insert((ctx.clone(), t), n as f64 / c.total as f64);
            }
        }
        out
    }

    fn ngram_prob(&self, ctx: &[TokenId], next: TokenId) -> f64 {
        let k = self.params.addk;
        let outcomes = self.vocab.n_outcomes() as f64;
        let (c, total) = match self.counts.get(ctx) {
            Some(cc) => (cc.next.get(&next).copied().unwrap_or(0), cc.total),
            None => (0, 0),
        };
        (c as f64 + k) / (total as f64 + k * outcomes)
    }

    fn copy_prob(&self, condition: &[TokenId], next: TokenId) -> f64 {
        let k = self.params.addk;
        let outcomes = self.vocab.n_outcomes() as f64;
        let c = if next == self.vocab.eos() {
            1
        } else {
            condition.iter().filter(|&&t| t == next).count()
        };
        (c as f64 + k) / ((condition.len() + 1) as f64 + k * outcomes)
    }

    fn prob(&self, condition: &[TokenId], prefix: &[TokenId], next: TokenId) -> f64 {
        let lambda = self.params.lambda;
        let mut p = 0.0;
        if lambda > 0.0 {
            p += lambda * self.ngram_prob(&self.context(prefix), next);
        }
        if lambda < 1.0 {
            p += (1.0 - lambda) * self.copy_prob(condition, next);
        }
        p
    }
}

impl ConditionalLm for NGramCopyLm {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, condition: &[TokenId], prefix: &[TokenId]) -> Vec<f64> {
        (0..self.vocab.n_outcomes() as TokenId)
            .map(|t| self.prob(condition, prefix, t).ln())
            .collect()
    }

    fn token_logprob_ids(&self, condition: &[TokenId], prefix: &[TokenId], next: TokenId) -> f64 {
        self.prob(condition, prefix, next).ln()
    }
}
