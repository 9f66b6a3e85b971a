//! Log-linear conditional model.
//!
//! `p(t | prefix, b) ∝ exp(w · φ(t, prefix, b))` over the `V + 1` outcomes, with
//! three feature families:
//!
//! * unigram bias `u[t]`, one per outcome;
//! * a single copy weight `c`, firing when `t` is a vocabulary token present in `b`;
//! * bigram weights `B[prev][t]`, where `prev` is BOS or a vocabulary token.
//!
//! Weights live in one flat vector laid out as `[u | c | B]`.

use super::{logsumexp, sequence_avg_logprob, ConditionalLm, TokenId, Vocab, BOS};
use crate::error::{Error, Result};
use crate::text::Text;

/// Scratch gradient for per-example SGD. Remembers which bigram rows were written.
#[derive(Debug, Default)]
pub(crate) struct GradBuffer {
    grad: Vec<f64>,
    rows: Vec<TokenId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearLm {
    vocab: Vocab,
    weights: Vec<f64>,
}

impl LogLinearLm {
    pub const BACKEND: &'static str = "log_linear";

    pub fn zeros(vocab: Vocab) -> Self {
        let n = Self::n_features_for(&vocab);
        LogLinearLm {
            vocab,
            weights: vec![0.0; n],
        }
    }

    pub fn from_weights(vocab: Vocab, weights: Vec<f64>) -> Result<Self> {
        let n = Self::n_features_for(&vocab);
        if weights.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} weights for a vocabulary of {}, got {}",
                vocab.size(),
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numeric(format!("weight {i} is not finite")));
        }
        Ok(LogLinearLm { vocab, weights })
    }

    fn n_features_for(vocab: &Vocab) -> usize {
        let o = vocab.n_outcomes();
        // unigram + copy + (BOS and V token rows) x outcomes
        o + 1 + (vocab.size() + 1) * o
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn unigram_feature(&self, next: TokenId) -> usize {
        next as usize
    }

    pub fn copy_feature(&self) -> usize {
        self.vocab.n_outcomes()
    }

    pub fn bigram_feature(&self, prev: TokenId, next: TokenId) -> usize {
        self.bigram_row(prev) + next as usize
    }

    fn bigram_row(&self, prev: TokenId) -> usize {
        let o = self.vocab.n_outcomes();
        let row = if prev == BOS { 0 } else { prev as usize + 1 };
        o + 1 + row * o
    }

    /// Which outcomes the copy feature fires for, given the encoded condition.
    fn copy_mask(&self, condition: &[TokenId]) -> Vec<bool> {
        let mut mask = vec![false; self.vocab.n_outcomes()];
        for &t in condition {
            if (t as usize) < self.vocab.size() {
                mask[t as usize] = true;
            }
        }
        mask
    }

    /// Unnormalized scores `w · φ(t)` for all outcomes at one step.
    fn step_scores(&self, mask: &[bool], prev: TokenId, out: &mut Vec<f64>) {
        let o = self.vocab.n_outcomes();
        let copy = self.weights[self.copy_feature()];
        let row = &self.weights[self.bigram_row(prev)..self.bigram_row(prev) + o];
        out.clear();
        out.extend((0..o).map(|t| {
            let c = if mask[t] { copy } else { 0.0 };
            self.weights[t] + c + row[t]
        }));
    }

    /// Sum of log-probabilities of `target` + EOS. When `grad` is given, adds
    /// `grad_scale` times the gradient of that sum with respect to the weights.
    pub(crate) fn logprob_and_grad(
        &self,
        condition: &[TokenId],
        target: &[TokenId],
        grad_scale: f64,
        mut grad: Option<&mut [f64]>,
    ) -> f64 {
        let eos = self.vocab.eos();
        let mask = self.copy_mask(condition);
        let copy_idx = self.copy_feature();
        let mut scores = Vec::with_capacity(self.vocab.n_outcomes());
        let mut total = 0.0;
        for step in 0..=target.len() {
            let prev = if step == 0 { BOS } else { target[step - 1] };
            let next = target.get(step).copied().unwrap_or(eos) as usize;
            self.step_scores(&mask, prev, &mut scores);
            let lse = logsumexp(&scores);
            total += scores[next] - lse;

            if let Some(g) = grad.as_deref_mut() {
                let row = self.bigram_row(prev);
                let mut expected_copy = 0.0;
                for (t, &s) in scores.iter().enumerate() {
                    let p = (s - lse).exp();
                    let observed = if t == next { 1.0 } else { 0.0 };
                    let d = grad_scale * (observed - p);
                    g[t] += d;
                    g[row + t] += d;
                    if mask[t] {
                        expected_copy += p;
                    }
                }
                let observed_copy = if mask[next] { 1.0 } else { 0.0 };
                g[copy_idx] += grad_scale * (observed_copy - expected_copy);
            }
        }
        total
    }

    /// Exact gradient of [`sequence_avg_logprob`] with respect to the weights.
    ///
    /// Per step the gradient of the log-probability is `φ(observed) − E_p[φ]`;
    /// these are summed over the `|target| + 1` steps and divided by that count.
    pub fn grad_avg_logprob(&self, condition: &Text, target: &Text) -> Result<Vec<f64>> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let cond = self.vocab.encode(condition);
        let tgt = self.vocab.encode(target);
        let mut grad = vec![0.0; self.n_features()];
        self.logprob_and_grad(&cond, &tgt, 1.0 / (tgt.len() + 1) as f64, Some(&mut grad));
        Ok(grad)
    }

    /// Average log-probability and its gradient in one pass.
    pub fn avg_logprob_and_grad(&self, condition: &Text, target: &Text) -> Result<(f64, Vec<f64>)> {
        if target.is_empty() {
            return Err(Error::EmptyTarget);
        }
        let cond = self.vocab.encode(condition);
        let tgt = self.vocab.encode(target);
        let n = (tgt.len() + 1) as f64;
        let mut grad = vec![0.0; self.n_features()];
        let lp = self.logprob_and_grad(&cond, &tgt, 1.0 / n, Some(&mut grad));
        Ok((lp / n, grad))
    }

    pub fn avg_logprob(&self, condition: &Text, target: &Text) -> Result<f64> {
        sequence_avg_logprob(self, condition, target)
    }

    /// Adds `scale` times the gradient of the summed log-probability into `buf`
    /// and returns the summed log-probability.
    pub(crate) fn accumulate(
        &self,
        condition: &[TokenId],
        target: &[TokenId],
        scale: f64,
        buf: &mut GradBuffer,
    ) -> f64 {
        if buf.grad.len() != self.n_features() {
            buf.grad = vec![0.0; self.n_features()];
        }
        buf.rows.push(BOS);
        buf.rows.extend_from_slice(target);
        self.logprob_and_grad(condition, target, scale, Some(&mut buf.grad))
    }

    /// `w += lr * buf`, touching only the entries `buf` may hold, then clears `buf`.
    pub(crate) fn apply(&mut self, buf: &mut GradBuffer, lr: f64) {
        if buf.grad.is_empty() {
            return;
        }
        let o = self.vocab.n_outcomes();
        buf.rows.sort_unstable();
        buf.rows.dedup();
        let starts: Vec<usize> = buf.rows.iter().map(|&r| self.bigram_row(r)).collect();
        let rows = starts.into_iter().map(|s| s..s + o);
        for range in std::iter::once(0..o + 1).chain(rows) {
            for i in range {
                self.weights[i] += lr * buf.grad[i];
                buf.grad[i] = 0.0;
            }
        }
        buf.rows.clear();
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.weights.iter().position(|w| !w.is_finite()) {
            Some(i) => Err(Error::Numeric(format!("weight {i} became non-finite"))),
            None => Ok(()),
        }
    }
}

impl ConditionalLm for LogLinearLm {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, condition: &[TokenId], prefix: &[TokenId]) -> Vec<f64> {
        let mask = self.copy_mask(condition);
        let prev = prefix.last().copied().unwrap_or(BOS);
        let mut scores = Vec::new();
        self.step_scores(&mask, prev, &mut scores);
        let lse = logsumexp(&scores);
        scores.iter_mut().for_each(|s| *s -= lse);
        scores
    }

    fn sequence_logprob_ids(&self, condition: &[TokenId], target: &[TokenId]) -> f64 {
        self.logprob_and_grad(condition, target, 0.0, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::token_logprob;

    fn texts() -> (Text, Text) {
        (Text::whitespace("a b"), Text::whitespace("b"))
    }

    #[test]
    fn zero_weights_are_uniform() {
        let vocab = Vocab::from_tokens(["a", "b", "c"]);
        let m = LogLinearLm::zeros(vocab);
        let (cond, _) = texts();
        for next in 0..5 {
            let lp = token_logprob(&m, &cond, &[1], next);
            assert!((lp - (0.2f64).ln()).abs() < 1e-15);
        }
    }

    // V = 2 (<unk>, b) so three outcomes, target "b" gives two steps: b then EOS.
    // At w = 0 every step is uniform (1/3). Summed over the two steps and
    // divided by 2:
    //   unigram b:     ((1 - 1/3) + (0 - 1/3)) / 2 =  1/6
    //   unigram EOS:   ((0 - 1/3) + (1 - 1/3)) / 2 =  1/6
    //   unigram <unk>: ((0 - 1/3) + (0 - 1/3)) / 2 = -1/3
    #[test]
    fn hand_gradient_at_zero() {
        let vocab = Vocab::from_tokens(["b"]);
        let m = LogLinearLm::zeros(vocab);
        let b = m.vocab().id("b");
        let eos = m.vocab().eos();
        let g = m
            .grad_avg_logprob(&Text::whitespace("zzz"), &Text::whitespace("b"))
            .unwrap();
        assert!((g[m.unigram_feature(b)] - 1.0 / 6.0).abs() < 1e-15);
        assert!((g[m.unigram_feature(eos)] - 1.0 / 6.0).abs() < 1e-15);
        assert!((g[m.unigram_feature(0)] + 1.0 / 3.0).abs() < 1e-15);
        // first step uses the BOS row only: (1 - 1/3) / 2 for b
        assert!((g[m.bigram_feature(BOS, b)] - 1.0 / 3.0).abs() < 1e-15);
        // condition "zzz" maps to <unk>: copy fires for <unk> only, observed never
        assert!((g[m.copy_feature()] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unused_bigram_rows_have_exactly_zero_gradient() {
        let vocab = Vocab::from_tokens(["a", "b", "c"]);
        let mut m = LogLinearLm::zeros(vocab);
        for (i, w) in m.weights_mut().iter_mut().enumerate() {
            *w = ((i * 7919) % 13) as f64 / 13.0 - 0.5;
        }
        let c = m.vocab().id("c");
        let g = m
            .grad_avg_logprob(&Text::whitespace("a"), &Text::whitespace("a b"))
            .unwrap();
        for next in 0..m.vocab().n_outcomes() as TokenId {
            assert_eq!(g[m.bigram_feature(c, next)], 0.0);
        }
    }

    #[test]
    fn empty_target_rejected() {
        let m = LogLinearLm::zeros(Vocab::from_tokens(["a"]));
        assert!(matches!(
            m.grad_avg_logprob(&Text::whitespace("a"), &Text::whitespace(" ")),
            Err(Error::EmptyTarget)
        ));
    }

    #[test]
    fn from_weights_checks_length_and_finiteness() {
        let v = Vocab::from_tokens(["a"]);
        assert!(LogLinearLm::from_weights(v.clone(), vec![0.0; 3]).is_err());
        let n = LogLinearLm::zeros(v.clone()).n_features();
        let mut w = vec![0.0; n];
        w[1] = f64::NAN;
        assert!(matches!(LogLinearLm::from_weights(v, w), Err(Error::Numeric(_))));
    }
}
