use super::{ConditionalLm, TokenId, Vocab};

/// Every outcome has probability `1 / (V + 1)`. Used as an analytic oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformLm {
    vocab: Vocab,
}

impl UniformLm {
    pub const BACKEND: &'static str = "uniform";

    /// A uniform model over `vocab_size` tokens (counting `<unk>`) plus EOS.
    pub fn new(vocab_size: usize) -> Self {
        UniformLm {
            vocab: Vocab::placeholder(vocab_size.max(1)),
        }
    }

    pub fn with_vocab(vocab: Vocab) -> Self {
        UniformLm { vocab }
    }

    fn logp(&self) -> f64 {
        -(self.vocab.n_outcomes() as f64).ln()
    }
}

impl ConditionalLm for UniformLm {
    fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn next_logprobs(&self, _condition: &[TokenId], _prefix: &[TokenId]) -> Vec<f64> {
        vec![self.logp(); self.vocab.n_outcomes()]
    }

    fn token_logprob_ids(&self, _condition: &[TokenId], _prefix: &[TokenId], _next: TokenId) -> f64 {
        self.logp()
    }
}
