//! Smoothed sentence-level BLEU, kept as a comparison baseline.

use std::collections::HashMap;

use super::ScoreMatrix;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::Text;

pub const BLEU_MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// BLEU-4 with add-one smoothing of the n ≥ 2 precisions and the usual
/// brevity penalty `exp(1 − r/c)` for hypotheses shorter than the reference.
///
/// Returns 0 for an empty hypothesis or one with no unigram match.
pub fn sentence_bleu(hypothesis: &Text, reference: &Text) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let hyp = hypothesis.tokens();
    let reference = reference.tokens();
    if hyp.is_empty() {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 1..=BLEU_MAX_ORDER {
        let ref_counts = ngram_counts(reference, n);
        let hyp_counts = ngram_counts(hyp, n);
        let matched: usize = hyp_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        let total = hyp.len().saturating_sub(n - 1);
        let p = if n == 1 {
            if matched == 0 {
                return Ok(0.0);
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += p.ln();
    }
    let c = hyp.len() as f64;
    let r = reference.len() as f64;
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok((bp * (log_sum / BLEU_MAX_ORDER as f64).exp()).clamp(0.0, 1.0))
}

/// Sentence BLEU for every (segment, system) cell, under `metric_name`.
pub fn score_corpus_bleu(corpus: &Corpus, metric_name: &str) -> Result<ScoreMatrix> {
    let missing: Vec<String> = corpus
        .instances()
        .iter()
        .filter(|i| i.reference.as_ref().is_none_or(Text::is_empty))
        .map(|i| i.segment_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingReference { segments: missing });
    }
    let mut m = ScoreMatrix::new();
    for inst in corpus.instances() {
        let reference = inst.reference.as_ref().expect("checked above");
        for (sys, hyp) in &inst.hypotheses {
            m.insert(&inst.segment_id, sys, metric_name, sentence_bleu(hyp, reference)?)?;
        }
    }
    Ok(m)
}
