//! Relative-rank pairs from human judgments, and their directed training examples.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scoring::EvalMode;
use crate::text::Text;

/// Two hypotheses for the same segment where humans preferred `better`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPair {
    pub segment_id: String,
    pub better_system: String,
    pub worse_system: String,
    pub source: Text,
    pub reference: Option<Text>,
    pub better: Text,
    pub worse: Text,
    pub score_better: f64,
    pub score_worse: f64,
}

impl RankPair {
    /// The text hypotheses are compared against in `mode`, if present.
    pub fn anchor(&self, mode: EvalMode) -> Option<&Text> {
        match mode {
            EvalMode::ReferenceBased => self.reference.as_ref(),
            EvalMode::SourceBased => Some(&self.source),
        }
    }
}

/// Builds rank pairs from every segment's judged hypotheses.
///
/// Two hypotheses form a pair when their overall human scores differ by at
/// least `threshold` (and strictly), and their token sequences differ. When a
/// segment yields more than `max_pairs_per_segment` pairs, a seeded uniform
/// subsample is kept in the original order.
pub fn build_rank_pairs(
    corpus: &Corpus,
    threshold: f64,
    max_pairs_per_segment: Option<usize>,
    seed: u64,
) -> Result<Vec<RankPair>> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    let human = corpus.human_scores();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for inst in corpus.instances() {
        let judged: Vec<(&String, &Text, f64)> = inst
            .hypotheses
            .iter()
            .filter_map(|(sys, hyp)| {
                human
                    .get(&(inst.segment_id.clone(), sys.clone()))
                    .map(|&m| (sys, hyp, m))
            })
            .collect();
        let mut seg_pairs = Vec::new();
        for (i, a) in judged.iter().enumerate() {
            for b in &judged[i + 1..] {
                if a.2 == b.2 || (a.2 - b.2).abs() < threshold || a.1.tokens() == b.1.tokens() {
                    continue;
                }
                let (hi, lo) = if a.2 > b.2 { (a, b) } else { (b, a) };
                seg_pairs.push(RankPair {
                    segment_id: inst.segment_id.clone(),
                    better_system: hi.0.clone(),
                    worse_system: lo.0.clone(),
                    source: inst.source.clone(),
                    reference: inst.reference.clone(),
                    better: hi.1.clone(),
                    worse: lo.1.clone(),
                    score_better: hi.2,
                    score_worse: lo.2,
                });
            }
        }
        match max_pairs_per_segment {
            Some(k) if seg_pairs.len() > k => {
                let mut keep = index::sample(&mut rng, seg_pairs.len(), k).into_vec();
                keep.sort_unstable();
                out.extend(keep.into_iter().map(|i| seg_pairs[i].clone()));
            }
            _ => out.extend(seg_pairs),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Anchor conditions, hypothesis is generated.
    Forward,
    /// Hypothesis conditions, anchor is generated.
    Flipped,
}

/// A (condition, target) pair whose average log-probability is `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub condition: Text,
    pub target: Text,
}

/// One hinge-loss example: `better` should outscore `worse` by `margin`.
///
/// In the flipped direction the two sides share the target (the anchor) and
/// differ in their condition, so each side carries its own condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedExample {
    pub direction: Direction,
    pub better: Conditioned,
    pub worse: Conditioned,
    pub margin: f64,
}

/// Two examples per pair: the corpus in the forward direction followed by the
/// corpus again with condition and target roles swapped. Both carry the margin
/// `alpha * (m+ - m-)`.
pub fn augment_directions(pairs: &[RankPair], mode: EvalMode, alpha: f64) -> Result<Vec<DirectedExample>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
    }
    let missing: Vec<String> = pairs
        .iter()
        .filter(|p| p.anchor(mode).is_none())
        .map(|p| p.segment_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingReference { segments: missing });
    }
    let mut out = Vec::with_capacity(2 * pairs.len());
    for direction in [Direction::Forward, Direction::Flipped] {
        for p in pairs {
            let anchor = p.anchor(mode).expect("checked above");
            let side = |hyp: &Text| match direction {
                Direction::Forward => Conditioned {
                    condition: anchor.clone(),
                    target: hyp.clone(),
                },
                Direction::Flipped => Conditioned {
                    condition: hyp.clone(),
                    target: anchor.clone(),
                },
            };
            out.push(DirectedExample {
                direction,
                better: side(&p.better),
                worse: side(&p.worse),
                margin: alpha * (p.score_better - p.score_worse),
            });
        }
    }
    Ok(out)
}
