//! The directional log-probability metric and batch scoring.

mod bleu;
mod matrix;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bleu::{score_corpus_bleu, sentence_bleu, BLEU_MAX_ORDER};
pub use matrix::{ScoreKey, ScoreMatrix, SCORE_HEADER};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lm::{sequence_avg_logprob, ConditionalLm};
use crate::text::Text;

/// Score given to every component when the hypothesis is empty.
pub const FLOOR_SCORE: f64 = -1e9;

/// Suffix of the precision column written by [`score_corpus`].
pub const PRECISION_SUFFIX: &str = ".p";
/// Suffix of the recall column written by [`score_corpus`].
pub const RECALL_SUFFIX: &str = ".r";

/// Whether hypotheses are compared against the reference or the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    #[default]
    ReferenceBased,
    SourceBased,
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" | "reference_based" | "ref" => Ok(EvalMode::ReferenceBased),
            "source" | "source_based" | "src" => Ok(EvalMode::SourceBased),
            other => Err(Error::InvalidArgument(format!("unknown evaluation mode {other:?}"))),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::ReferenceBased => "reference_based",
            EvalMode::SourceBased => "source_based",
        })
    }
}

/// Precision, recall and their arithmetic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl DirectionalScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        DirectionalScore {
            precision,
            recall,
            f: (precision + recall) / 2.0,
        }
    }

    pub fn floor() -> Self {
        DirectionalScore::new(FLOOR_SCORE, FLOOR_SCORE)
    }
}

/// Scores `hypothesis` against `anchor` (the reference or the source).
///
/// Precision is the average log-probability of the hypothesis given the
/// anchor, recall the average log-probability of the anchor given the
/// hypothesis.
pub fn t5score<M: ConditionalLm + ?Sized>(model: &M, anchor: &Text, hypothesis: &Text) -> Result<DirectionalScore> {
    if anchor.is_empty() {
        return Err(Error::EmptyAnchor { segment: None });
    }
    if hypothesis.is_empty() {
        return Ok(DirectionalScore::floor());
    }
    let precision = sequence_avg_logprob(model, anchor, hypothesis)?;
    let recall = sequence_avg_logprob(model, hypothesis, anchor)?;
    Ok(DirectionalScore::new(precision, recall))
}

/// Applied to every text before scoring, e.g. to undo spacing artifacts.
pub type TextTransform<'a> = &'a (dyn Fn(&Text) -> Text + Sync);

pub fn score_corpus<M: ConditionalLm + ?Sized>(
    model: &M,
    corpus: &Corpus,
    mode: EvalMode,
    metric_name: &str,
) -> Result<ScoreMatrix> {
    score_corpus_with(model, corpus, mode, metric_name, None)
}

/// Scores every (segment, system) cell.
///
/// F goes under `metric_name`, precision and recall under `metric_name.p` and
/// `metric_name.r`. Cells are evaluated in parallel; each is independent, so
/// the result does not depend on scheduling.
pub fn score_corpus_with<M: ConditionalLm + ?Sized>(
    model: &M,
    corpus: &Corpus,
    mode: EvalMode,
    metric_name: &str,
    transform: Option<TextTransform<'_>>,
) -> Result<ScoreMatrix> {
    if mode == EvalMode::ReferenceBased {
        let missing: Vec<String> = corpus
            .instances()
            .iter()
            .filter(|i| i.reference.is_none())
            .map(|i| i.segment_id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingReference { segments: missing });
        }
    }
    let apply = |t: &Text| match transform {
        Some(f) => f(t),
        None => t.clone(),
    };

    let cells: Vec<(&str, &str, &Text, &Text)> = corpus
        .instances()
        .iter()
        .flat_map(|inst| {
            let anchor = match mode {
                EvalMode::ReferenceBased => inst.reference.as_ref().expect("checked above"),
                EvalMode::SourceBased => &inst.source,
            };
            inst.hypotheses
                .iter()
                .map(move |(sys, hyp)| (inst.segment_id.as_str(), sys.as_str(), anchor, hyp))
        })
        .collect();

    let scored: Vec<(&str, &str, DirectionalScore)> = cells
        .par_iter()
        .map(|&(seg, sys, anchor, hyp)| {
            let s = t5score(model, &apply(anchor), &apply(hyp)).map_err(|e| match e {
                Error::EmptyAnchor { .. } => Error::EmptyAnchor {
                    segment: Some(seg.to_owned()),
                },
                other => other,
            })?;
            Ok((seg, sys, s))
        })
        .collect::<Result<_>>()?;

    let p_name = format!("{metric_name}{PRECISION_SUFFIX}");
    let r_name = format!("{metric_name}{RECALL_SUFFIX}");
    let mut m = ScoreMatrix::new();
    for (seg, sys, s) in scored {
        m.insert(seg, sys, metric_name, s.f)?;
        m.insert(seg, sys, &p_name, s.precision)?;
        m.insert(seg, sys, &r_name, s.recall)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EvalInstance, LanguagePair};
    use crate::lm::UniformLm;
    use std::collections::BTreeMap;

    fn corpus(with_refs: bool) -> Corpus {
        let instances = (0..3)
            .map(|i| EvalInstance {
                segment_id: format!("s{i}"),
                source: Text::whitespace(format!("src {i}")),
                reference: with_refs.then(|| Text::whitespace(format!("ref number {i}"))),
                hypotheses: BTreeMap::from([
                    ("A".to_owned(), Text::whitespace("some words")),
                    ("B".to_owned(), Text::whitespace(if i == 1 { "" } else { "other" })),
                ]),
            })
            .collect();
        Corpus::new(LanguagePair::undetermined(), instances, vec![]).unwrap()
    }

    #[test]
    fn uniform_model_scores() {
        let m = UniformLm::new(9);
        let s = t5score(&m, &Text::whitespace("a b c"), &Text::whitespace("d")).unwrap();
        let l = 0.1f64.ln();
        assert!((s.precision - l).abs() < 1e-12);
        assert!((s.recall - l).abs() < 1e-12);
        assert!((s.f - l).abs() < 1e-12);
    }

    #[test]
    fn empty_hypothesis_gets_floor_and_empty_anchor_errors() {
        let m = UniformLm::new(9);
        let s = t5score(&m, &Text::whitespace("a"), &Text::whitespace("  ")).unwrap();
        assert_eq!(s, DirectionalScore::floor());
        assert!(matches!(
            t5score(&m, &Text::whitespace(""), &Text::whitespace("x")),
            Err(Error::EmptyAnchor { .. })
        ));
    }

    #[test]
    fn corpus_cardinality() {
        let m = UniformLm::new(9);
        let s = score_corpus(&m, &corpus(true), EvalMode::ReferenceBased, "t5").unwrap();
        for name in ["t5", "t5.p", "t5.r"] {
            assert_eq!(s.column(name).len(), 6);
        }
        assert_eq!(s.get("s1", "B", "t5"), Some(FLOOR_SCORE));
    }

    #[test]
    fn source_mode_without_references() {
        let m = UniformLm::new(9);
        let c = corpus(false);
        assert!(score_corpus(&m, &c, EvalMode::SourceBased, "t5").is_ok());
        match score_corpus(&m, &c, EvalMode::ReferenceBased, "t5") {
            Err(Error::MissingReference { segments }) => assert_eq!(segments, ["s0", "s1", "s2"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transform_hook_is_applied() {
        let m = UniformLm::new(9);
        let blank: &(dyn Fn(&Text) -> Text + Sync) = &|t: &Text| t.map_raw(|_| String::new());
        let err = score_corpus_with(&m, &corpus(true), EvalMode::ReferenceBased, "t5", Some(blank));
        assert!(matches!(err, Err(Error::EmptyAnchor { segment: Some(_) })));
    }
}
