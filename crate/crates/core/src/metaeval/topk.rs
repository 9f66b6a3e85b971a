use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;

/// Systems ordered by mean human score, best first. Systems without judgments
/// come last; ties break by system id.
pub fn rank_systems(corpus: &Corpus) -> Vec<String> {
    let mut acc: BTreeMap<String, (f64, usize)> = corpus.systems().into_iter().map(|s| (s, (0.0, 0))).collect();
    for ((_, sys), h) in corpus.human_scores() {
        if let Some(e) = acc.get_mut(&sys) {
            e.0 += h;
            e.1 += 1;
        }
    }
    let mut ranked: Vec<(String, f64)> = acc
        .into_iter()
        .map(|(s, (sum, n))| (s, if n == 0 { f64::NEG_INFINITY } else { sum / n as f64 }))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().map(|(s, _)| s).collect()
}

/// Keeps hypotheses, judgments and scores of the `k` best systems only.
pub fn top_k_filter(corpus: &Corpus, scores: &ScoreMatrix, k: usize) -> Result<(Corpus, ScoreMatrix)> {
    let ranked = rank_systems(corpus);
    if k < 2 || k > ranked.len() {
        return Err(Error::InvalidArgument(format!(
            "k must be between 2 and {} systems, got {k}",
            ranked.len()
        )));
    }
    let keep: BTreeSet<String> = ranked.into_iter().take(k).collect();
    let (lp, mut instances, mut judgments) = corpus.clone().into_parts();
    for inst in &mut instances {
        inst.hypotheses.retain(|sys, _| keep.contains(sys));
    }
    judgments.retain(|j| keep.contains(&j.system_id));
    let filtered = Corpus::new(lp, instances, judgments)?;
    let mut s = scores.clone();
    s.retain(|(_, sys, _)| keep.contains(sys));
    Ok((filtered, s))
}
