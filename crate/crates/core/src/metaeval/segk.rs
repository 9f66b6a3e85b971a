use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;
use crate::training::RankPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegKResult {
    pub concordant: usize,
    pub discordant: usize,
    pub tau: f64,
}

pub(crate) fn lookup(scores: &ScoreMatrix, segment: &str, system: &str, metric: &str) -> Result<f64> {
    scores.get(segment, system, metric).ok_or_else(|| Error::MissingScore {
        segment: segment.to_owned(),
        system: system.to_owned(),
        metric: metric.to_owned(),
    })
}

/// Per pair: does the metric rank the better hypothesis strictly higher?
pub(crate) fn concordance(scores: &ScoreMatrix, metric: &str, pairs: &[RankPair]) -> Result<Vec<bool>> {
    pairs
        .iter()
        .map(|p| {
            let b = lookup(scores, &p.segment_id, &p.better_system, metric)?;
            let w = lookup(scores, &p.segment_id, &p.worse_system, metric)?;
            Ok(b > w)
        })
        .collect()
}

/// `(C - D) / (C + D)` over rank pairs. A metric tie counts as discordant.
pub fn seg_kendall(scores: &ScoreMatrix, metric: &str, pairs: &[RankPair]) -> Result<SegKResult> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let conc = concordance(scores, metric, pairs)?;
    let c = conc.iter().filter(|&&x| x).count();
    let d = conc.len() - c;
    Ok(SegKResult {
        concordant: c,
        discordant: d,
        tau: (c as f64 - d as f64) / (c + d) as f64,
    })
}
