use std::collections::BTreeMap;

use super::{is_constant, Stat};
use crate::corpus::{overall_scores, ErrorCategory, Judgment};
use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryRmse {
    pub category: ErrorCategory,
    pub rmse: Stat,
    pub n: usize,
}

/// z-scores with the population standard deviation.
fn z_normalize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    xs.iter().map(|x| (x - mean) / sd).collect()
}

/// RMSE between z-normalized metric scores and z-normalized human scores.
///
/// For `overall` the human score of a cell is its aggregate overall score;
/// for any other category it is the mean of that category's judgments. Cells
/// without a metric score are left out.
pub fn category_rmse(
    scores: &ScoreMatrix,
    metric: &str,
    judgments: &[Judgment],
    category: ErrorCategory,
) -> Result<CategoryRmse> {
    let human: BTreeMap<(String, String), f64> = if category == ErrorCategory::Overall {
        overall_scores(judgments)
    } else {
        let mut acc: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for j in judgments.iter().filter(|j| j.category == Some(category)) {
            acc.entry((j.segment_id.clone(), j.system_id.clone()))
                .or_default()
                .push(j.score);
        }
        acc.into_iter()
            .map(|(k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
            .collect()
    };
    let column = scores.column(metric);
    let (ms, hs): (Vec<f64>, Vec<f64>) = human
        .iter()
        .filter_map(|(k, &h)| column.get(k).map(|&m| (m, h)))
        .unzip();
    if ms.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} cells with both a {category} judgment and a {metric} score, need 2",
            ms.len()
        )));
    }
    let rmse = if is_constant(&ms) || is_constant(&hs) {
        Stat::Degenerate
    } else {
        let (zm, zh) = (z_normalize(&ms), z_normalize(&hs));
        let mse = zm.iter().zip(&zh).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / zm.len() as f64;
        Stat::Value(mse.sqrt())
    };
    Ok(CategoryRmse {
        category,
        rmse,
        n: ms.len(),
    })
}
