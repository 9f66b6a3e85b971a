use std::collections::BTreeMap;

use super::{is_constant, Stat};
use crate::corpus::{overall_scores, single_kind, Judgment};
use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SysCorrResult {
    pub pearson: Stat,
    pub kendall: Stat,
    pub n_systems: usize,
}

/// Sample Pearson correlation. Degenerate if either vector is constant or
/// shorter than two.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Stat {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 || is_constant(xs) || is_constant(ys) {
        return Stat::Degenerate;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Stat::Value((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Number of tied pairs within runs of equal values of an already sorted slice.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort counting the inversions it removes.
fn sort_count_swaps(v: &mut [f64], scratch: &mut Vec<f64>) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_count_swaps(&mut v[..mid], scratch) + sort_count_swaps(&mut v[mid..], scratch);
    scratch.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            scratch.push(v[j]);
            swaps += (mid - i) as i64;
            j += 1;
        } else {
            scratch.push(v[i]);
            i += 1;
        }
    }
    scratch.extend_from_slice(&v[i..mid]);
    scratch.extend_from_slice(&v[j..n]);
    v.copy_from_slice(scratch);
    swaps
}

/// Kendall tau-b with tie correction, in O(n log n).
///
/// Degenerate if either vector is constant or shorter than two.
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Stat {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as i64;
    if n < 2 {
        return Stat::Degenerate;
    }
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n0 = n * (n - 1) / 2;
    let x_sorted: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&x_sorted);
    let n3 = tied_pairs(&pts);
    let mut y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut scratch = Vec::with_capacity(y.len());
    let swaps = sort_count_swaps(&mut y, &mut scratch);
    let n2 = tied_pairs(&y);
    let (dx, dy) = (n0 - n1, n0 - n2);
    if dx == 0 || dy == 0 {
        return Stat::Degenerate;
    }
    let num = n0 - n1 - n2 + n3 - 2 * swaps;
    Stat::Value((num as f64 / ((dx as f64) * (dy as f64)).sqrt()).clamp(-1.0, 1.0))
}

/// Per-system (mean metric, mean human) over the cells that have both.
pub fn system_means(
    scores: &ScoreMatrix,
    metric: &str,
    judgments: &[Judgment],
) -> Result<BTreeMap<String, (f64, f64)>> {
    single_kind(judgments)?;
    let column = scores.column(metric);
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for ((seg, sys), h) in overall_scores(judgments) {
        if let Some(&m) = column.get(&(seg, sys.clone())) {
            let e = acc.entry(sys).or_default();
            e.0 += m;
            e.1 += h;
            e.2 += 1;
        }
    }
    Ok(acc
        .into_iter()
        .map(|(sys, (m, h, n))| (sys, (m / n as f64, h / n as f64)))
        .collect())
}

/// Pearson and Kendall tau-b between per-system mean metric and mean human scores.
pub fn system_correlations(scores: &ScoreMatrix, metric: &str, judgments: &[Judgment]) -> Result<SysCorrResult> {
    let means = system_means(scores, metric, judgments)?;
    if means.len() < 2 {
        return Err(Error::InsufficientSystems {
            needed: 2,
            found: means.len(),
        });
    }
    let (ms, hs): (Vec<f64>, Vec<f64>) = means.values().copied().unzip();
    Ok(SysCorrResult {
        pearson: pearson(&ms, &hs),
        kendall: kendall_tau_b(&ms, &hs),
        n_systems: means.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_anti() {
        let h = [1.0, 2.0, 3.0, 5.0];
        let neg: Vec<f64> = h.iter().map(|x| -x).collect();
        assert_eq!(pearson(&h, &h), Stat::Value(1.0));
        assert_eq!(kendall_tau_b(&h, &h), Stat::Value(1.0));
        assert!((pearson(&h, &neg).value().unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(kendall_tau_b(&h, &neg), Stat::Value(-1.0));
    }

    #[test]
    fn ties_and_degenerate() {
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Stat::Degenerate);
        assert_eq!(kendall_tau_b(&[0.1; 3], &[1.0, 2.0, 3.0]), Stat::Degenerate);
        // x = 1 1 2, y = 1 2 3: C = 2, D = 0, one x-tie
        let t = kendall_tau_b(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).value().unwrap();
        assert!((t - 2.0 / (2.0f64 * 3.0).sqrt()).abs() < 1e-15);
    }
}
