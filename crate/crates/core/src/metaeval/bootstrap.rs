use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::segk::concordance;
use super::system::{kendall_tau_b, pearson};
use crate::corpus::{overall_scores, single_kind, Judgment};
use crate::error::{Error, Result};
use crate::scoring::ScoreMatrix;
use crate::training::RankPair;

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    SegK,
    SysP,
    SysK,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seg-k" | "seg_k" => Ok(Statistic::SegK),
            "sys-p" | "sys_p" => Ok(Statistic::SysP),
            "sys-k" | "sys_k" => Ok(Statistic::SysK),
            other => Err(Error::InvalidArgument(format!("unknown statistic {other:?}"))),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::SegK => "seg-k",
            Statistic::SysP => "sys-p",
            Statistic::SysK => "sys-k",
        })
    }
}

/// `p_values[i][j]`: fraction of resamples where metric `i` did not beat metric `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMatrix {
    pub metrics: Vec<String>,
    pub p_values: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl SignificanceMatrix {
    pub fn index(&self, metric: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == metric)
    }

    /// Metric `i` significantly outperforms metric `j`.
    pub fn outperforms(&self, i: usize, j: usize) -> bool {
        i != j && self.p_values[i][j] < self.alpha
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for m in &self.metrics {
            let _ = write!(out, "\t{m}");
        }
        out.push('\n');
        for (m, row) in self.metrics.iter().zip(&self.p_values) {
            out.push_str(m);
            for p in row {
                let _ = write!(out, "\t{p}");
            }
            out.push('\n');
        }
        out
    }
}

/// Paired bootstrap over `n_units` evaluation units.
///
/// Iteration `t` draws `n_units` indices with replacement from a ChaCha8
/// stream seeded by `seed` with stream id `t`, so results do not depend on
/// thread scheduling. `statistic(metric, sample)` is evaluated for every
/// metric on the same sample. Returns the `n_metrics x n_metrics` matrix of
/// fractions where `stat_i <= stat_j`.
pub fn paired_bootstrap<F>(
    n_units: usize,
    n_metrics: usize,
    iterations: usize,
    seed: u64,
    statistic: F,
) -> Vec<Vec<f64>>
where
    F: Fn(usize, &[usize]) -> f64 + Sync,
{
    let stats: Vec<Vec<f64>> = (0..iterations)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = (0..n_units).map(|_| rng.random_range(0..n_units)).collect();
            (0..n_metrics).map(|m| statistic(m, &sample)).collect()
        })
        .collect();
    let mut p = vec![vec![0.0; n_metrics]; n_metrics];
    for (i, row) in p.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let le = stats.iter().filter(|s| s[i] <= s[j]).count();
            *cell = le as f64 / iterations as f64;
        }
    }
    p
}

/// (metric, human), if both exist.
type Cell = Option<(f64, f64)>;

/// Per segment and system, a cell for every metric.
struct SystemCells {
    n_systems: usize,
    /// [segment][metric][system]
    cells: Vec<Vec<Vec<Cell>>>,
}

impl SystemCells {
    fn new(scores: &ScoreMatrix, metrics: &[String], judgments: &[Judgment]) -> Result<Self> {
        single_kind(judgments)?;
        let human = overall_scores(judgments);
        let mut segments: Vec<&String> = human.keys().map(|k| &k.0).collect();
        segments.dedup();
        let mut systems: Vec<&String> = human.keys().map(|k| &k.1).collect();
        systems.sort();
        systems.dedup();
        let columns: Vec<_> = metrics.iter().map(|m| scores.column(m)).collect();
        let cells = segments
            .iter()
            .map(|seg| {
                columns
                    .iter()
                    .map(|col| {
                        systems
                            .iter()
                            .map(|sys| {
                                let key = ((*seg).clone(), (*sys).clone());
                                Some((*col.get(&key)?, *human.get(&key)?))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(SystemCells {
            n_systems: systems.len(),
            cells,
        })
    }

    fn statistic(&self, metric: usize, sample: &[usize], kind: Statistic) -> f64 {
        let mut acc = vec![(0.0, 0.0, 0usize); self.n_systems];
        for &s in sample {
            for (a, cell) in acc.iter_mut().zip(&self.cells[s][metric]) {
                if let Some((m, h)) = cell {
                    a.0 += m;
                    a.1 += h;
                    a.2 += 1;
                }
            }
        }
        let (ms, hs): (Vec<f64>, Vec<f64>) = acc
            .iter()
            .filter(|a| a.2 > 0)
            .map(|a| (a.0 / a.2 as f64, a.1 / a.2 as f64))
            .unzip();
        if ms.len() < 2 {
            return f64::NEG_INFINITY;
        }
        let stat = match kind {
            Statistic::SysP => pearson(&ms, &hs),
            _ => kendall_tau_b(&ms, &hs),
        };
        stat.or_neg_inf()
    }
}

/// Pairwise significance between metrics by paired bootstrap.
///
/// For `seg-k` the rank pairs are resampled; for the system-level statistics
/// the judged segments are. Degenerate statistics lose every comparison.
pub fn bootstrap_significance(
    scores: &ScoreMatrix,
    metrics: &[String],
    pairs: &[RankPair],
    judgments: &[Judgment],
    iterations: usize,
    seed: u64,
    statistic: Statistic,
) -> Result<SignificanceMatrix> {
    if metrics.len() < 2 {
        return Err(Error::InvalidArgument("significance needs at least two metrics".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    let p_values = match statistic {
        Statistic::SegK => {
            if pairs.is_empty() {
                return Err(Error::EmptyPairs);
            }
            let conc = metrics
                .iter()
                .map(|m| concordance(scores, m, pairs))
                .collect::<Result<Vec<_>>>()?;
            let n = pairs.len() as f64;
            paired_bootstrap(pairs.len(), metrics.len(), iterations, seed, |m, sample| {
                let c = sample.iter().filter(|&&i| conc[m][i]).count() as f64;
                (2.0 * c - n) / n
            })
        }
        Statistic::SysP | Statistic::SysK => {
            for m in metrics {
                // surfaces missing metrics and too few systems as errors
                super::system_correlations(scores, m, judgments)?;
            }
            let cells = SystemCells::new(scores, metrics, judgments)?;
            paired_bootstrap(cells.cells.len(), metrics.len(), iterations, seed, |m, sample| {
                cells.statistic(m, sample, statistic)
            })
        }
    };
    Ok(SignificanceMatrix {
        metrics: metrics.to_vec(),
        p_values,
        alpha: DEFAULT_SIGNIFICANCE,
    })
}
