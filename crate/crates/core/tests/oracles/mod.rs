//! Brute-force reference implementations used to cross-check the library.
#![allow(dead_code)]

/// (concordant, discordant) over (better, worse) metric scores; ties are discordant.
pub fn seg_k_counts(pairs: &[(f64, f64)]) -> (usize, usize) {
    let mut c = 0;
    let mut d = 0;
    for &(b, w) in pairs {
        if b > w {
            c += 1;
        } else {
            d += 1;
        }
    }
    (c, d)
}

pub fn seg_k(pairs: &[(f64, f64)]) -> f64 {
    let (c, d) = seg_k_counts(pairs);
    (c as f64 - d as f64) / (c + d) as f64
}

/// Mean product of z-scores, each from a separate mean pass and SD pass.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if flat(x) || flat(y) {
        return None;
    }
    let z = |v: &[f64]| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        v.iter().map(|a| (a - mean) / sd).collect::<Vec<f64>>()
    };
    let (zx, zy) = (z(x), z(y));
    Some(zx.iter().zip(&zy).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64)
}

fn flat(v: &[f64]) -> bool {
    let hi = v.iter().cloned().fold(f64::MIN, f64::max);
    let lo = v.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo <= 1e-12 * hi.abs().max(lo.abs())
}

/// O(n^2) pair counting with the tau-b tie correction.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let den = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    if den == 0.0 || c + d + tx == 0 || c + d + ty == 0 {
        return None;
    }
    Some((c - d) as f64 / den)
}

/// Separate mean pass, SD pass, then RMSE of z-scores.
pub fn normalized_rmse(m: &[f64], h: &[f64]) -> f64 {
    fn z(v: &[f64]) -> Vec<f64> {
        let n = v.len() as f64;
        let mut mean = 0.0;
        for x in v {
            mean += x;
        }
        mean /= n;
        let mut var = 0.0;
        for x in v {
            var += (x - mean) * (x - mean);
        }
        let sd = (var / n).sqrt();
        v.iter().map(|x| (x - mean) / sd).collect()
    }
    let (a, b) = (z(m), z(h));
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    (s / a.len() as f64).sqrt()
}

/// Token-level Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

use std::collections::BTreeMap;

use metricforge::corpus::{Corpus, EvalInstance, Judgment, JudgmentKind, LanguagePair};
use metricforge::scoring::ScoreMatrix;
use metricforge::Text;
use rand::Rng;

pub const METRIC: &str = "m";

/// A small judged corpus with one metric, kept alongside plain arrays so the
/// oracles never go through the library's own aggregation.
pub struct RandomInstance {
    pub corpus: Corpus,
    pub scores: ScoreMatrix,
    /// [segment][system]
    pub human: Vec<Vec<f64>>,
    pub metric: Vec<Vec<f64>>,
}

impl RandomInstance {
    pub fn n_systems(&self) -> usize {
        self.human[0].len()
    }

    /// Per-system means over segments.
    pub fn system_means(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.human.len() as f64;
        (0..self.n_systems())
            .map(|s| {
                let m: f64 = self.metric.iter().map(|r| r[s]).sum::<f64>() / n;
                let h: f64 = self.human.iter().map(|r| r[s]).sum::<f64>() / n;
                (m, h)
            })
            .unzip()
    }

    /// (metric of better, metric of worse) for every pair of hypotheses
    /// whose human scores differ by at least `threshold`.
    pub fn pairs(&self, threshold: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (h, m) in self.human.iter().zip(&self.metric) {
            for i in 0..h.len() {
                for j in 0..h.len() {
                    if h[i] > h[j] && h[i] - h[j] >= threshold {
                        out.push((m[i], m[j]));
                    }
                }
            }
        }
        out
    }

    /// Flattened (metric, human) cells.
    pub fn cells(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.metric.iter().flatten().copied().collect();
        let h = self.human.iter().flatten().copied().collect();
        (m, h)
    }
}

fn draw(rng: &mut impl Rng, coarse: bool, scale: f64) -> f64 {
    if coarse {
        rng.random_range(0..5) as f64 * scale / 4.0
    } else {
        rng.random::<f64>() * scale
    }
}

/// Hypothesis texts are distinct per system so no pair is dropped as identical.
pub fn random_instance(rng: &mut impl Rng, n_segments: usize, n_systems: usize) -> RandomInstance {
    let coarse_h = rng.random_bool(0.5);
    let coarse_m = rng.random_bool(0.5);
    let mut instances = Vec::new();
    let mut judgments = Vec::new();
    let mut scores = ScoreMatrix::new();
    let mut human = Vec::new();
    let mut metric = Vec::new();
    for s in 0..n_segments {
        let seg = format!("seg{s}");
        let mut hyps = BTreeMap::new();
        let mut hrow = Vec::new();
        let mut mrow = Vec::new();
        for k in 0..n_systems {
            let sys = format!("sys{k:02}");
            hyps.insert(sys.clone(), Text::whitespace(format!("out {k} {s}")));
            let h = draw(rng, coarse_h, 100.0);
            let m = draw(rng, coarse_m, 10.0) - 5.0;
            judgments.push(Judgment {
                segment_id: seg.clone(),
                system_id: sys.clone(),
                score: h,
                kind: JudgmentKind::RawDa,
                category: None,
            });
            scores.insert(&seg, &sys, METRIC, m).unwrap();
            hrow.push(h);
            mrow.push(m);
        }
        instances.push(EvalInstance {
            segment_id: seg,
            source: Text::whitespace("src"),
            reference: Some(Text::whitespace("ref")),
            hypotheses: hyps,
        });
        human.push(hrow);
        metric.push(mrow);
    }
    let corpus = Corpus::new(LanguagePair::undetermined(), instances, judgments).unwrap();
    RandomInstance {
        corpus,
        scores,
        human,
        metric,
    }
}

use metricforge::lm::{LogLinearLm, Vocab};

/// Vocabulary `t0 .. t{v-1}`.
pub fn vocab(v: usize) -> Vocab {
    Vocab::from_tokens((0..v).map(|i| format!("t{i}")))
}

/// Text of `min..=max` tokens; roughly one token in ten is out of vocabulary.
pub fn random_text(rng: &mut impl Rng, v: usize, min: usize, max: usize) -> Text {
    let n = rng.random_range(min..=max);
    let words: Vec<String> = (0..n)
        .map(|_| {
            if rng.random_bool(0.1) {
                "oov".to_string()
            } else {
                format!("t{}", rng.random_range(0..v))
            }
        })
        .collect();
    Text::whitespace(words.join(" "))
}

pub fn random_loglinear(rng: &mut impl Rng, v: usize) -> LogLinearLm {
    let mut m = LogLinearLm::zeros(vocab(v));
    for w in m.weights_mut() {
        *w = rng.random_range(-1.0..1.0);
    }
    m
}
