use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCORE_HEADER: &str = "segment_id\tsystem_id\tmetric\tscore";

/// (segment, system, metric)
pub type ScoreKey = (String, String, String);

/// Metric scores keyed by (segment, system, metric), at most one per key.
///
/// Iteration and serialization are in lexicographic key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMatrix {
    entries: BTreeMap<ScoreKey, f64>,
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, segment: &str, system: &str, metric: &str, score: f64) -> Result<()> {
        let key = (segment.to_owned(), system.to_owned(), metric.to_owned());
        if self.entries.contains_key(&key) {
            return Err(Error::invariant(
                "duplicate score entry",
                vec![format!("{segment}/{system}/{metric}")],
            ));
        }
        self.entries.insert(key, score);
        Ok(())
    }

    /// Adds every entry of `other`; fails on the first duplicate key.
    pub fn merge(&mut self, other: ScoreMatrix) -> Result<()> {
        for ((seg, sys, metric), v) in other.entries {
            self.insert(&seg, &sys, &metric, v)?;
        }
        Ok(())
    }

    pub fn get(&self, segment: &str, system: &str, metric: &str) -> Option<f64> {
        // BTreeMap<(String, ..)> cannot be probed with borrowed tuples.
        self.entries
            .get(&(segment.to_owned(), system.to_owned(), metric.to_owned()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScoreKey, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn metrics(&self) -> BTreeSet<String> {
        self.entries.keys().map(|k| k.2.clone()).collect()
    }

    /// All scores of one metric keyed by (segment, system).
    pub fn column(&self, metric: &str) -> BTreeMap<(String, String), f64> {
        self.entries
            .iter()
            .filter(|(k, _)| k.2 == metric)
            .map(|(k, &v)| ((k.0.clone(), k.1.clone()), v))
            .collect()
    }

    /// Keeps only entries whose key satisfies `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&ScoreKey) -> bool) {
        self.entries.retain(|k, _| keep(k));
    }

    /// Copies the column `from` under the name `to`.
    pub fn with_renamed(&self, from: &str, to: &str) -> ScoreMatrix {
        ScoreMatrix {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| k.2 == from)
                .map(|(k, &v)| ((k.0.clone(), k.1.clone(), to.to_owned()), v))
                .collect(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.entries.len() + 1));
        out.push_str(SCORE_HEADER);
        out.push('\n');
        for ((seg, sys, metric), v) in &self.entries {
            let _ = writeln!(out, "{seg}\t{sys}\t{metric}\t{v}");
        }
        out
    }

    pub fn from_tsv(path: &Path, content: &str) -> Result<Self> {
        let mut lines = content.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end_matches('\r') == SCORE_HEADER => {}
            Some((_, h)) => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("expected header {SCORE_HEADER:?}, found {h:?}"),
                ))
            }
            None => return Err(Error::parse(path, 1, "empty score file")),
        }
        let mut m = ScoreMatrix::new();
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(Error::parse(path, i + 1, "expected 4 tab-separated fields"));
            }
            let v: f64 = f[3]
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("invalid score {:?}", f[3])))?;
            if v.is_nan() {
                return Err(Error::parse(path, i + 1, "NaN score"));
            }
            m.insert(f[0], f[1], f[2], v)
                .map_err(|_| Error::parse(path, i + 1, "duplicate entry"))?;
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(path, &s)
    }
}
