//! Result tables with best-score and significance flags.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metaeval::{SignificanceMatrix, Stat};

/// Per-cell flags. All are false for degenerate cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// Best value in the column.
    pub best_overall: bool,
    /// Best value among unsupervised metrics (set on unsupervised rows only).
    pub best_unsupervised: bool,
    /// No other metric significantly outperforms this one. Needs a significance matrix.
    pub not_outperformed_any: bool,
    /// No unsupervised metric significantly outperforms this one. Needs a significance matrix.
    pub not_outperformed_unsup: bool,
}

impl Flags {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.best_overall {
            v.push("best_overall");
        }
        if self.best_unsupervised {
            v.push("best_unsupervised");
        }
        if self.not_outperformed_any {
            v.push("not_outperformed_any");
        }
        if self.not_outperformed_unsup {
            v.push("not_outperformed_unsup");
        }
        v
    }
}

/// One column of values, one per row metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportColumn {
    pub name: String,
    pub lower_is_better: bool,
    pub values: Vec<Stat>,
    pub significance: Option<SignificanceMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<String>,
    pub columns: Vec<ReportColumn>,
    /// `flags[column][row]`
    pub flags: Vec<Vec<Flags>>,
}

fn best_of(values: &[(usize, f64)], lower: bool) -> Option<f64> {
    let it = values.iter().map(|v| v.1);
    if lower {
        it.reduce(f64::min)
    } else {
        it.reduce(f64::max)
    }
}

impl ReportTable {
    /// Computes flags for every cell. `unsupervised` names the rows that count
    /// as unsupervised metrics.
    pub fn build(rows: Vec<String>, columns: Vec<ReportColumn>, unsupervised: &BTreeSet<String>) -> Result<Self> {
        let mut flags = Vec::with_capacity(columns.len());
        for col in &columns {
            if col.values.len() != rows.len() {
                return Err(Error::InvalidArgument(format!(
                    "column {} has {} values for {} rows",
                    col.name,
                    col.values.len(),
                    rows.len()
                )));
            }
            let present: Vec<(usize, f64)> = col
                .values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.value().map(|x| (i, x)))
                .collect();
            let unsup: Vec<(usize, f64)> = present
                .iter()
                .copied()
                .filter(|(i, _)| unsupervised.contains(&rows[*i]))
                .collect();
            let best = best_of(&present, col.lower_is_better);
            let best_u = best_of(&unsup, col.lower_is_better);

            // significance indices of each row, if the matrix covers them
            let sig_idx: Option<Vec<usize>> = col
                .significance
                .as_ref()
                .map(|s| {
                    rows.iter()
                        .map(|r| {
                            s.index(r).ok_or_else(|| {
                                Error::InvalidArgument(format!("significance for {} lacks metric {r}", col.name))
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;

            let mut col_flags = vec![Flags::default(); rows.len()];
            for &(i, v) in &present {
                let f = &mut col_flags[i];
                f.best_overall = Some(v) == best;
                f.best_unsupervised = unsupervised.contains(&rows[i]) && Some(v) == best_u;
                if let (Some(sig), Some(idx)) = (&col.significance, &sig_idx) {
                    let beaten_by = |j: usize| j != i && sig.outperforms(idx[j], idx[i]);
                    f.not_outperformed_any = !(0..rows.len()).any(beaten_by);
                    f.not_outperformed_unsup = !(0..rows.len())
                        .filter(|&j| unsupervised.contains(&rows[j]))
                        .any(beaten_by);
                }
            }
            flags.push(col_flags);
        }
        Ok(ReportTable { rows, columns, flags })
    }

    pub fn flags(&self, column: usize, row: usize) -> Flags {
        self.flags[column][row]
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| metric |");
        for c in &self.columns {
            let _ = write!(out, " {} |", c.name);
        }
        out.push_str("\n|---|");
        for _ in &self.columns {
            out.push_str("---|");
        }
        out.push('\n');
        for (r, name) in self.rows.iter().enumerate() {
            let _ = write!(out, "| {name} |");
            for (c, col) in self.columns.iter().enumerate() {
                let v = match col.values[r] {
                    Stat::Value(x) => format!("{x:.4}"),
                    Stat::Degenerate => "degenerate".to_owned(),
                };
                let f = self.flags[c][r].names();
                if f.is_empty() {
                    let _ = write!(out, " {v} |");
                } else {
                    let _ = write!(out, " {v} ({}) |", f.join(", "));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Long format: one line per cell with full-precision values.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tcolumn\tvalue\tflags\n");
        for (c, col) in self.columns.iter().enumerate() {
            for (r, name) in self.rows.iter().enumerate() {
                let f = self.flags[c][r].names();
                let f = if f.is_empty() { "-".to_owned() } else { f.join(",") };
                let _ = writeln!(out, "{name}\t{}\t{}\t{f}", col.name, col.values[r]);
            }
        }
        out
    }
}
