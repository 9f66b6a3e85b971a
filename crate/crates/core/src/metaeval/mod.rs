//! Meta-evaluation: how well metric scores agree with human judgments.

mod bootstrap;
mod rmse;
mod segk;
mod system;
mod topk;

use std::fmt;

pub use bootstrap::{
    bootstrap_significance, paired_bootstrap, SignificanceMatrix, Statistic, DEFAULT_ITERATIONS, DEFAULT_SIGNIFICANCE,
};
pub use rmse::{category_rmse, CategoryRmse};
pub use segk::{seg_kendall, SegKResult};
pub use system::{kendall_tau_b, pearson, system_correlations, system_means, SysCorrResult};
pub use topk::{rank_systems, top_k_filter};

/// A statistic that may be undefined, e.g. a correlation with a constant vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stat {
    Value(f64),
    Degenerate,
}

impl Stat {
    pub fn value(self) -> Option<f64> {
        match self {
            Stat::Value(v) => Some(v),
            Stat::Degenerate => None,
        }
    }

    pub fn is_degenerate(self) -> bool {
        self == Stat::Degenerate
    }

    /// Degenerate maps to negative infinity so it never wins a comparison.
    pub(crate) fn or_neg_inf(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stat::Value(v) => write!(f, "{v}"),
            Stat::Degenerate => f.write_str("degenerate"),
        }
    }
}

/// One line of `metric TAB statistic TAB key TAB value TAB n` output.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub metric: String,
    pub statistic: String,
    /// Error category for RMSE, language pair for correlations.
    pub key: String,
    pub value: Stat,
    pub n: usize,
}

impl ResultRow {
    pub const HEADER: &'static str = "metric\tstatistic\tkey\tvalue\tn";

    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.metric, self.statistic, self.key, self.value, self.n
        )
    }
}

/// Relative spread below which a vector counts as constant. Means of equal
/// values taken in different orders differ by a few ulps, and correlating that
/// rounding noise gives arbitrary results.
pub const CONSTANT_RTOL: f64 = 1e-12;

/// True when `max - min <= CONSTANT_RTOL * max |x|`.
pub(crate) fn is_constant(xs: &[f64]) -> bool {
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    hi - lo <= CONSTANT_RTOL * lo.abs().max(hi.abs())
}
