//! Two-group statistics for the learner study.

mod dist;
mod mann_whitney;
mod shapiro;
mod ttest;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dist::{normal_cdf, normal_sf, reg_incomplete_beta, student_t_two_sided};
pub use mann_whitney::{mann_whitney_p_from_u, mann_whitney_u, mid_ranks, u_statistics, EXACT_MAX_N};
pub use shapiro::{shapiro_wilk, ShapiroWilk};
pub use ttest::welch_t_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {found}")]
    TooFewValues { needed: usize, found: usize },
    #[error("at most {limit} values are supported, got {found}")]
    TooManyValues { limit: usize, found: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// A labelled group of observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, values: impl Into<Vec<f64>>) -> Self {
        Self {
            label: label.into(),
            values: values.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn summary(&self) -> Summary {
        Summary::of(&self.values)
    }
}

/// Mean, sample standard deviation (n - 1 denominator) and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Zero when `n < 2`.
    pub sd: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = mean(values);
        let sd = if n < 2 { 0.0 } else { libm::sqrt(variance(values, mean)) };
        Self { mean, sd, n }
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance around a precomputed mean.
pub(crate) fn variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TTest,
    MannWhitney,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TTest => "t_test",
            Method::MannWhitney => "mann_whitney",
        }
    }
}

/// Both Mann-Whitney statistics; `u1` belongs to the first group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UStatistics {
    pub u1: f64,
    pub u2: f64,
    /// True when the p-value came from the exact null distribution.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    /// Welch's t, or U of the first group.
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    /// Welch-Satterthwaite degrees of freedom for the t-test.
    pub df: Option<f64>,
    pub u: Option<UStatistics>,
    /// Shapiro-Wilk per group when the normality gate ran; `None` for a group
    /// the test is undefined on.
    pub normality: [Option<ShapiroWilk>; 2],
    pub group_summaries: [Summary; 2],
}

/// Alpha of the normality gate: both groups need `p > GATE_ALPHA` for the
/// t-test.
pub const GATE_ALPHA: f64 = 0.05;

/// Runs Shapiro-Wilk on both groups and picks Welch's t-test when both look
/// normal, Mann-Whitney U otherwise.
///
/// A group on which Shapiro-Wilk is undefined because all its values are
/// equal counts as non-normal.
pub fn compare_groups(g1: &GroupSample, g2: &GroupSample) -> Result<TestResult, StatsError> {
    let gate = |g: &GroupSample| match shapiro_wilk(&g.values) {
        Ok(sw) => Ok(Some(sw)),
        Err(StatsError::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    };
    let normality = [gate(g1)?, gate(g2)?];
    let normal = normality.iter().all(|sw| sw.is_some_and(|sw| sw.p > GATE_ALPHA));
    let mut result = if normal { welch_t_test(g1, g2)? } else { mann_whitney_u(g1, g2)? };
    result.normality = normality;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_uses_sample_sd() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.sd - libm::sqrt(32.0 / 7.0)).abs() < 1e-12);
        assert_eq!(Summary::of(&[3.0]).sd, 0.0);
    }

    #[test]
    fn constant_group_routes_to_mann_whitney() {
        let g1 = GroupSample::new("a", [5.0; 10]);
        let g2 = GroupSample::new("b", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let r = compare_groups(&g1, &g2).unwrap();
        assert_eq!(r.method, Method::MannWhitney);
        assert!(r.normality[0].is_none() && r.normality[1].is_some());
    }

    #[test]
    fn gate_needs_three_values() {
        let g1 = GroupSample::new("a", [1.0, 2.0]);
        let g2 = GroupSample::new("b", [1.0, 2.0, 3.0]);
        assert!(matches!(compare_groups(&g1, &g2), Err(StatsError::TooFewValues { .. })));
    }
}
