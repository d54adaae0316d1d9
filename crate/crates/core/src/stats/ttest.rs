use super::dist::student_t_two_sided;
use super::{mean, variance, GroupSample, Method, StatsError, Summary, TestResult};

/// Welch's unequal-variance t-test, two-sided.
pub fn welch_t_test(g1: &GroupSample, g2: &GroupSample) -> Result<TestResult, StatsError> {
    for g in [g1, g2] {
        if g.n() < 2 {
            return Err(StatsError::TooFewValues { needed: 2, found: g.n() });
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let (n1, n2) = (g1.n() as f64, g2.n() as f64);
    let (m1, m2) = (mean(&g1.values), mean(&g2.values));
    let (q1, q2) = (variance(&g1.values, m1) / n1, variance(&g2.values, m2) / n2);
    let se2 = q1 + q2;
    if se2 <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (m1 - m2) / libm::sqrt(se2);
    let df = se2 * se2 / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
    Ok(TestResult {
        method: Method::TTest,
        statistic: t,
        p_value: student_t_two_sided(t, df),
        df: Some(df),
        u: None,
        normality: [None, None],
        group_summaries: [Summary::of(&g1.values), Summary::of(&g2.values)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn identical_groups() {
        let g = GroupSample::new("a", [1.0, 4.0, 2.0, 8.0]);
        let r = welch_t_test(&g, &g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn affine_invariance() {
        let a = [3.1, 4.7, 2.2, 5.0, 3.9, 4.4];
        let b: Vec<f64> = a.iter().map(|v| v + 1.3).collect();
        let r = welch_t_test(&GroupSample::new("a", a), &GroupSample::new("b", b.clone())).unwrap();
        let fa: Vec<f64> = a.iter().map(|v| 2.5 * v - 4.0).collect();
        let fb: Vec<f64> = b.iter().map(|v| 2.5 * v - 4.0).collect();
        let s = welch_t_test(&GroupSample::new("a", fa), &GroupSample::new("b", fb)).unwrap();
        assert!((r.statistic - s.statistic).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let one = GroupSample::new("a", [1.0]);
        let two = GroupSample::new("b", [1.0, 2.0]);
        assert!(matches!(welch_t_test(&one, &two), Err(StatsError::TooFewValues { .. })));
        let flat = GroupSample::new("c", [2.0, 2.0]);
        assert_eq!(welch_t_test(&flat, &flat), Err(StatsError::ZeroVariance));
    }
}
