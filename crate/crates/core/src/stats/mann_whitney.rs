use alloc::vec;
use alloc::vec::Vec;

use super::dist::normal_sf;
use super::{GroupSample, Method, StatsError, Summary, TestResult, UStatistics};

/// Largest group size for which tie-free samples get an exact p-value.
pub const EXACT_MAX_N: usize = 8;

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// `(U1, U2)` from mid-ranks of the pooled sample; `U1 + U2 = n1 * n2`.
pub fn u_statistics(x: &[f64], y: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = mid_ranks(&pooled);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let r1: f64 = ranks[..x.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    (u1, n1 * n2 - u1)
}

/// Mann-Whitney U test, two-sided, reporting U of the first group.
///
/// Tie-free samples with both sizes at most [`EXACT_MAX_N`] get the exact
/// null distribution. Everything else uses the normal approximation with a
/// tie-corrected variance and a continuity correction of 0.5.
pub fn mann_whitney_u(g1: &GroupSample, g2: &GroupSample) -> Result<TestResult, StatsError> {
    for g in [g1, g2] {
        if g.n() == 0 {
            return Err(StatsError::TooFewValues { needed: 1, found: 0 });
        }
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let (n1, n2) = (g1.n(), g2.n());
    let (u1, u2) = u_statistics(&g1.values, &g2.values);
    let tie_sum = tie_term(g1.values.iter().chain(&g2.values).copied().collect());
    let exact = tie_sum == 0.0 && n1 <= EXACT_MAX_N && n2 <= EXACT_MAX_N;
    let p_value = if exact {
        // no ties: U1 is an integer
        exact_p(u1 as usize, n1, n2)
    } else {
        approx_p(u1, n1, n2, tie_sum)
    };
    Ok(TestResult {
        method: Method::MannWhitney,
        statistic: u1,
        p_value,
        df: None,
        u: Some(UStatistics { u1, u2, exact }),
        normality: [None, None],
        group_summaries: [Summary::of(&g1.values), Summary::of(&g2.values)],
    })
}

/// Normal-approximation two-sided p for a reported U with no ties.
pub fn mann_whitney_p_from_u(u: f64, n1: usize, n2: usize) -> f64 {
    approx_p(u, n1, n2, 0.0)
}

/// `sum(t^3 - t)` over tie groups.
fn tie_term(mut pooled: Vec<f64>) -> f64 {
    pooled.sort_by(f64::total_cmp);
    let mut sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let j = i + pooled[i..].iter().take_while(|&&v| v == pooled[i]).count();
        let t = (j - i) as f64;
        sum += t * t * t - t;
        i = j;
    }
    sum
}

fn approx_p(u: f64, n1: usize, n2: usize, tie_sum: f64) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    let n = a + b;
    let mu = a * b / 2.0;
    let var = if n > 1.0 { a * b / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0))) } else { 0.0 };
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / libm::sqrt(var);
    (2.0 * normal_sf(z)).min(1.0)
}

/// Counts of each U value over all `C(n1 + n2, n1)` rank labelings.
fn u_distribution(n1: usize, n2: usize) -> Vec<u64> {
    // row[j][u]: labelings of i first-group and j second-group items
    let mut prev: Vec<Vec<u64>> = (0..=n2).map(|_| vec![1]).collect();
    for i in 1..=n1 {
        let mut row: Vec<Vec<u64>> = Vec::with_capacity(n2 + 1);
        row.push(vec![1]);
        for j in 1..=n2 {
            let mut counts = vec![0u64; i * j + 1];
            // largest item from the first group: it beats all j others
            for (u, &c) in prev[j].iter().enumerate() {
                counts[u + j] += c;
            }
            // largest item from the second group
            for (u, &c) in row[j - 1].iter().enumerate() {
                counts[u] += c;
            }
            row.push(counts);
        }
        prev = row;
    }
    prev.swap_remove(n2)
}

fn exact_p(u1: usize, n1: usize, n2: usize) -> f64 {
    let dist = u_distribution(n1, n2);
    let total: u64 = dist.iter().sum();
    let lo: u64 = dist[..=u1].iter().sum();
    let hi: u64 = dist[u1..].iter().sum();
    (2 * lo.min(hi)).min(total) as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn identical_groups() {
        let g = GroupSample::new("a", [1.0, 2.0, 3.0]);
        let r = mann_whitney_u(&g, &g).unwrap();
        assert_eq!(r.statistic, 4.5);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.u.unwrap().exact);
    }

    #[test]
    fn separated_groups_exact() {
        let r = mann_whitney_u(&GroupSample::new("a", [1.0, 2.0, 3.0]), &GroupSample::new("b", [4.0, 5.0, 6.0])).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.u.unwrap().u2, 9.0);
        assert_eq!(r.p_value, 0.1);
    }

    #[test]
    fn distribution_is_symmetric_and_complete() {
        let d = u_distribution(4, 6);
        assert_eq!(d.len(), 25);
        assert_eq!(d.iter().sum::<u64>(), 210);
        assert!(d.iter().eq(d.iter().rev()));
    }
}
