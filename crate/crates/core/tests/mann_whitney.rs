//! Mann-Whitney U against enumeration and permutation oracles.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reeled_core::stats::{mann_whitney_u, GroupSample};

/// U of `x` by direct pair counting, ties scored one half.
fn pair_count_u(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .flat_map(|a| y.iter().map(move |b| if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 }))
        .sum()
}

/// Two-sided exact p by listing every split of the pooled sample.
fn enumeration_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let observed = pair_count_u(x, y);
    let (mut total, mut lo, mut hi) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != x.len() {
            continue;
        }
        let (a, b): (Vec<f64>, Vec<f64>) = {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (i, v) in pooled.iter().enumerate() {
                if mask >> i & 1 == 1 { a.push(*v) } else { b.push(*v) }
            }
            (a, b)
        };
        let u = pair_count_u(&a, &b);
        total += 1;
        lo += u64::from(u <= observed);
        hi += u64::from(u >= observed);
    }
    (2 * lo.min(hi)).min(total) as f64 / total as f64
}

fn distinct_sample(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pool: Vec<f64> = (0..n1 + n2).map(|i| i as f64 * 1.5 + rng.gen_range(0.0..1.0)).collect();
    pool.shuffle(rng);
    let y = pool.split_off(n1);
    (pool, y)
}

#[test]
fn exact_path_equals_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let n1 = rng.gen_range(1..=7);
        let n2 = rng.gen_range(1..=7);
        let (x, y) = distinct_sample(&mut rng, n1, n2);
        let r = mann_whitney_u(&GroupSample::new("x", x.clone()), &GroupSample::new("y", y.clone())).unwrap();
        assert!(r.u.unwrap().exact);
        assert_eq!(r.statistic, pair_count_u(&x, &y));
        assert_eq!(r.p_value, enumeration_p(&x, &y), "{x:?} {y:?}");
    }
}

#[test]
fn exact_path_reaches_size_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let (x, y) = distinct_sample(&mut rng, 8, 8);
        let r = mann_whitney_u(&GroupSample::new("x", x.clone()), &GroupSample::new("y", y.clone())).unwrap();
        assert!(r.u.unwrap().exact);
        assert_eq!(r.p_value, enumeration_p(&x, &y));
    }
}

/// Two-sided permutation p with the same extremeness rule as the normal
/// approximation: distance of U from its mean.
fn monte_carlo_p(x: &[f64], y: &[f64], draws: u32, rng: &mut ChaCha8Rng) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = reeled_core::stats::mid_ranks(&pooled);
    let (n1, n2) = (x.len(), y.len());
    let mu = (n1 * n2) as f64 / 2.0;
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let observed = (ranks[..n1].iter().sum::<f64>() - offset - mu).abs();
    let mut idx = ranks.clone();
    let mut hits = 0u32;
    for _ in 0..draws {
        let (head, _) = idx.partial_shuffle(rng, n1);
        let u = head.iter().sum::<f64>() - offset;
        if (u - mu).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    f64::from(hits) / f64::from(draws)
}

#[test]
fn approximation_tracks_a_million_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for shift in [0.0, 0.35, 0.7] {
        let x: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0) + shift).collect();
        let r = mann_whitney_u(&GroupSample::new("x", x.clone()), &GroupSample::new("y", y.clone())).unwrap();
        assert!(!r.u.unwrap().exact);
        let mc = monte_carlo_p(&x, &y, 1_000_000, &mut rng);
        assert!((r.p_value - mc).abs() < 0.01, "shift {shift}: {} vs {mc}", r.p_value);
    }
}

fn sample_with_ties() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(0u8..6, 1..25), prop::collection::vec(0u8..6, 1..25))
        .prop_map(|(a, b)| (a.into_iter().map(f64::from).collect(), b.into_iter().map(f64::from).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn u_statistics_sum_to_n1_n2((x, y) in sample_with_ties()) {
        let r = mann_whitney_u(&GroupSample::new("x", x.clone()), &GroupSample::new("y", y.clone())).unwrap();
        let u = r.u.unwrap();
        prop_assert_eq!(u.u1 + u.u2, (x.len() * y.len()) as f64);
        prop_assert_eq!(u.u1, pair_count_u(&x, &y));
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn increasing_transforms_change_nothing((x, y) in sample_with_ties(), k in 0.1f64..5.0) {
        let f = |v: &f64| (k * v).exp() - 3.0;
        let a = mann_whitney_u(&GroupSample::new("x", x.clone()), &GroupSample::new("y", y.clone())).unwrap();
        let b = mann_whitney_u(
            &GroupSample::new("x", x.iter().map(f).collect::<Vec<_>>()),
            &GroupSample::new("y", y.iter().map(f).collect::<Vec<_>>()),
        )
        .unwrap();
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert_eq!(a.p_value, b.p_value);
    }
}
