//! Mann–Whitney U and two-proportion z tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction of the alternative hypothesis, stated for sample `a` relative
/// to sample `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `a` tends to be smaller than `b`.
    Less,
    /// `a` tends to be larger than `b`.
    Greater,
}

/// How the Mann–Whitney p-value is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    /// Exact below 8 observations in either sample, normal above.
    #[default]
    Auto,
    /// Permutation distribution of the observed midranks.
    Exact,
    /// Normal approximation with tie-corrected variance and a 0.5
    /// continuity correction.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    MannWhitneyU,
    TwoProportionZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    /// `U` for sample `a`, or `z`.
    pub statistic: f64,
    pub p_value: f64,
    pub alternative: Alternative,
    /// `exact` or `normal`.
    pub method: String,
}

/// Below this many observations in either sample `Auto` uses the exact
/// distribution.
pub const EXACT_THRESHOLD: usize = 8;

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn combine(alternative: Alternative, p_less: f64, p_greater: f64) -> f64 {
    let p = match alternative {
        Alternative::Less => p_less,
        Alternative::Greater => p_greater,
        Alternative::TwoSided => 2.0 * p_less.min(p_greater),
    };
    p.clamp(0.0, 1.0)
}

/// Midranks (1-based) of `values`, plus the tie groups' sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn check_sample(x: &[f64], name: &str) -> Result<()> {
    if x.is_empty() {
        return Err(Error::contract(format!("sample {name} is empty")));
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::contract(format!("sample {name} contains NaN")));
    }
    Ok(())
}

pub fn mann_whitney_u(a: &[f64], b: &[f64], alternative: Alternative) -> Result<TestResult> {
    mann_whitney_u_with(a, b, alternative, PValueMethod::Auto)
}

/// Mann–Whitney U test of `a` against `b`. The statistic is
/// `U_a = R_a − n_a(n_a+1)/2`, the number of pairs with `a > b` counting
/// ties as one half.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], alternative: Alternative, method: PValueMethod) -> Result<TestResult> {
    check_sample(a, "a")?;
    check_sample(b, "b")?;
    let (na, nb) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    let exact = match method {
        PValueMethod::Auto => na < EXACT_THRESHOLD || nb < EXACT_THRESHOLD,
        PValueMethod::Exact => true,
        PValueMethod::Normal => false,
    };
    let (p_less, p_greater) = if exact {
        exact_tails(&ranks, na)
    } else {
        normal_tails(u, na, nb, &ties)
    };
    Ok(TestResult {
        test: TestKind::MannWhitneyU,
        statistic: u,
        p_value: combine(alternative, p_less, p_greater),
        alternative,
        method: if exact { "exact" } else { "normal" }.to_string(),
    })
}

fn normal_tails(u: f64, na: usize, nb: usize, ties: &[usize]) -> (f64, f64) {
    let (na, nb) = (na as f64, nb as f64);
    let n = na + nb;
    let mean = na * nb / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return (1.0, 1.0);
    }
    let sd = var.sqrt();
    let p_less = normal_cdf((u - mean + 0.5) / sd);
    let p_greater = normal_cdf(-(u - mean - 0.5) / sd);
    (p_less, p_greater)
}

/// Exact lower and upper tail probabilities of the rank sum of the first
/// `na` entries under every equally likely split of `ranks`. Doubled
/// midranks are integers, so sums are tallied exactly.
fn exact_tails(ranks: &[f64], na: usize) -> (f64, f64) {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..na].iter().sum();
    // Choose the smaller group to keep the table small; its sum mirrors.
    let n = ranks.len();
    let total: usize = doubled.iter().sum();
    let (k, flip) = if na <= n - na { (na, false) } else { (n - na, true) };
    let max_sum: usize = {
        let mut d = doubled.clone();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d[..k].iter().sum()
    };
    // ways[j][s]: weight of choosing j items with doubled sum s, rescaled
    // after each item to stay in range.
    let mut ways = vec![vec![0.0f64; max_sum + 1]; k + 1];
    ways[0][0] = 1.0;
    for &r in &doubled {
        for j in (1..=k).rev() {
            let (lo, hi) = ways.split_at_mut(j);
            let prev = &lo[j - 1];
            let cur = &mut hi[0];
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
        let peak = ways.iter().flatten().fold(0.0f64, |m, &w| m.max(w));
        if peak > 1e250 {
            for row in &mut ways {
                for w in row.iter_mut() {
                    *w /= peak;
                }
            }
        }
    }
    let dist = &ways[k];
    let denom: f64 = dist.iter().sum();
    // Probability that the `a` group's doubled sum is <= / >= the observed.
    let mut le = 0.0;
    let mut ge = 0.0;
    for (s, &w) in dist.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let a_sum = if flip { total - s } else { s };
        if a_sum <= observed {
            le += w;
        }
        if a_sum >= observed {
            ge += w;
        }
    }
    (le / denom, ge / denom)
}

/// Pooled two-proportion z test of `successes_a / n_a` against
/// `successes_b / n_b`. A pooled proportion of 0 or 1 gives `z = 0`, `p = 1`.
pub fn two_proportion_z(
    successes_a: u64,
    n_a: u64,
    successes_b: u64,
    n_b: u64,
    alternative: Alternative,
) -> Result<TestResult> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::contract("both groups need at least one observation"));
    }
    if successes_a > n_a || successes_b > n_b {
        return Err(Error::contract("successes exceed group size"));
    }
    let (pa, pb) = (successes_a as f64 / n_a as f64, successes_b as f64 / n_b as f64);
    let pooled = (successes_a + successes_b) as f64 / (n_a + n_b) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    let (z, p) = if se == 0.0 {
        (0.0, 1.0)
    } else {
        let z = (pa - pb) / se;
        let p_less = normal_cdf(z);
        (z, combine(alternative, p_less, normal_cdf(-z)))
    };
    Ok(TestResult {
        test: TestKind::TwoProportionZ,
        statistic: z,
        p_value: p,
        alternative,
        method: "normal".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over every subset of positions for the `a` group.
    fn enumerate_p(a: &[f64], b: &[f64]) -> (f64, f64) {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        let n = pooled.len();
        let u_of = |mask: u32| {
            let mut u = 0.0;
            for i in 0..n {
                if mask & (1 << i) == 0 {
                    continue;
                }
                for j in 0..n {
                    if mask & (1 << j) != 0 {
                        continue;
                    }
                    u += if pooled[i] > pooled[j] {
                        1.0
                    } else if pooled[i] == pooled[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            u
        };
        let observed = u_of((1u32 << a.len()) - 1);
        let (mut le, mut ge, mut total) = (0.0, 0.0, 0.0);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != a.len() {
                continue;
            }
            let u = u_of(mask);
            total += 1.0;
            if u <= observed + 1e-9 {
                le += 1.0;
            }
            if u >= observed - 1e-9 {
                ge += 1.0;
            }
        }
        (le / total, ge / total)
    }

    #[test]
    fn separated_samples_exact() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.method, "exact");
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let less = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Less).unwrap();
        assert!((less.p_value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_brute_force_with_ties() {
        let cases: [(&[f64], &[f64]); 4] = [
            (&[1.0, 2.0, 2.0, 5.0], &[2.0, 3.0, 3.0]),
            (&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0, 2.0, 2.0]),
            (&[3.0, 1.0, 4.0, 1.0, 5.0], &[9.0, 2.0, 6.0, 5.0, 3.0, 5.0]),
            (&[7.0], &[7.0, 7.0, 1.0]),
        ];
        for (a, b) in cases {
            let (le, ge) = enumerate_p(a, b);
            let less = mann_whitney_u_with(a, b, Alternative::Less, PValueMethod::Exact).unwrap();
            let greater = mann_whitney_u_with(a, b, Alternative::Greater, PValueMethod::Exact).unwrap();
            assert!((less.p_value - le).abs() < 1e-12, "{a:?} {b:?}");
            assert!((greater.p_value - ge).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn identical_samples() {
        let a: Vec<f64> = (0..20).map(|i| (i * 7 % 11) as f64).collect();
        let r = mann_whitney_u(&a, &a, Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 200.0);
        assert!(r.p_value > 0.99);
        let small = mann_whitney_u(&a[..4], &a[..4], Alternative::TwoSided).unwrap();
        assert_eq!(small.statistic, 8.0);
        assert_eq!(small.p_value, 1.0);
    }

    #[test]
    fn all_tied_normal_is_uninformative() {
        let r = mann_whitney_u(&[2.0; 10], &[2.0; 12], Alternative::Greater).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn shifted_samples_are_significant() {
        let a: Vec<f64> = (0..50).map(|i| 100.0 + i as f64).collect();
        let b: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let r = mann_whitney_u(&a, &b, Alternative::Greater).unwrap();
        assert_eq!(r.statistic, 2500.0);
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(mann_whitney_u(&[], &[1.0], Alternative::TwoSided).is_err());
    }

    #[test]
    fn published_proportions() {
        let r = two_proportion_z(65, 150, 48, 152, Alternative::TwoSided).unwrap();
        assert!((r.statistic.abs() - 2.11).abs() < 0.05, "{}", r.statistic);
        assert!((r.p_value - 0.035).abs() < 0.005, "{}", r.p_value);
    }

    #[test]
    fn degenerate_proportions() {
        let r = two_proportion_z(0, 10, 0, 20, Alternative::TwoSided).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = two_proportion_z(10, 10, 20, 20, Alternative::Greater).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = two_proportion_z(3, 10, 6, 20, Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(two_proportion_z(11, 10, 0, 5, Alternative::TwoSided).is_err());
        assert!(two_proportion_z(0, 0, 0, 5, Alternative::TwoSided).is_err());
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.0013498980316301).abs() < 1e-12);
    }
}
