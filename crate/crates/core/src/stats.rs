//! Significance tests, correlations and multiple-comparison control.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::parallel;

/// Spearman p-values are exact (full enumeration) up to this many points.
pub const SPEARMAN_EXACT_MAX_N: usize = 10;

/// Resamples per block in the permutation test. Each block draws from its
/// own ChaCha stream, so the partition into blocks, not the worker count,
/// fixes the result.
pub const PERMUTATION_BLOCK: usize = 1000;

pub const MIN_RESAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: zero variance")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Permutation,
    Welch,
    SpearmanExact,
    SpearmanTApprox,
    Pearson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub n: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resamples: Option<usize>,
}

/// Family-wise threshold for `m` simultaneous tests.
pub fn bonferroni(alpha: f64, m: usize) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    assert!(m >= 1, "at least one test");
    alpha / m as f64
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Product-moment correlation; `None` when either side has zero variance
/// or the lengths differ or are below 2.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a correlation coefficient via Student's t with
/// `n - 2` degrees of freedom.
fn correlation_t_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / ((1.0 - r) * (1.0 + r))).sqrt();
    two_sided_t(t, df)
}

fn two_sided_t(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

fn check_paired(x: &[f64], y: &[f64], min: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidInput(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < min {
        return Err(StatsError::InvalidInput(format!("need at least {min} pairs, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    Ok(())
}

/// Pearson correlation with a two-sided t-test p-value. `statistic` is r;
/// R² is `r * r`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check_paired(x, y, 3)?;
    let r = pearson_r(x, y).ok_or(StatsError::Degenerate)?;
    Ok(TestResult {
        statistic: r,
        p_value: correlation_t_p(r, x.len()),
        method: Method::Pearson,
        n: vec![x.len()],
        seed: None,
        resamples: None,
    })
}

/// Ranks starting at 1, ties receiving the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation. Exact two-sided permutation p-value for
/// `n <= 10`, t-approximation beyond.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    check_paired(x, y, 3)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson_r(&rx, &ry).ok_or(StatsError::Degenerate)?;
    let n = x.len();
    let (p_value, method) = if n <= SPEARMAN_EXACT_MAX_N {
        (spearman_exact_p(&rx, &ry), Method::SpearmanExact)
    } else {
        (correlation_t_p(rho, n), Method::SpearmanTApprox)
    };
    Ok(TestResult {
        statistic: rho,
        p_value,
        method,
        n: vec![n],
        seed: None,
        resamples: None,
    })
}

/// Fraction of all `n!` pairings whose |rank covariance| reaches the
/// observed one. Doubled, centered ranks are integers, so the comparison
/// is exact.
fn spearman_exact_p(rx: &[f64], ry: &[f64]) -> f64 {
    let n = rx.len();
    let center = (n + 1) as i64;
    let a: Vec<i64> = rx.iter().map(|r| (2.0 * r) as i64 - center).collect();
    let mut b: Vec<i64> = ry.iter().map(|r| (2.0 * r) as i64 - center).collect();
    let dot = |b: &[i64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
    let observed = dot(&b).abs();

    // Heap's algorithm, iterative.
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut c = vec![0usize; n];
    let mut visit = |b: &[i64]| {
        total += 1;
        if dot(b).abs() >= observed {
            hits += 1;
        }
    };
    visit(&b);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                b.swap(0, i);
            } else {
                b.swap(c[i], i);
            }
            visit(&b);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

#[derive(Debug, Clone, Copy)]
pub struct PermutationConfig {
    pub resamples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            resamples: 10_000,
            seed: 42,
            workers: 1,
        }
    }
}

/// Two-sided permutation test for a difference of means.
///
/// `p = (1 + #{|Δ_perm| >= |Δ_obs|}) / (1 + resamples)`. The pooled data
/// are put in a canonical order and the smaller group is always the one
/// drawn, so swapping `a` and `b` gives the identical p-value.
pub fn permutation_test(a: &[f64], b: &[f64], config: &PermutationConfig) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::InvalidInput("each group needs at least 2 values".into()));
    }
    if config.resamples < MIN_RESAMPLES {
        return Err(StatsError::InvalidInput(format!("at least {MIN_RESAMPLES} resamples required")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value".into()));
    }
    let observed = mean(a) - mean(b);
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let result = |p_value| TestResult {
        statistic: observed,
        p_value,
        method: Method::Permutation,
        n: vec![a.len(), b.len()],
        seed: Some(config.seed),
        resamples: Some(config.resamples),
    };
    if pooled.first() == pooled.last() {
        return Ok(result(1.0));
    }

    let n = pooled.len();
    let k = a.len().min(b.len());
    let total: f64 = pooled.iter().sum();
    let threshold = observed.abs() * (1.0 - 1e-12);
    let blocks = config.resamples.div_ceil(PERMUTATION_BLOCK);
    let pooled = &pooled;
    let counts = parallel::map_indices(blocks, config.workers, |block| {
        let draws = PERMUTATION_BLOCK.min(config.resamples - block * PERMUTATION_BLOCK);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(block as u64);
        let mut work = pooled.clone();
        let mut hits = 0u64;
        for _ in 0..draws {
            let mut drawn = 0.0;
            for i in 0..k {
                let j = rng.random_range(i..n);
                work.swap(i, j);
                drawn += work[i];
            }
            let diff = drawn / k as f64 - (total - drawn) / (n - k) as f64;
            if diff.abs() >= threshold {
                hits += 1;
            }
        }
        hits
    });
    let hits: u64 = counts.iter().sum();
    Ok(result((1 + hits) as f64 / (1 + config.resamples) as f64))
}

/// Welch's unequal-variance t-test of a sample against a reference
/// population given only by its mean, standard deviation and size.
pub fn welch_vs_summary(sample: &[f64], ref_mean: f64, ref_sd: f64, ref_n: u64) -> Result<TestResult, StatsError> {
    if sample.len() < 2 || ref_n < 2 {
        return Err(StatsError::InvalidInput("each side needs at least 2 observations".into()));
    }
    let n1 = sample.len() as f64;
    let n2 = ref_n as f64;
    let m1 = mean(sample);
    let v1 = sample.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n1 - 1.0);
    // reference sd is a population sd; convert to the unbiased estimate
    let v2 = ref_sd * ref_sd * n2 / (n2 - 1.0);
    let se2 = v1 / n1 + v2 / n2;
    let result = |statistic, p_value| TestResult {
        statistic,
        p_value,
        method: Method::Welch,
        n: vec![sample.len(), ref_n as usize],
        seed: None,
        resamples: None,
    };
    if se2 == 0.0 {
        let p = if m1 == ref_mean { 1.0 } else { 0.0 };
        return Ok(result(0.0, p));
    }
    let t = (m1 - ref_mean) / se2.sqrt();
    let df = se2 * se2 / ((v1 / n1).powi(2) / (n1 - 1.0) + (v2 / n2).powi(2) / (n2 - 1.0));
    Ok(result(t, two_sided_t(t, df)))
}
