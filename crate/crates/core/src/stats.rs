//! Significance tests and correlations.
//!
//! All p-values are two-sided. The normal tail comes from Hart's double
//! precision rational approximation (as arranged by West, 2005) with a
//! continued fraction beyond |z| = 5√2; its absolute error on the two-sided
//! p-value stays below 1e-15 over |z| <= 8.

use serde::Serialize;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631;

/// Upper tail `P(Z > x)` of the standard normal.
pub fn normal_sf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_sf(-x);
    }
    if x > 37.0 {
        return 0.0;
    }
    let e = (-x * x / 2.0).exp();
    if x < 7.071_067_811_865_47 {
        let num = ((((((3.526_249_659_989_11e-2 * x + 0.700_383_064_443_688) * x + 6.373_962_203_531_65) * x
            + 33.912_866_078_383)
            * x
            + 112.079_291_497_871)
            * x
            + 221.213_596_169_931)
            * x
            + 220.206_867_912_376)
            * e;
        let den = ((((((8.838_834_764_831_84e-2 * x + 1.755_667_163_182_64) * x + 16.064_177_579_207) * x
            + 86.780_732_202_946_1)
            * x
            + 296.564_248_779_674)
            * x
            + 637.333_633_378_831)
            * x
            + 793.826_512_519_948)
            * x
            + 440.413_735_824_752;
        num / den
    } else {
        let mut b = x + 0.65;
        b = x + 4.0 / b;
        b = x + 3.0 / b;
        b = x + 2.0 / b;
        b = x + 1.0 / b;
        e / b / SQRT_2PI
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    normal_sf(-x)
}

/// Two-sided p-value of a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub significant_01: bool,
    pub significant_05: bool,
}

impl TestResult {
    pub fn from_z(z: f64) -> Self {
        let p_value = two_sided_p(z);
        TestResult { statistic: z, p_value, significant_01: p_value < 0.01, significant_05: p_value < 0.05 }
    }
}

/// Pooled two-proportion z-test of `x1/n1` against `x2/n2`.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument("proportion with zero trials".into()));
    }
    if x1 > n1 || x2 > n2 {
        return Err(Error::InvalidArgument("more successes than trials".into()));
    }
    let (x1, n1, x2, n2) = (x1 as f64, n1 as f64, x2 as f64, n2 as f64);
    let pooled = (x1 + x2) / (n1 + n2);
    if pooled == 0.0 || pooled == 1.0 {
        return Err(Error::DegeneratePooledProportion);
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    Ok(TestResult::from_z((x1 / n1 - x2 / n2) / se))
}

/// Outcome of testing a unit's share against its expected share, including
/// the integer trial counts the value totals were rounded to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationTest {
    pub test: TestResult,
    pub observed_successes: u64,
    pub observed_trials: u64,
    pub expected_successes: u64,
    pub expected_trials: u64,
}

impl ExpectationTest {
    pub fn above_expectation(&self) -> bool {
        self.test.statistic > 0.0
    }
}

/// Tests `unit_value / total_value` (rounded to whole trial counts) against
/// `unit_n / total_n`. Positive statistics mean above expectation.
pub fn expectation_test(unit_value: f64, unit_n: u64, total_value: f64, total_n: u64) -> Result<ExpectationTest> {
    if total_n == 0 || unit_n > total_n {
        return Err(Error::InvalidArgument(format!("unit of {unit_n} papers in a set of {total_n}")));
    }
    if !(unit_value >= 0.0 && unit_value <= total_value && total_value.is_finite()) {
        return Err(Error::InvalidArgument("unit value must lie in [0, total]".into()));
    }
    if unit_n == total_n {
        return Err(Error::InvalidArgument("unit equals the whole set; no complement to compare".into()));
    }
    let observed_successes = unit_value.round() as u64;
    let observed_trials = total_value.round() as u64;
    let test = two_proportion_z(observed_successes, observed_trials, unit_n, total_n)?;
    Ok(ExpectationTest {
        test,
        observed_successes,
        observed_trials,
        expected_successes: unit_n,
        expected_trials: total_n,
    })
}

/// Normal-approximation test of two means given their standard errors.
/// The statistic is `(mean2 - mean1) / sqrt(sem1^2 + sem2^2)`.
pub fn mean_diff_from_summary(mean1: f64, sem1: f64, mean2: f64, sem2: f64) -> Result<TestResult> {
    if !(sem1 >= 0.0 && sem2 >= 0.0) {
        return Err(Error::InvalidArgument("negative standard error".into()));
    }
    if sem1 == 0.0 && sem2 == 0.0 {
        return Err(Error::InvalidArgument("both standard errors are zero".into()));
    }
    Ok(TestResult::from_z((mean2 - mean1) / sem1.hypot(sem2)))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!("{} values, need at least 2", values.len())));
    }
    let m = mean(values);
    Ok((values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt())
}

/// Standard error of the mean.
pub fn sem(values: &[f64]) -> Result<f64> {
    Ok(sample_sd(values)? / (values.len() as f64).sqrt())
}

pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!("{} pairs, need at least 3", x.len())));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties averaged.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    pearson_r(&mid_ranks(x), &mid_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_proportion_examples() {
        let r = two_proportion_z(20, 100, 10, 100).unwrap();
        assert!((r.statistic - 1.980_295).abs() < 5e-6);
        assert!(r.significant_05 && !r.significant_01);
        let eq = two_proportion_z(30, 100, 30, 100).unwrap();
        assert_eq!(eq.statistic, 0.0);
        assert_eq!(eq.p_value, 1.0);
        assert!(matches!(two_proportion_z(100, 100, 100, 100), Err(Error::DegeneratePooledProportion)));
        assert!(matches!(two_proportion_z(0, 100, 0, 10), Err(Error::DegeneratePooledProportion)));
        // p-bar = 0.5 is fine
        assert!(two_proportion_z(100, 100, 0, 100).unwrap().statistic > 14.0);
        assert!(two_proportion_z(3, 2, 1, 2).is_err());
        assert!(two_proportion_z(0, 0, 1, 2).is_err());
    }

    #[test]
    fn expectation_examples() {
        let fair = expectation_test(250.0, 25, 1000.0, 100).unwrap();
        assert_eq!(fair.test.statistic, 0.0);

        // twice the expected share in a large set
        let high = expectation_test(200.0, 1000, 1000.0, 10_000).unwrap();
        assert!(high.above_expectation());
        assert!(high.test.significant_01);
        let (x1, n1) = (200.0f64, 1000.0f64);
        let (x2, n2) = (1000.0, 10_000.0);
        let p = (x1 + x2) / (n1 + n2);
        let z = (x1 / n1 - x2 / n2) / (p * (1.0 - p) * (1.0 / n1 + 1.0 / n2)).sqrt();
        assert!((high.test.statistic - z).abs() < 1e-12);

        assert!(expectation_test(1000.0, 100, 1000.0, 100).is_err());
        assert!(expectation_test(10.0, 1, 5.0, 10).is_err());

        let rounded = expectation_test(12.4, 3, 99.6, 30).unwrap();
        assert_eq!((rounded.observed_successes, rounded.observed_trials), (12, 100));
    }

    #[test]
    fn mean_difference_examples() {
        let r = mean_diff_from_summary(0.870, 0.061, 2.555, 0.321).unwrap();
        let hand = 1.685 / (0.061f64.powi(2) + 0.321f64.powi(2)).sqrt();
        assert!((r.statistic - hand).abs() < 1e-12);
        assert!((r.statistic - 5.157).abs() < 1e-3);
        assert!(r.p_value < 0.01);
        assert_eq!(mean_diff_from_summary(1.0, 0.2, 1.0, 0.3).unwrap().statistic, 0.0);
        let r = mean_diff_from_summary(0.0, 1.0, 1.96, 0.0).unwrap();
        assert_eq!(r.statistic, 1.96);
        assert!((r.p_value - 0.05).abs() < 1e-4);
        assert!(mean_diff_from_summary(0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sem_examples() {
        assert_eq!(sem(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        // sample sd sqrt(2), n = 2
        assert!((sem(&[0.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((sem(&[0.0, 1.0, 2.0]).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!(sem(&[1.0]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson_r(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance)));
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_examples() {
        let x = [0.5, 1.0, 4.0, 9.0, 30.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.ln() * 3.0 + v.powi(3)).collect();
        assert!((spearman_rho(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!((spearman_rho(&x, &rev).unwrap() + 1.0).abs() < 1e-12);
        assert!((spearman_rho(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(mid_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn normal_tail_reference_points() {
        // erfc(z / sqrt 2), 20 significant digits
        #[allow(clippy::excessive_precision)]
        let table = [
            (0.0, 1.0),
            (0.5, 0.617_075_077_451_973_8),
            (1.0, 0.317_310_507_862_914_1),
            (1.96, 0.049_995_790_296_440_872),
            (3.0, 0.002_699_796_063_260_189),
            (4.0, 6.334_248_366_623_984e-5),
            (6.0, 1.973_175_290_075_396_3e-9),
            (8.0, 1.244_192_114_854_356_8e-15),
        ];
        for (z, p) in table {
            assert!((two_sided_p(z) - p).abs() < 1e-15, "z={z}");
            assert!((two_sided_p(-z) - p).abs() < 1e-15, "z=-{z}");
        }
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert_eq!(normal_sf(40.0), 0.0);
    }
}
