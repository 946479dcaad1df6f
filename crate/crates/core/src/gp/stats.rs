//! Distribution tests used by the Monte-Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::GpError;

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution at `lambda`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test against `cdf`, with Stephens' small-sample correction.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, GpError> {
    if samples.is_empty() || samples.iter().any(|x| x.is_nan()) {
        return Err(GpError::InvalidInput("KS test needs non-NaN samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d),
    })
}

/// CDF of `scale · χ²₁`.
pub fn scaled_chi2_1_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ChiSquared::new(1.0).expect("one degree of freedom").cdf(x / scale)
}

fn ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

/// One-sided Wilcoxon rank-sum (Mann–Whitney) p-value for the alternative
/// that `higher` tends to exceed `lower`. Normal approximation with tie and
/// continuity corrections.
pub fn rank_sum_test(lower: &[f64], higher: &[f64]) -> Result<f64, GpError> {
    if lower.is_empty() || higher.is_empty() {
        return Err(GpError::InvalidInput("rank-sum test needs two non-empty samples".into()));
    }
    let (n1, n2) = (lower.len() as f64, higher.len() as f64);
    let all: Vec<f64> = lower.iter().chain(higher).copied().collect();
    let (r, ties) = ranks(&all);
    let r_high: f64 = r[lower.len()..].iter().sum();
    let u = r_high - n2 * (n2 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let n = n1 + n2;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = (u - mean - 0.5) / var.sqrt();
    Ok(0.5 * erfc(z / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_on_exact_quantiles() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.p_value > 0.99);
        let r = ks_test(&xs, |x| (x * x).clamp(0.0, 1.0)).unwrap();
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ≈ 0.049 and Q(1.63) ≈ 0.010 from the tabulated distribution.
        assert!((kolmogorov_survival(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_survival(1.63) - 0.0098).abs() < 1e-3);
    }

    #[test]
    fn chi2_cdf() {
        assert!((scaled_chi2_1_cdf(1.0, 1.0) - 0.682689492137).abs() < 1e-9);
        assert!((scaled_chi2_1_cdf(2.0, 2.0) - 0.682689492137).abs() < 1e-9);
        assert_eq!(scaled_chi2_1_cdf(-1.0, 1.0), 0.0);
    }

    #[test]
    fn rank_sum() {
        let a: Vec<f64> = (0..30).map(f64::from).collect();
        let b: Vec<f64> = (20..50).map(f64::from).collect();
        assert!(rank_sum_test(&a, &b).unwrap() < 1e-4);
        assert!(rank_sum_test(&b, &a).unwrap() > 0.99);
        let p = rank_sum_test(&a, &a).unwrap();
        assert!((p - 0.5).abs() < 0.05);
        // Classic example: U = 3 for the higher sample → one-sided p ≈ 0.0286 exact.
        let p = rank_sum_test(&[1.0, 2.0, 3.0, 5.0], &[4.0, 6.0, 7.0, 8.0]).unwrap();
        assert!(p < 0.05, "{p}");
    }
}
