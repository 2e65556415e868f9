//! Moments, Kolmogorov–Smirnov tests, binomial intervals and least squares.

use crate::error::{GafError, Result};
use crate::special::{normal_cdf, CompensatedSum};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Standard error of the sample variance, `sqrt((m₄ - σ⁴ (N-3)/(N-1)) / N)`.
    pub fn variance_se(&self) -> f64 {
        let n = self.count as f64;
        let m4 = (self.excess_kurtosis + 3.0) * self.variance * self.variance;
        ((m4 - self.variance * self.variance * (n - 3.0) / (n - 1.0)) / n)
            .max(0.0)
            .sqrt()
    }
}

/// Two-pass moments in input order.
pub fn moments(xs: &[f64]) -> Result<Moments> {
    if xs.len() < 2 {
        return Err(GafError::domain("moments need at least two values"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    let (mut m2, mut m3, mut m4) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for &x in xs {
        let d = x - mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    let (m2, m3, m4) = (m2.value() / n, m3.value() / n, m4.value() / n);
    Ok(Moments {
        count: xs.len(),
        mean,
        variance: m2 * n / (n - 1.0),
        skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
        excess_kurtosis: if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{j-1} e^{-2j²λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample test against a continuous CDF, p-value from the Kolmogorov law with
/// Stephens' finite-sample correction.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if xs.is_empty() {
        return Err(GafError::domain("KS test needs data"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let en = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * d),
    })
}

/// One-sample test against the standard normal.
pub fn ks_normal(xs: &[f64]) -> Result<KsResult> {
    ks_one_sample(xs, normal_cdf)
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(GafError::domain("KS test needs data"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((en + 0.12 + 0.11 / en) * d),
    })
}

/// Wilson score interval for `k` successes in `n` trials at two-sided level `1 - alpha`.
pub fn wilson_interval(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(GafError::domain(
            "least squares needs two or more paired points",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GafError::domain("least squares needs distinct x values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{aux_rng, std_normal, uniform};

    #[test]
    fn moments_of_a_small_set() {
        let m = moments(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
        // population excess kurtosis of 1..4 is 1.64 - 3
        assert!((m.excess_kurtosis + 1.36).abs() < 1e-12);
    }

    #[test]
    fn ks_null_calibration() {
        // p-values under the null are roughly uniform: about 1% fall below 0.01
        let mut rejections = 0;
        for rep in 0..400 {
            let mut rng = aux_rng(11, 1, rep);
            let xs: Vec<f64> = (0..1000).map(|_| std_normal(&mut rng)).collect();
            if ks_normal(&xs).unwrap().p_value < 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 12, "{rejections}");
    }

    #[test]
    fn ks_power_against_exponential() {
        let mut rng = aux_rng(12, 1, 0);
        let xs: Vec<f64> = (0..1000)
            .map(|_| -(1.0 - uniform(&mut rng)).ln() - 1.0)
            .collect();
        assert!(ks_normal(&xs).unwrap().p_value < 0.01);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // tabulated: Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 5e-4);
    }

    #[test]
    fn two_sample_detects_shift() {
        let mut rng = aux_rng(13, 1, 0);
        let a: Vec<f64> = (0..2000).map(|_| std_normal(&mut rng)).collect();
        let b: Vec<f64> = (0..2000).map(|_| std_normal(&mut rng)).collect();
        let c: Vec<f64> = b.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-6);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(30, 1000, 0.05);
        assert!(lo < 0.03 && 0.03 < hi);
        let (lo0, hi0) = wilson_interval(0, 1000, 0.05);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.005);
        // narrower with more trials
        let (lo2, hi2) = wilson_interval(300, 10000, 0.05);
        assert!(hi2 - lo2 < hi - lo);
    }

    #[test]
    fn exact_line() {
        let f = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-14);
        assert_eq!(f.r_squared, 1.0);
    }
}
