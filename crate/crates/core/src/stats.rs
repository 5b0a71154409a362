//! Binomial and mean estimates, intervals and small regression helpers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Wald,
    #[default]
    Wilson,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    #[default]
    Proportion,
    /// Sample mean of a nonnegative quantity; `successes` is unused (0).
    Mean,
}

/// A Monte Carlo estimate. For proportions `point = successes / samples`
/// and `stderr = sqrt(p(1-p)/N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub samples: u64,
    pub point: f64,
    pub stderr: f64,
    pub ci_method: CiMethod,
    #[serde(default)]
    pub kind: EstimateKind,
}

impl Estimate {
    pub fn proportion(successes: u64, samples: u64) -> Self {
        assert!(successes <= samples, "successes exceed samples");
        let (point, stderr) = if samples == 0 {
            (0.0, 0.0)
        } else {
            let p = successes as f64 / samples as f64;
            (p, (p * (1.0 - p) / samples as f64).sqrt())
        };
        Estimate { successes, samples, point, stderr, ci_method: CiMethod::Wilson, kind: EstimateKind::Proportion }
    }

    /// A value known without sampling (e.g. `π(m, m) = 1`).
    pub fn exact(value: f64) -> Self {
        Estimate { successes: 0, samples: 0, point: value, stderr: 0.0, ci_method: CiMethod::Wald, kind: EstimateKind::Mean }
    }

    pub fn mean(samples: u64, point: f64, stderr: f64) -> Self {
        Estimate { successes: 0, samples, point, stderr, ci_method: CiMethod::Wald, kind: EstimateKind::Mean }
    }

    pub fn with_method(mut self, m: CiMethod) -> Self {
        self.ci_method = m;
        self
    }

    /// Two-sided interval at `z` standard deviations using `ci_method`.
    /// Means always use the normal interval.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        if self.kind == EstimateKind::Mean || self.samples == 0 {
            return (self.point - z * self.stderr, self.point + z * self.stderr);
        }
        match self.ci_method {
            CiMethod::Wald => {
                ((self.point - z * self.stderr).max(0.0), (self.point + z * self.stderr).min(1.0))
            }
            CiMethod::Wilson => wilson(self.successes, self.samples, z),
        }
    }
}

pub fn wilson(successes: u64, samples: u64, z: f64) -> (f64, f64) {
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Mean and standard error of big nonnegative integers, computed exactly
/// and rounded once at the end.
pub fn big_mean_stderr(values: &[BigUint]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut sum = BigUint::zero();
    let mut sumsq = BigUint::zero();
    for v in values {
        sum += v;
        sumsq += v * v;
    }
    let nn = BigInt::from(n);
    let mean = BigRational::new(BigInt::from(sum.clone()), nn.clone());
    let stderr = if n > 1 {
        // var = (N Σx² − (Σx)²) / (N (N−1)); stderr² = var / N
        let s = BigInt::from(sum);
        let num = &nn * BigInt::from(sumsq) - &s * &s;
        let den = &nn * &nn * (&nn - 1);
        BigRational::new(num, den).to_f64().unwrap_or(f64::INFINITY).max(0.0).sqrt()
    } else {
        0.0
    };
    (mean.to_f64().unwrap_or(f64::INFINITY), stderr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// OLS standard error of the slope (0 with fewer than 3 points).
    pub slope_stderr: f64,
}

/// Ordinary least squares `y = intercept + slope · x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit { slope, intercept, slope_stderr })
}

/// Nearest-rank quantile of sorted data.
pub fn quantile_sorted(sorted: &[u64], q: f64) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_basics() {
        let e = Estimate::proportion(30, 100);
        assert_eq!(e.point, 0.3);
        assert!((e.stderr - (0.21f64 / 100.0).sqrt()).abs() < 1e-15);
        let (lo, hi) = e.interval(1.96);
        assert!(lo < 0.3 && hi > 0.3);
        let e = Estimate::proportion(0, 50);
        assert_eq!(e.stderr, 0.0);
        let (lo, hi) = e.interval(3.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }

    #[test]
    fn big_mean_matches_float() {
        let xs: Vec<u64> = vec![1, 5, 7, 9, 12];
        let v: Vec<BigUint> = xs.iter().map(|&x| BigUint::from(x)).collect();
        let (m, se) = big_mean_stderr(&v);
        let mf = 34.0 / 5.0;
        let var: f64 = xs.iter().map(|&x| (x as f64 - mf).powi(2)).sum::<f64>() / 4.0;
        assert!((m - mf).abs() < 1e-12);
        assert!((se - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn quantiles() {
        let d = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
        assert_eq!(quantile_sorted(&d, 0.5), Some(5));
        assert_eq!(quantile_sorted(&d, 0.0), Some(1));
        assert_eq!(quantile_sorted(&d, 1.0), Some(10));
    }
}
