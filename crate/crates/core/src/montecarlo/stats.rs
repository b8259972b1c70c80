//! Sample estimators, jackknife standard errors and Kolmogorov distances.

use crate::mp_law::LimitingCdf;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::io::Write;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (divisor `R − 1`).
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

fn central_moment(x: &[f64], m: f64, p: i32) -> f64 {
    x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / x.len() as f64
}

/// `m₃ / m₂^{3/2}`; zero for a degenerate sample.
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let m2 = central_moment(x, m, 2);
    if m2 == 0.0 {
        return 0.0;
    }
    central_moment(x, m, 3) / m2.powf(1.5)
}

/// `m₄ / m₂² − 3`; zero for a degenerate sample.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let m2 = central_moment(x, m, 2);
    if m2 == 0.0 {
        return 0.0;
    }
    central_moment(x, m, 4) / (m2 * m2) - 3.0
}

fn jackknife_se(leave_out: &[f64]) -> f64 {
    let g = leave_out.len() as f64;
    let m = mean(leave_out);
    ((g - 1.0) / g * leave_out.iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sqrt()
}

/// Delete-one jackknife standard error of the sample variance, in O(R).
pub fn variance_jackknife_se(x: &[f64]) -> f64 {
    let r = x.len();
    if r < 3 {
        return f64::NAN;
    }
    let rf = r as f64;
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let leave_out: Vec<f64> = x.iter().map(|v| (ss - (v - m) * (v - m) * rf / (rf - 1.0)) / (rf - 2.0)).collect();
    jackknife_se(&leave_out)
}

/// Sample covariance `Σ (x − x̄)(y − ȳ) / (R − 1)` without conjugation.
pub fn complex_covariance(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let r = x.len() as f64;
    let mx = x.iter().sum::<Complex64>() / r;
    let my = y.iter().sum::<Complex64>() / r;
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<Complex64>() / (r - 1.0)
}

/// Delete-one jackknife standard errors of [`complex_covariance`] for the real
/// part, imaginary part and modulus.
pub fn complex_covariance_se(x: &[Complex64], y: &[Complex64]) -> (f64, f64, f64) {
    let r = x.len();
    if r < 3 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let rf = r as f64;
    let mx = x.iter().sum::<Complex64>() / rf;
    let my = y.iter().sum::<Complex64>() / rf;
    let s: Complex64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let leave: Vec<Complex64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (s - (a - mx) * (b - my) * rf / (rf - 1.0)) / (rf - 2.0))
        .collect();
    let re: Vec<f64> = leave.iter().map(|v| v.re).collect();
    let im: Vec<f64> = leave.iter().map(|v| v.im).collect();
    let modulus: Vec<f64> = leave.iter().map(|v| v.norm()).collect();
    (jackknife_se(&re), jackknife_se(&im), jackknife_se(&modulus))
}

/// `E|ξ − Eξ|²` estimate with divisor `R − 1` and its delete-one jackknife SE.
pub fn complex_variance(x: &[Complex64]) -> (f64, f64) {
    let r = x.len();
    if r < 3 {
        return (f64::NAN, f64::NAN);
    }
    let rf = r as f64;
    let m = x.iter().sum::<Complex64>() / rf;
    let dev: Vec<f64> = x.iter().map(|v| (v - m).norm_sqr()).collect();
    let ss: f64 = dev.iter().sum();
    let leave: Vec<f64> = dev.iter().map(|d| (ss - d * rf / (rf - 1.0)) / (rf - 2.0)).collect();
    (ss / (rf - 1.0), jackknife_se(&leave))
}

/// Mean and block-jackknife standard error with `blocks` contiguous blocks.
pub fn block_jackknife_mean(x: &[f64], blocks: usize) -> (f64, f64) {
    let r = x.len();
    let g = blocks.clamp(2, r.max(2));
    if r < 2 {
        return (mean(x), f64::NAN);
    }
    let total: f64 = x.iter().sum();
    let mut leave = Vec::with_capacity(g);
    for b in 0..g {
        let (start, end) = (b * r / g, (b + 1) * r / g);
        let block: f64 = x[start..end].iter().sum();
        leave.push((total - block) / (r - (end - start)) as f64);
    }
    (total / r as f64, jackknife_se(&leave))
}

/// A distribution function with left limits, for Kolmogorov distances against
/// laws with atoms.
pub trait ReferenceCdf {
    fn cdf(&self, x: f64) -> f64;
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

impl ReferenceCdf for LimitingCdf {
    fn cdf(&self, x: f64) -> f64 {
        LimitingCdf::cdf(self, x)
    }
    fn cdf_left(&self, x: f64) -> f64 {
        LimitingCdf::cdf_left(self, x)
    }
}

/// A continuous distribution function given as a closure.
pub struct FnCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> ReferenceCdf for FnCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// `N(mean, sd²)`; a point mass when `sd = 0`.
#[derive(Debug, Clone, Copy)]
pub struct NormalCdf {
    pub mean: f64,
    pub sd: f64,
}

impl ReferenceCdf for NormalCdf {
    fn cdf(&self, x: f64) -> f64 {
        if self.sd > 0.0 {
            Normal::new(self.mean, self.sd).map(|d| d.cdf(x)).unwrap_or(f64::NAN)
        } else if x >= self.mean {
            1.0
        } else {
            0.0
        }
    }
    fn cdf_left(&self, x: f64) -> f64 {
        if self.sd > 0.0 {
            self.cdf(x)
        } else if x > self.mean {
            1.0
        } else {
            0.0
        }
    }
}

/// `sup_x |F_R(x) − F(x)|` for the empirical distribution of `samples`.
/// Both one-sided limits are compared at every sample value, which also
/// catches jumps of the reference.
pub fn ks_statistic<C: ReferenceCdf + ?Sized>(samples: &[f64], reference: &C) -> f64 {
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / r;
        let upto = j as f64 / r;
        d = d.max((below - reference.cdf_left(v)).abs()).max((upto - reference.cdf(v)).abs());
        i = j;
    }
    d
}

/// Bin of a histogram over `[bin_left, bin_right)`; the last bin is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
}

/// Equal-width histogram over the sample range.
pub fn histogram(samples: &[f64], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return Vec::new();
    }
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &s in samples {
        let k = (((s - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            bin_left: lo + k as f64 * width,
            bin_right: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count,
        })
        .collect()
}

/// CSV with header `bin_left,bin_right,count`.
pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], mut w: W) -> std::io::Result<()> {
    writeln!(w, "bin_left,bin_right,count")?;
    for b in bins {
        writeln!(w, "{:e},{:e},{}", b.bin_left, b.bin_right, b.count)?;
    }
    Ok(())
}
