//! Slope fitting and normality statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Ordinary least squares of `log y` on `log x`; returns `(slope, intercept)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "log-log fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InsufficientData(format!("log-log fit needs positive data, got {p:?}")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("log-log fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Percentile bootstrap interval for the log-log slope.
///
/// `samples[e][k]` is realization `k` at abscissa `xs[e]`; realizations are
/// resampled jointly across abscissae.
pub fn bootstrap_slope_ci(
    xs: &[f64],
    samples: &[Vec<f64>],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = samples.first().map_or(0, Vec::len);
    if n == 0 || samples.iter().any(|s| s.len() != n) {
        return Err(Error::InsufficientData("bootstrap needs equally sized, nonempty samples".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut idx = vec![0usize; n];
    for _ in 0..resamples {
        for i in idx.iter_mut() {
            *i = rng.random_range(0..n);
        }
        let points: Vec<(f64, f64)> = xs
            .iter()
            .zip(samples)
            .map(|(&x, s)| (x, idx.iter().map(|&i| s[i]).sum::<f64>() / n as f64))
            .collect();
        if let Ok((slope, _)) = fit_loglog_slope(&points) {
            slopes.push(slope);
        }
    }
    if slopes.is_empty() {
        return Err(Error::Degenerate("no bootstrap resample admitted a fit".into()));
    }
    slopes.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (slopes.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        slopes[lo] + (slopes[hi] - slopes[lo]) * (pos - lo as f64)
    };
    let tail = 0.5 * (1.0 - level);
    Ok((q(tail), q(1.0 - tail)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov–Smirnov distance of `x / sqrt(reference_variance)` to `N(0,1)`.
    pub ks_statistic: f64,
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Sample moments (population-normalized skewness and kurtosis) and the KS
/// distance against `N(0, reference_variance)`.
pub fn normality_stats(samples: &[f64], reference_variance: f64) -> Result<NormalityStats> {
    if samples.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "normality statistics need at least 8 samples, got {}",
            samples.len()
        )));
    }
    if !(reference_variance > 0.0) {
        return Err(Error::Degenerate(format!(
            "reference variance must be positive, got {reference_variance}"
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if !(m2 > 0.0) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    let m3 = samples.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;

    let scale = reference_variance.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| x / scale).collect();
    z.sort_by(f64::total_cmp);
    let ks_statistic = z
        .iter()
        .enumerate()
        .map(|(i, &zi)| {
            let f = standard_normal_cdf(zi);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(NormalityStats {
        mean,
        variance: m2 * n / (n - 1.0),
        skewness,
        excess_kurtosis,
        ks_statistic,
    })
}
