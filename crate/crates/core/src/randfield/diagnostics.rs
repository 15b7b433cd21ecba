//! Monte Carlo estimates of second and fourth moments of the sampled fluctuation.

use serde::{Deserialize, Serialize};

use super::model::PotentialModel;
use super::sampler::FieldSampler;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::seed::realization_seed;

/// Base points per axis used when averaging lagged products.
const BASE_POINTS_PER_AXIS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    /// Node offset per axis.
    pub lag: Vec<isize>,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl MomentEstimate {
    /// `|value - expected| ≤ k·SE`, with an absolute floor for exact zeros.
    pub fn consistent_with(&self, expected: f64, k: f64) -> bool {
        (self.value - expected).abs() <= k * self.std_error + 1e-12
    }
}

impl CorrelationEstimate {
    pub fn consistent_with(&self, expected: f64, k: f64) -> bool {
        (self.value - expected).abs() <= k * self.std_error + 1e-12
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Interior base points `x₀` on a regular sub-lattice such that `x₀ + lag`
/// is also interior.
fn base_points(grid: &Grid, lag: &[isize]) -> Vec<(usize, usize)> {
    let dim = grid.dim();
    let n = grid.n() as isize;
    let m = grid.interior_per_axis();
    let step = (m / BASE_POINTS_PER_AXIS).max(1);
    (0..grid.interior_count())
        .filter_map(|i| {
            let node = grid.node_of(i);
            if (0..dim).any(|a| !(node[a] - 1).is_multiple_of(step)) {
                return None;
            }
            let mut shifted = [0usize; 3];
            for a in 0..dim {
                let s = node[a] as isize + lag[a];
                if s <= 0 || s >= n - 1 {
                    return None;
                }
                shifted[a] = s as usize;
            }
            grid.index_of(&shifted[..dim]).map(|j| (i, j))
        })
        .collect()
}

/// Estimates `E ν_ε(x₀ + lag) ν_ε(x₀)` for each lag. Each realization
/// contributes one spatial average over the base points, and standard
/// errors come from the spread of those averages.
pub fn empirical_correlation(
    model: &PotentialModel,
    grid: &Grid,
    epsilon: f64,
    lags: &[Vec<isize>],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<CorrelationEstimate>> {
    let sampler = FieldSampler::new(model, grid, epsilon)?;
    lagged_products(grid, lags, n_samples, |k| {
        sampler.sample(realization_seed(seed, k)).nu_eps()
    })
}

/// As [`empirical_correlation`], for the Gaussian field `𝔤(x/ε)` beneath a
/// long-range model; compare with `R_𝔤(lag·h/ε)`.
pub fn empirical_gaussian_correlation(
    model: &PotentialModel,
    grid: &Grid,
    epsilon: f64,
    lags: &[Vec<isize>],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<CorrelationEstimate>> {
    if !model.is_long_range() {
        return Err(Error::Unsupported("only long-range models have a Gaussian field".into()));
    }
    let sampler = FieldSampler::new(model, grid, epsilon)?;
    lagged_products(grid, lags, n_samples, |k| sampler.gaussian(realization_seed(seed, k)))
}

fn lagged_products(
    grid: &Grid,
    lags: &[Vec<isize>],
    n_samples: usize,
    draw: impl Fn(u64) -> GridFunction,
) -> Result<Vec<CorrelationEstimate>> {
    if n_samples < 2 {
        return Err(Error::InsufficientData(format!("n_samples must be at least 2, got {n_samples}")));
    }
    let mut pairs = Vec::with_capacity(lags.len());
    for lag in lags {
        if lag.len() != grid.dim() {
            return Err(Error::Config(format!("lag {lag:?} has the wrong dimension")));
        }
        let p = base_points(grid, lag);
        if p.is_empty() {
            return Err(Error::Config(format!("lag {lag:?} leaves the grid")));
        }
        pairs.push(p);
    }
    let mut per_sample = vec![Vec::with_capacity(n_samples); lags.len()];
    for k in 0..n_samples {
        let field = draw(k as u64);
        let v = field.values();
        for (acc, p) in per_sample.iter_mut().zip(&pairs) {
            let s: f64 = p.iter().map(|&(i, j)| v[i] * v[j]).sum();
            acc.push(s / p.len() as f64);
        }
    }
    Ok(lags
        .iter()
        .zip(&per_sample)
        .map(|(lag, xs)| {
            let (value, std_error) = mean_and_se(xs);
            CorrelationEstimate {
                lag: lag.clone(),
                value,
                std_error,
            }
        })
        .collect())
}

/// Estimates `Ψ_ν(x,y,t,s) = E ν(x)ν(y)ν(t)ν(s) - E[ν(x)ν(y)] E[ν(t)ν(s)]`
/// at four interior indices (repeats allowed). The standard error uses the
/// delta method on the three sample means.
pub fn empirical_fourth_moment(
    model: &PotentialModel,
    grid: &Grid,
    epsilon: f64,
    quadruple: [usize; 4],
    n_samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if n_samples < 2 {
        return Err(Error::InsufficientData(format!("n_samples must be at least 2, got {n_samples}")));
    }
    if let Some(&bad) = quadruple.iter().find(|&&i| i >= grid.interior_count()) {
        return Err(Error::Config(format!("interior index {bad} is outside the grid")));
    }
    let sampler = FieldSampler::new(model, grid, epsilon)?;
    let [x, y, t, s] = quadruple;
    let mut a = Vec::with_capacity(n_samples);
    let mut b = Vec::with_capacity(n_samples);
    let mut c = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let nu = sampler.sample(realization_seed(seed, k as u64)).nu_eps();
        let v = nu.values();
        a.push(v[x] * v[y] * v[t] * v[s]);
        b.push(v[x] * v[y]);
        c.push(v[t] * v[s]);
    }
    let n = n_samples as f64;
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / n;
    let (ma, mb, mc) = (mean(&a), mean(&b), mean(&c));
    let influence: Vec<f64> = (0..n_samples)
        .map(|i| a[i] - mc * b[i] - mb * c[i])
        .collect();
    let (_, se) = mean_and_se(&influence);
    Ok(MomentEstimate {
        value: ma - mb * mc,
        std_error: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield::model::build_short_range;

    #[test]
    fn too_few_samples() {
        let grid = Grid::new(2, 33).unwrap();
        let m = build_short_range(1.0, 0.5).unwrap();
        assert!(empirical_correlation(&m, &grid, 0.25, &[vec![0, 0]], 1, 0).is_err());
        assert!(empirical_fourth_moment(&m, &grid, 0.25, [0, 0, 0, 0], 1, 0).is_err());
    }

    #[test]
    fn lag_outside_grid() {
        let grid = Grid::new(2, 33).unwrap();
        let m = build_short_range(1.0, 0.5).unwrap();
        let err = empirical_correlation(&m, &grid, 0.25, &[vec![40, 0]], 10, 0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn repeated_point_fourth_moment_of_coins_vanishes() {
        let grid = Grid::new(2, 33).unwrap();
        let m = build_short_range(1.0, 0.5).unwrap();
        let est = empirical_fourth_moment(&m, &grid, 0.25, [100, 100, 100, 100], 50, 2).unwrap();
        assert!(est.consistent_with(0.0, 3.0));
    }
}
