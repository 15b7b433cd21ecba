//! Scaling, distribution and expansion-term studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Bands, Observable, StudyConfig};
use super::stats::{bootstrap_slope_ci, fit_loglog_slope, normality_stats, NormalityStats};
use crate::error::{Error, Result};
use crate::fluctuation::{expansion_terms_with, predicted_variance_long, predicted_variance_short};
use crate::grid::{Grid, GridFunction};
use crate::pde::{solve_homogenized_with, solve_semilinear_with, LinearizedOperator};
use crate::randfield::{FieldSample, FieldSampler, PotentialKind, PotentialModel};
use crate::seed::{realization_seed, substream};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;
pub const BOOTSTRAP_LEVEL: f64 = 0.95;
const BOOTSTRAP_TAG: u64 = 0xB007;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    /// Estimate of `E‖u^ε - u‖²_{L²}`.
    pub mean_sq_error: f64,
    pub std_error: f64,
    /// Estimate of `E‖u^ε - u‖_∞`.
    pub mean_linf: f64,
    /// `max_k ‖u^ε_k‖_∞`.
    pub max_solution_linf: f64,
    pub n_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub epsilon: f64,
    pub observable: Observable,
    /// Normalization exponent `β`; samples are `ε^{-β/2} ⟨φ, ·⟩`.
    pub beta: f64,
    pub samples: Vec<f64>,
    pub seeds: Vec<u64>,
    pub mean: f64,
    pub empirical_variance: f64,
    pub predicted_variance: f64,
    pub variance_ratio: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub ks_statistic_vs_normal: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub per_epsilon: Vec<EpsilonSummary>,
    /// `d` for short range, `α` for long range.
    pub expected_slope: f64,
    pub fitted_slope: Option<f64>,
    pub slope_ci: Option<(f64, f64)>,
    /// Fraction of realizations whose `‖u^ε - u‖_{L²}` strictly decreases
    /// along the ladder.
    pub monotone_fraction: Option<f64>,
    /// Set when `ν ≡ 0`, so that `u^ε = u` and no slope exists.
    pub degenerate: bool,
    pub distribution: Option<DistributionSummary>,
}

impl McSummary {
    /// Human-readable descriptions of every band the summary violates.
    pub fn band_failures(&self, bands: &Bands) -> Vec<String> {
        let mut out = Vec::new();
        if !self.per_epsilon.is_empty() && !self.degenerate {
            match self.fitted_slope {
                Some(s) if (s - self.expected_slope).abs() <= bands.slope => {}
                Some(s) => out.push(format!(
                    "fitted slope {s:.4} outside {} ± {}",
                    self.expected_slope, bands.slope
                )),
                None => out.push("no fitted slope".into()),
            }
        }
        if let Some(d) = &self.distribution {
            if d.degenerate {
                out.push("degenerate distribution".into());
                return out;
            }
            let mut check = |name: &str, value: Option<f64>, target: f64, band: f64| match value {
                Some(v) if (v - target).abs() < band => {}
                Some(v) => out.push(format!("{name} {v:.4} outside {target} ± {band}")),
                None => out.push(format!("{name} unavailable")),
            };
            check("variance_ratio", d.variance_ratio, 1.0, bands.variance_ratio);
            check("skewness", d.skewness, 0.0, bands.skewness);
            check("excess_kurtosis", d.excess_kurtosis, 0.0, bands.excess_kurtosis);
            check("ks_statistic", d.ks_statistic_vs_normal, 0.0, bands.ks);
        }
        out
    }
}

/// Per-realization scaling data behind a [`McSummary`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub summary: McSummary,
    /// `sq_errors[e][k] = ‖u^ε_k - u‖²_{L²}` at `epsilons[e]`.
    pub sq_errors: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
}

/// Mean norms of the expansion terms at one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermLevel {
    pub epsilon: f64,
    /// Mean `‖t_i‖_{L²}`, `i = 1..5`.
    pub mean_norms: [f64; 5],
    pub mean_xi: f64,
    /// Mean `‖t4‖_{L²} / ε^{d/2}`.
    pub scaled_t4: f64,
    /// Mean `‖t5‖_{L²} / ε^{d/2}`.
    pub scaled_t5: f64,
    pub max_identity_defect: f64,
    pub max_solution_linf: f64,
    pub n_realizations: usize,
}

/// Maps `f` over `0..count` on a pool of `threads` workers. Results come
/// back in index order and the first failure by index wins.
pub fn par_map<T, F>(threads: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let run = || (0..count).into_par_iter().map(&f).collect::<Vec<_>>();
    let results = if threads <= 1 {
        (0..count).map(&f).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("threads: {e}")))?
            .install(run)
    };
    results.into_iter().collect()
}

/// Draws realizations `0..n` of a sampler, batch by batch, and maps each
/// with `f`. Realization `k` uses the seed of batch `k / batch_size`, so
/// the same index sees the same randomness at every `ε`.
fn map_realizations<T, F>(cfg: &StudyConfig, sampler: &FieldSampler, f: F) -> Result<Vec<(u64, T)>>
where
    T: Send,
    F: Fn(&FieldSample) -> Result<T> + Sync + Send,
{
    let bs = sampler.batch_size();
    let n = cfg.n_realizations;
    let batches = par_map(cfg.threads, n.div_ceil(bs), |b| {
        let seed = realization_seed(cfg.base_seed, b as u64);
        let samples = sampler.sample_batch(seed);
        let take = bs.min(n - b * bs);
        samples
            .iter()
            .take(take)
            .map(|s| {
                f(s).map(|v| (seed, v)).map_err(|e| Error::Realization {
                    seed,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(batches.into_iter().flatten().collect())
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Setup {
    grid: Grid,
    model: PotentialModel,
    g: GridFunction,
    u: GridFunction,
}

fn setup(cfg: &StudyConfig) -> Result<Setup> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let model = cfg.potential()?;
    let g = cfg.g.build(&grid);
    let (u, _) = solve_homogenized_with(&grid, model.q_mean, &cfg.nonlinearity, &g, &cfg.solver_options())?;
    Ok(Setup { grid, model, g, u })
}

/// Error scaling of `u^ε - u` along the `ε` ladder.
pub fn run_scaling_study(cfg: &StudyConfig) -> Result<McSummary> {
    run_scaling_study_detailed(cfg).map(|r| r.summary)
}

pub fn run_scaling_study_detailed(cfg: &StudyConfig) -> Result<ScalingReport> {
    let s = setup(cfg)?;
    let opts = cfg.solver_options();
    let mut per_epsilon = Vec::with_capacity(cfg.epsilons.len());
    let mut sq_errors = Vec::with_capacity(cfg.epsilons.len());
    let mut seeds = Vec::new();
    for &eps in &cfg.epsilons {
        let sampler = FieldSampler::new(&s.model, &s.grid, eps)?;
        let rows = map_realizations(cfg, &sampler, |sample| {
            let (ue, _) = solve_semilinear_with(&s.grid, &sample.q_eps, &cfg.nonlinearity, &s.g, &opts)?;
            let xi = ue.sub(&s.u);
            Ok((xi.l2_norm().powi(2), xi.linf_norm(), ue.linf_norm()))
        })?;
        seeds = rows.iter().map(|r| r.0).collect();
        let sq: Vec<f64> = rows.iter().map(|r| r.1 .0).collect();
        let linf: Vec<f64> = rows.iter().map(|r| r.1 .1).collect();
        let (mean_sq_error, std_error) = mean_and_se(&sq);
        per_epsilon.push(EpsilonSummary {
            epsilon: eps,
            mean_sq_error,
            std_error,
            mean_linf: linf.iter().sum::<f64>() / linf.len() as f64,
            max_solution_linf: rows.iter().map(|r| r.1 .2).fold(0.0, f64::max),
            n_realizations: rows.len(),
        });
        sq_errors.push(sq);
    }

    let degenerate = matches!(s.model.kind, PotentialKind::Constant)
        || per_epsilon.iter().all(|p| p.mean_sq_error == 0.0);
    let (fitted_slope, slope_ci) = if degenerate || cfg.epsilons.len() < 3 {
        (None, None)
    } else {
        let points: Vec<(f64, f64)> = per_epsilon.iter().map(|p| (p.epsilon, p.mean_sq_error)).collect();
        let (slope, _) = fit_loglog_slope(&points)?;
        let ci = bootstrap_slope_ci(
            &cfg.epsilons,
            &sq_errors,
            BOOTSTRAP_RESAMPLES,
            BOOTSTRAP_LEVEL,
            substream(cfg.base_seed, BOOTSTRAP_TAG),
        )?;
        (Some(slope), Some(ci))
    };
    let monotone_fraction = (cfg.epsilons.len() >= 2 && !degenerate).then(|| {
        let n = cfg.n_realizations;
        let ok = (0..n)
            .filter(|&k| sq_errors.windows(2).all(|w| w[1][k] < w[0][k]))
            .count();
        ok as f64 / n as f64
    });
    Ok(ScalingReport {
        summary: McSummary {
            per_epsilon,
            expected_slope: s.model.scaling_exponent(cfg.dim),
            fitted_slope,
            slope_ci,
            monotone_fraction,
            degenerate,
            distribution: None,
        },
        sq_errors,
        seeds,
    })
}

/// Predicted limit variance of `ε^{-β/2} ⟨φ, u^ε - u⟩`; zero for `ν ≡ 0`.
pub fn predicted_variance(cfg: &StudyConfig, grid: &Grid, model: &PotentialModel, u: &GridFunction) -> Result<f64> {
    let phi = cfg.phi.build(grid);
    let fprime = u.map(|s| cfg.nonlinearity.df(s));
    match model.kind {
        PotentialKind::Constant => Ok(0.0),
        PotentialKind::ShortRange { .. } => {
            predicted_variance_short(grid, u, &phi, model.exact_sigma2()?, model.q_mean, &fprime)
                .map(|p| p.sigma2_phi)
        }
        PotentialKind::LongRange { alpha, .. } => {
            predicted_variance_long(grid, u, &phi, model.kappa()?, alpha, model.q_mean, &fprime)
                .map(|p| p.sigma2_phi)
        }
    }
}

/// Limiting law of `ε^{-β/2} ⟨φ, u^ε - u⟩` at the smallest `ε` of the ladder.
pub fn run_distribution_study(cfg: &StudyConfig) -> Result<McSummary> {
    let s = setup(cfg)?;
    let opts = cfg.solver_options();
    let eps = *cfg.epsilons.last().expect("validated ladder is nonempty");
    let beta = s.model.scaling_exponent(cfg.dim);
    let scale = eps.powf(-0.5 * beta);
    let phi = cfg.phi.build(&s.grid);
    // ⟨φ, -𝒢(νu)⟩ = -⟨𝒢φ, νu⟩ since 𝒢 is symmetric.
    let m = match cfg.observable {
        Observable::Leading => {
            Some(LinearizedOperator::around(&s.grid, s.model.q_mean, &cfg.nonlinearity, &s.u).solve(&phi)?)
        }
        Observable::Full => None,
    };
    let sampler = FieldSampler::new(&s.model, &s.grid, eps)?;
    let rows = map_realizations(cfg, &sampler, |sample| {
        let value = match &m {
            Some(m) => -m.inner(&sample.nu_eps().hadamard(&s.u)),
            None => {
                let (ue, _) = solve_semilinear_with(&s.grid, &sample.q_eps, &cfg.nonlinearity, &s.g, &opts)?;
                phi.inner(&ue.sub(&s.u))
            }
        };
        Ok(scale * value)
    })?;
    let seeds: Vec<u64> = rows.iter().map(|r| r.0).collect();
    let samples: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let predicted = predicted_variance(cfg, &s.grid, &s.model, &s.u)?;

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let empirical_variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stats: Option<NormalityStats> = if predicted > 0.0 {
        match normality_stats(&samples, predicted) {
            Ok(st) => Some(st),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let degenerate = stats.is_none();
    let distribution = DistributionSummary {
        epsilon: eps,
        observable: cfg.observable,
        beta,
        samples,
        seeds,
        mean,
        empirical_variance,
        predicted_variance: predicted,
        variance_ratio: (!degenerate).then(|| empirical_variance / predicted),
        skewness: stats.map(|st| st.skewness),
        excess_kurtosis: stats.map(|st| st.excess_kurtosis),
        ks_statistic_vs_normal: stats.map(|st| st.ks_statistic),
        degenerate,
    };
    Ok(McSummary {
        per_epsilon: Vec::new(),
        expected_slope: beta,
        fitted_slope: None,
        slope_ci: None,
        monotone_fraction: None,
        degenerate,
        distribution: Some(distribution),
    })
}

/// Mean norms of the five expansion terms along the ladder.
pub fn run_term_study(cfg: &StudyConfig) -> Result<Vec<TermLevel>> {
    let s = setup(cfg)?;
    let opts = cfg.solver_options();
    let op = LinearizedOperator::around(&s.grid, s.model.q_mean, &cfg.nonlinearity, &s.u);
    let half_d = 0.5 * cfg.dim as f64;
    cfg.epsilons
        .iter()
        .map(|&eps| {
            let sampler = FieldSampler::new(&s.model, &s.grid, eps)?;
            let rows = map_realizations(cfg, &sampler, |sample| {
                let (ue, _) = solve_semilinear_with(&s.grid, &sample.q_eps, &cfg.nonlinearity, &s.g, &opts)?;
                let t = expansion_terms_with(&op, &sample.nu_eps(), &cfg.nonlinearity, &ue, &s.u)?;
                let norms = [&t.t1, &t.t2, &t.t3, &t.t4, &t.t5].map(|v| v.l2_norm());
                Ok((norms, t.xi.l2_norm(), t.identity_defect(), ue.linf_norm()))
            })?;
            let count = rows.len() as f64;
            let mut mean_norms = [0.0; 5];
            for (_, (norms, ..)) in &rows {
                for (m, v) in mean_norms.iter_mut().zip(norms) {
                    *m += v / count;
                }
            }
            let scale = eps.powf(-half_d);
            Ok(TermLevel {
                epsilon: eps,
                mean_norms,
                mean_xi: rows.iter().map(|r| r.1 .1).sum::<f64>() / count,
                scaled_t4: mean_norms[3] * scale,
                scaled_t5: mean_norms[4] * scale,
                max_identity_defect: rows.iter().map(|r| r.1 .2).fold(0.0, f64::max),
                max_solution_linf: rows.iter().map(|r| r.1 .3).fold(0.0, f64::max),
                n_realizations: rows.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::config::ModelSpec;

    fn small(model: ModelSpec) -> StudyConfig {
        StudyConfig {
            n: 33,
            epsilons: vec![1.0, 0.5, 0.25],
            n_realizations: 8,
            model,
            ..StudyConfig::default()
        }
    }

    #[test]
    fn par_map_keeps_order_and_first_error() {
        let v = par_map(3, 20, |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..20).map(|i| i * i).collect::<Vec<_>>());
        let err = par_map(3, 20, |i| {
            if i % 7 == 5 {
                Err(Error::Degenerate(format!("{i}")))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "degenerate samples: 5");
    }

    #[test]
    fn zero_amplitude_is_degenerate() {
        let cfg = small(ModelSpec::ShortRange {
            q_mean: 5.0,
            amplitude: 0.0,
        });
        let s = run_scaling_study(&cfg).unwrap();
        assert!(s.degenerate);
        assert!(s.per_epsilon.iter().all(|p| p.mean_sq_error == 0.0));
        assert!(s.fitted_slope.is_none());
        let d = run_distribution_study(&cfg).unwrap().distribution.unwrap();
        assert!(d.degenerate);
        assert!(d.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scaling_summary_shape() {
        let s = run_scaling_study(&small(ModelSpec::default())).unwrap();
        assert_eq!(s.per_epsilon.len(), 3);
        assert!(s.per_epsilon.iter().all(|p| p.mean_sq_error > 0.0 && p.n_realizations == 8));
        let (lo, hi) = s.slope_ci.unwrap();
        assert!(lo <= hi);
        assert_eq!(s.expected_slope, 2.0);
    }

    #[test]
    fn long_range_batches_cover_every_realization() {
        let mut cfg = small(ModelSpec::LongRange {
            q_mean: 5.0,
            alpha: 1.0,
            phi_scale: 0.5,
        });
        cfg.n_realizations = 9;
        cfg.epsilons = vec![0.25];
        let d = run_distribution_study(&cfg).unwrap().distribution.unwrap();
        assert_eq!(d.samples.len(), 9);
        assert_eq!(d.seeds[0], d.seeds[1]);
        assert_ne!(d.samples[0], d.samples[1]);
        assert_ne!(d.seeds[1], d.seeds[2]);
    }
}
