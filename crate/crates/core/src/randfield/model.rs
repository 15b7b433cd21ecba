use serde::{Deserialize, Serialize};

use super::hermite::{normal_expectation, hermite_coefficients};
use crate::error::{Error, Result};

/// Quadrature order for Hermite coefficients of `Φ`.
pub const HERMITE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `ν ≡ 0`; the potential is the constant `q̄`.
    Constant,
    /// Shifted checkerboard `ν(y) = b_{⌊y + U⌋}` with independent coins
    /// `b_k = ±a` and one uniform shift `U ∈ [0,1)^d`.
    ShortRange { amplitude: f64 },
    /// `ν = a_Φ tanh(𝔤)` with `𝔤` centered Gaussian,
    /// `R_𝔤(x) = (1 + |x|²)^{-α/2}`.
    LongRange {
        dim: usize,
        alpha: f64,
        kappa_g: f64,
        phi_scale: f64,
        /// `c₁ = E[𝔤 Φ(𝔤)]`.
        hermite_c1: f64,
    },
}

/// Stationary random potential `q(y, ω) = q̄ + ν(y, ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub q_mean: f64,
    /// Uniform bound `M ≥ 1` on `|q|`.
    pub bound: f64,
    pub kind: PotentialKind,
}

impl PotentialModel {
    pub fn constant(q_mean: f64) -> Self {
        Self {
            q_mean,
            bound: q_mean.abs().max(1.0),
            kind: PotentialKind::Constant,
        }
    }

    pub fn short_range(q_mean: f64, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "short-range amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self {
            q_mean,
            bound: (q_mean.abs() + amplitude).max(1.0),
            kind: PotentialKind::ShortRange { amplitude },
        })
    }

    pub fn long_range(q_mean: f64, alpha: f64, phi_scale: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(Error::Config(format!("alpha must lie in (0, {dim}), got {alpha}")));
        }
        if !(phi_scale > 0.0 && phi_scale.is_finite()) {
            return Err(Error::Config(format!("phi_scale must be positive, got {phi_scale}")));
        }
        let hermite_c1 = normal_expectation(HERMITE_POINTS, |s| s * phi_scale * s.tanh());
        if hermite_c1 == 0.0 {
            return Err(Error::Config("transform has vanishing first Hermite coefficient".into()));
        }
        Ok(Self {
            q_mean,
            bound: (q_mean.abs() + phi_scale).max(1.0),
            kind: PotentialKind::LongRange {
                dim,
                alpha,
                kappa_g: 1.0,
                phi_scale,
                hermite_c1,
            },
        })
    }

    /// `sup |ν|`.
    pub fn fluctuation_sup(&self) -> f64 {
        match self.kind {
            PotentialKind::Constant => 0.0,
            PotentialKind::ShortRange { amplitude } => amplitude,
            PotentialKind::LongRange { phi_scale, .. } => phi_scale,
        }
    }

    /// `q̄ - sup|ν|`, the smallest value the potential can take.
    pub fn q_min(&self) -> f64 {
        self.q_mean - self.fluctuation_sup()
    }

    pub fn is_long_range(&self) -> bool {
        matches!(self.kind, PotentialKind::LongRange { .. })
    }

    /// Error-scaling exponent: `d` for short range, `α` for long range.
    pub fn scaling_exponent(&self, dim: usize) -> f64 {
        match self.kind {
            PotentialKind::LongRange { alpha, .. } => alpha,
            _ => dim as f64,
        }
    }

    /// `σ² = ∫ R`, which equals `a²` for the shifted checkerboard.
    pub fn exact_sigma2(&self) -> Result<f64> {
        match self.kind {
            PotentialKind::Constant => Ok(0.0),
            PotentialKind::ShortRange { amplitude } => Ok(amplitude * amplitude),
            PotentialKind::LongRange { .. } => {
                Err(Error::Unsupported("sigma2 undefined for long-range".into()))
            }
        }
    }

    /// `κ = c₁² κ_𝔤`, the tail constant of `R_ν`.
    pub fn kappa(&self) -> Result<f64> {
        match self.kind {
            PotentialKind::LongRange {
                kappa_g, hermite_c1, ..
            } => Ok(hermite_c1 * hermite_c1 * kappa_g),
            _ => Err(Error::Unsupported("kappa is defined for long-range models only".into())),
        }
    }

    /// Transform `Φ` applied to the Gaussian field (long range only).
    pub fn phi(&self, s: f64) -> f64 {
        match self.kind {
            PotentialKind::LongRange { phi_scale, .. } => phi_scale * s.tanh(),
            _ => 0.0,
        }
    }

    /// Exact `R(x) = E ν(x) ν(0)` where it has closed form.
    ///
    /// Short range: `a² Π (1 - |x_i|)₊`. Long range: the truncated Hermite
    /// series of order 16 in `R_𝔤(x)`.
    pub fn correlation(&self, x: &[f64]) -> f64 {
        match self.kind {
            PotentialKind::Constant => 0.0,
            PotentialKind::ShortRange { amplitude } => {
                amplitude * amplitude * x.iter().map(|xi| (1.0 - xi.abs()).max(0.0)).product::<f64>()
            }
            PotentialKind::LongRange { .. } => {
                let c = hermite_coefficients(HERMITE_POINTS, 16, |s| self.phi(s));
                super::hermite::hermite_covariance(&c, self.gaussian_covariance(x))
            }
        }
    }

    /// `R_𝔤(x) = (1 + |x|²)^{-α/2}`.
    pub fn gaussian_covariance(&self, x: &[f64]) -> f64 {
        match self.kind {
            PotentialKind::LongRange { alpha, .. } => gaussian_covariance(alpha, x.iter().map(|v| v * v).sum::<f64>().sqrt()),
            _ => 0.0,
        }
    }
}

pub(crate) fn gaussian_covariance(alpha: f64, r: f64) -> f64 {
    (1.0 + r * r).powf(-0.5 * alpha)
}

/// Kept under the names used throughout the examples and CLI.
pub fn build_short_range(q_mean: f64, amplitude: f64) -> Result<PotentialModel> {
    PotentialModel::short_range(q_mean, amplitude)
}

pub fn build_long_range(q_mean: f64, alpha: f64, phi_scale: f64, dim: usize) -> Result<PotentialModel> {
    PotentialModel::long_range(q_mean, alpha, phi_scale, dim)
}

pub fn exact_sigma2(model: &PotentialModel) -> Result<f64> {
    model.exact_sigma2()
}
