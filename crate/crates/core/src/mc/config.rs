use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::{Nonlinearity, SolverOptions};
use crate::randfield::{check_resolution, PotentialModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    ShortRange {
        #[serde(default = "default_q_mean")]
        q_mean: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    LongRange {
        #[serde(default = "default_q_mean")]
        q_mean: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_amplitude")]
        phi_scale: f64,
    },
}

fn default_q_mean() -> f64 {
    5.0
}
fn default_amplitude() -> f64 {
    0.5
}
fn default_alpha() -> f64 {
    1.0
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::ShortRange {
            q_mean: default_q_mean(),
            amplitude: default_amplitude(),
        }
    }
}

impl ModelSpec {
    /// A zero short-range amplitude yields the constant potential `q̄`.
    pub fn build(&self, dim: usize) -> Result<PotentialModel> {
        match *self {
            ModelSpec::ShortRange { q_mean, amplitude: 0.0 } => {
                Ok(PotentialModel::constant(q_mean))
            }
            ModelSpec::ShortRange { q_mean, amplitude } => PotentialModel::short_range(q_mean, amplitude),
            ModelSpec::LongRange {
                q_mean,
                alpha,
                phi_scale,
            } => PotentialModel::long_range(q_mean, alpha, phi_scale, dim),
        }
    }
}

/// Deterministic source or test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `amplitude · Π sin(π x_a)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Constant { value: 1.0 }
    }
}

impl FieldSpec {
    pub fn build(&self, grid: &Grid) -> GridFunction {
        match *self {
            FieldSpec::Constant { value } => GridFunction::constant(*grid, value),
            FieldSpec::Sine { amplitude } => GridFunction::sine_mode(*grid).scale(amplitude),
        }
    }
}

/// Quantity sampled by the distribution study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `ε^{-β/2} ⟨φ, u^ε - u⟩`.
    #[default]
    Full,
    /// `ε^{-β/2} ⟨φ, χ^ε⟩`, the leading term alone.
    Leading,
}

/// Acceptance bands of the distribution and scaling studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bands {
    /// Allowed `|variance_ratio - 1|`.
    pub variance_ratio: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks: f64,
    /// Allowed `|fitted_slope - β|`.
    pub slope: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self {
            variance_ratio: 0.2,
            skewness: 0.25,
            excess_kurtosis: 0.5,
            ks: 0.1,
            slope: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldCheckSpec {
    pub n_samples: usize,
    /// Node offsets; the default covers lag 0, one axis step and one
    /// correlation length along the first axis.
    pub lags: Option<Vec<Vec<isize>>>,
}

impl Default for FieldCheckSpec {
    fn default() -> Self {
        Self {
            n_samples: 500,
            lags: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GreenSpec {
    /// Pole node (indices `0..n` per axis); the grid centre by default.
    pub node: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub dim: usize,
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub model: ModelSpec,
    pub nonlinearity: Nonlinearity,
    /// Source term `g`.
    pub g: FieldSpec,
    /// Test function `φ` of the distribution study.
    pub phi: FieldSpec,
    pub threads: usize,
    pub observable: Observable,
    pub bands: Bands,
    /// Minimum ellipticity margin `c`.
    pub required_margin: f64,
    pub field_check: FieldCheckSpec,
    pub green: GreenSpec,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 129,
            epsilons: vec![0.25, 0.125, 0.0625],
            n_realizations: 32,
            base_seed: 1,
            model: ModelSpec::default(),
            nonlinearity: Nonlinearity::default(),
            g: FieldSpec::default(),
            phi: FieldSpec::default(),
            threads: 1,
            observable: Observable::default(),
            bands: Bands::default(),
            required_margin: 0.5,
            field_check: FieldCheckSpec::default(),
            green: GreenSpec::default(),
        }
    }
}

impl StudyConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    pub fn potential(&self) -> Result<PotentialModel> {
        self.model.build(self.dim)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            required_margin: self.required_margin,
            ..SolverOptions::default()
        }
    }

    /// Checks every invariant; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilons: at least one value is required".into()));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("epsilons: values must be strictly decreasing".into()));
        }
        for &eps in &self.epsilons {
            check_resolution(&grid, eps).map_err(|e| Error::Config(format!("epsilons: {e}")))?;
        }
        if self.n_realizations < 8 {
            return Err(Error::Config(format!(
                "n_realizations: at least 8 required, got {}",
                self.n_realizations
            )));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads: must be at least 1".into()));
        }
        if let ModelSpec::ShortRange { amplitude, .. } = self.model {
            if amplitude < 0.0 {
                return Err(Error::Config(format!("model.amplitude: must be >= 0, got {amplitude}")));
            }
        }
        let model = self.potential().map_err(|e| Error::Config(format!("model: {e}")))?;
        self.nonlinearity
            .validate(grid.dirichlet_lambda1(), model.q_min(), self.required_margin)?;
        self.nonlinearity.growth_constant(self.dim)?;
        if self.field_check.n_samples < 2 {
            return Err(Error::Config("field_check.n_samples: at least 2 required".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        StudyConfig::default().validate().unwrap();
    }

    #[test]
    fn increasing_epsilons_are_rejected() {
        let cfg = StudyConfig {
            epsilons: vec![0.0625, 0.125],
            ..StudyConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("epsilons"), "{err}");
    }

    #[test]
    fn under_resolved_epsilon_is_rejected() {
        let cfg = StudyConfig {
            n: 65,
            epsilons: vec![0.125, 0.0625],
            ..StudyConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("h <= epsilon/8"), "{err}");
    }

    #[test]
    fn zero_amplitude_is_constant_model() {
        let spec = ModelSpec::ShortRange {
            q_mean: 5.0,
            amplitude: 0.0,
        };
        assert_eq!(spec.build(2).unwrap(), PotentialModel::constant(5.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"dim": 2, "epsilon": [0.1]}"#;
        assert!(serde_json::from_str::<StudyConfig>(text).is_err());
        let text = r#"{"model": {"kind": "long_range", "amplitude": 0.3}}"#;
        assert!(serde_json::from_str::<StudyConfig>(text).is_err());
        let text = r#"{"model": {"kind": "long_range", "alpha": 0.7}}"#;
        let cfg: StudyConfig = serde_json::from_str(text).unwrap();
        assert_eq!(
            cfg.model,
            ModelSpec::LongRange {
                q_mean: 5.0,
                alpha: 0.7,
                phi_scale: 0.5
            }
        );
    }
}
