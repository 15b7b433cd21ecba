//! Stationary random potentials `q(x/ε, ω) = q̄ + ν(x/ε, ω)`.
//!
//! Two models are built in. The short-range shifted checkerboard is
//! 1-dependent with closed-form `R` and `σ²`. The long-range model is a
//! bounded odd transform of a Gaussian field with heavy-tailed covariance,
//! sampled by circulant embedding.

pub mod diagnostics;
pub mod hermite;
pub mod model;
pub mod sampler;

pub use diagnostics::{
    empirical_correlation, empirical_fourth_moment, empirical_gaussian_correlation, CorrelationEstimate,
    MomentEstimate,
};
pub use model::{build_long_range, build_short_range, exact_sigma2, PotentialKind, PotentialModel};
pub use sampler::{check_resolution, sample_potential, CirculantEmbedding, FieldSample, FieldSampler};
