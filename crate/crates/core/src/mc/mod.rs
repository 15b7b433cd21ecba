//! Monte Carlo studies: error scaling along an `ε` ladder, limiting
//! distributions of `⟨φ, u^ε - u⟩`, and the size of the expansion terms.

pub mod config;
pub mod stats;
pub mod study;

pub use config::{Bands, FieldCheckSpec, FieldSpec, GreenSpec, ModelSpec, Observable, StudyConfig};
pub use stats::{bootstrap_slope_ci, fit_loglog_slope, normality_stats, standard_normal_cdf, NormalityStats};
pub use study::{
    par_map, predicted_variance, run_distribution_study, run_scaling_study, run_scaling_study_detailed,
    run_term_study, DistributionSummary, EpsilonSummary, McSummary, ScalingReport, TermLevel,
};
