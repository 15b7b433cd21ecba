//! Limiting Gaussian law of `ε^{-d/2} ⟨φ, u^ε - u⟩` against the predicted
//! variance, for the full error and for the corrector alone.
//!
//! ```bash
//! cargo run --release --example distribution_study
//! ```

use homog::mc::{run_distribution_study, Observable, StudyConfig};

fn main() -> homog::Result<()> {
    for observable in [Observable::Leading, Observable::Full] {
        let cfg = StudyConfig {
            n: 257,
            epsilons: vec![1.0 / 32.0],
            n_realizations: 500,
            observable,
            ..StudyConfig::default()
        };
        let s = run_distribution_study(&cfg)?;
        let d = s.distribution.as_ref().expect("distribution block");
        println!(
            "{observable:?}: var {:.4e} predicted {:.4e} ratio {:.3} skew {:+.3} kurt {:+.3} KS {:.3}",
            d.empirical_variance,
            d.predicted_variance,
            d.variance_ratio.unwrap_or(f64::NAN),
            d.skewness.unwrap_or(f64::NAN),
            d.excess_kurtosis.unwrap_or(f64::NAN),
            d.ks_statistic_vs_normal.unwrap_or(f64::NAN)
        );
        let failures = s.band_failures(&cfg.bands);
        if !failures.is_empty() {
            println!("  outside bands: {}", failures.join("; "));
        }
    }
    Ok(())
}
