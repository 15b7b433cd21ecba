//! Error scaling `E‖u^ε - u‖² ~ ε^β` for both potential models.
//!
//! ```bash
//! cargo run --release --example scaling_study
//! ```

use homog::mc::{run_scaling_study, ModelSpec, StudyConfig};

fn main() -> homog::Result<()> {
    let models = [
        ("short range", ModelSpec::default()),
        (
            "long range, alpha=1",
            ModelSpec::LongRange {
                q_mean: 5.0,
                alpha: 1.0,
                phi_scale: 0.5,
            },
        ),
    ];
    for (label, model) in models {
        let cfg = StudyConfig {
            n: 257,
            epsilons: vec![0.125, 0.0625, 0.03125],
            n_realizations: 48,
            model,
            ..StudyConfig::default()
        };
        let s = run_scaling_study(&cfg)?;
        println!("{label}");
        for p in &s.per_epsilon {
            println!("  eps={:<8} E‖ξ‖²={:.3e} ± {:.1e}", p.epsilon, p.mean_sq_error, p.std_error);
        }
        let (lo, hi) = s.slope_ci.unwrap_or((f64::NAN, f64::NAN));
        println!(
            "  slope {:.3} (95% CI {lo:.3}..{hi:.3}), expected {}",
            s.fitted_slope.unwrap_or(f64::NAN),
            s.expected_slope
        );
    }
    Ok(())
}
