//! Sizes of the five expansion terms of `u^ε - u` along an `ε` ladder.
//!
//! ```bash
//! cargo run --release --example expansion_terms
//! ```

use homog::mc::{run_term_study, StudyConfig};

fn main() -> homog::Result<()> {
    let cfg = StudyConfig {
        n: 257,
        epsilons: vec![0.125, 0.0625, 0.03125],
        n_realizations: 24,
        ..StudyConfig::default()
    };
    println!("{:<9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "eps", "‖t1‖", "‖t2‖", "‖t3‖", "‖t4‖", "‖t5‖", "defect");
    for level in run_term_study(&cfg)? {
        let m = level.mean_norms;
        println!(
            "{:<9} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.1e}",
            level.epsilon, m[0], m[1], m[2], m[3], m[4], level.max_identity_defect
        );
    }
    Ok(())
}
