//! Empirical correlations of both potential models against their exact
//! correlation functions.
//!
//! ```bash
//! cargo run --release --example field_check
//! ```

use homog::randfield::{
    build_long_range, build_short_range, empirical_correlation, empirical_gaussian_correlation,
};
use homog::Grid;

fn main() -> homog::Result<()> {
    let grid = Grid::new(2, 129)?;
    let eps = 0.125;
    let lags: Vec<Vec<isize>> = [0, 2, 4, 8, 16].iter().map(|&k| vec![k, 0]).collect();
    let at = |lag: &[isize]| -> Vec<f64> { lag.iter().map(|&l| l as f64 * grid.h() / eps).collect() };

    let short = build_short_range(5.0, 0.5)?;
    println!("short range, R(x) = a² Π(1-|x_i|)₊");
    for e in empirical_correlation(&short, &grid, eps, &lags, 300, 1)? {
        println!("  x={:<6} R̂={:+.4} ± {:.4}  exact {:.4}", at(&e.lag)[0], e.value, e.std_error, short.correlation(&at(&e.lag)));
    }

    let long = build_long_range(5.0, 1.0, 0.5, 2)?;
    println!("long range: Gaussian covariance (1+|x|²)^(-α/2) and the transformed field");
    let g = empirical_gaussian_correlation(&long, &grid, eps, &lags, 300, 2)?;
    let nu = empirical_correlation(&long, &grid, eps, &lags, 300, 2)?;
    for (eg, en) in g.iter().zip(&nu) {
        let x = at(&eg.lag);
        println!(
            "  x={:<6} R̂g={:.4} (exact {:.4})  R̂ν={:.5} (series {:.5})",
            x[0],
            eg.value,
            long.gaussian_covariance(&x),
            en.value,
            long.correlation(&x)
        );
    }
    Ok(())
}
