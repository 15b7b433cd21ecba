//! A column of the discrete Green's function of the linearized operator and
//! its `1/r` decay in three dimensions.
//!
//! ```bash
//! cargo run --release --example green_function
//! ```

use std::f64::consts::PI;

use homog::pde::{solve_homogenized, LinearizedOperator};
use homog::{Grid, GridFunction, Nonlinearity};

fn main() -> homog::Result<()> {
    let grid = Grid::new(3, 33)?;
    let nl = Nonlinearity::default();
    let (u, _) = solve_homogenized(&grid, 5.0, &nl, &GridFunction::constant(grid, 1.0))?;
    let op = LinearizedOperator::around(&grid, 5.0, &nl, &u);
    let pole = [16, 16, 16];
    let col = op.green_column(&pole)?;
    println!("coercivity {:.3}, min G = {:.2e}", op.coercivity(), col.min());
    for k in [4, 6, 8, 10, 12, 14] {
        let idx = grid.index_of(&[16 + k, 16, 16]).expect("interior node");
        let r = k as f64 * grid.h();
        println!("  r={r:.4}  G={:.4e}  4πr·G={:.4}", col.values()[idx], 4.0 * PI * r * col.values()[idx]);
    }
    Ok(())
}
