//! One realization of the heterogeneous problem next to the homogenized one.
//!
//! ```bash
//! cargo run --release --example solve
//! ```

use homog::fluctuation::expansion_terms;
use homog::pde::{solve_homogenized, solve_semilinear};
use homog::randfield::{build_short_range, sample_potential};
use homog::{Grid, GridFunction, Nonlinearity};

fn main() -> homog::Result<()> {
    let grid = Grid::new(2, 257)?;
    let nl = Nonlinearity::Bistable { theta: 0.3 };
    let model = build_short_range(5.0, 0.5)?;
    let g = GridFunction::constant(grid, 1.0);

    let (u, hom) = solve_homogenized(&grid, model.q_mean, &nl, &g)?;
    println!("homogenized: {} Newton steps, residual {:.2e}", hom.newton_iterations, hom.final_residual_l2);

    for eps in [0.125, 0.0625, 0.03125] {
        let sample = sample_potential(&model, &grid, eps, 7)?;
        let (ue, rep) = solve_semilinear(&grid, &sample.q_eps, &nl, &g)?;
        let xi = ue.sub(&u);
        let terms = expansion_terms(&grid, model.q_mean, &sample.nu_eps(), &nl, &ue, &u)?;
        println!(
            "eps={eps:<8} newton={} cg={:<3} ‖u^ε-u‖={:.3e} ‖χ‖={:.3e} identity defect={:.1e}",
            rep.newton_iterations,
            rep.cg_iterations_total,
            xi.l2_norm(),
            terms.t1.l2_norm(),
            terms.identity_defect()
        );
    }
    Ok(())
}
