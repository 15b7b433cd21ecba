use std::f64::consts::PI;

use homog::pde::{
    apply_linearized_inverse, green_column, smallest_eigenvalue, solve_homogenized, solve_semilinear,
    solve_semilinear_with, LinearizedOperator, SolverOptions,
};
use homog::randfield::{build_short_range, sample_potential};
use homog::{laplacian_apply, Error, Grid, GridFunction, Nonlinearity};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_laplacian(grid: &Grid) -> DMatrix<f64> {
    let n = grid.interior_count();
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = GridFunction::zeros(*grid);
        e.values_mut()[j] = 1.0;
        let col = laplacian_apply(grid, &e);
        for i in 0..n {
            a[(i, j)] = col.values()[i];
        }
    }
    a
}

fn random_field(grid: &Grid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_values(*grid, (0..grid.interior_count()).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn l2_dist(grid: &Grid, a: &GridFunction, b: &DVector<f64>) -> f64 {
    let s: f64 = a.values().iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum();
    (s * grid.cell_volume()).sqrt()
}

#[test]
fn linear_constant_potential_matches_dense_lu() {
    for dim in [2, 3] {
        let grid = Grid::new(dim, 9).unwrap();
        let g = GridFunction::from_fn(grid, |x| 1.0 + x[0] - 0.5 * x[dim - 1]);
        let (u, rep) = solve_homogenized(&grid, 5.0, &Nonlinearity::Linear, &g).unwrap();
        assert!(rep.converged);
        let a = dense_laplacian(&grid) + DMatrix::identity(grid.interior_count(), grid.interior_count()) * 5.0;
        let w = a.lu().solve(&DVector::from_column_slice(g.values())).unwrap();
        assert!(l2_dist(&grid, &u, &w) <= 1e-9, "dim {dim}");
    }
}

#[test]
fn bistable_matches_picard_iteration() {
    let grid = Grid::new(2, 9).unwrap();
    let nl = Nonlinearity::Bistable { theta: 0.3 };
    let model = build_short_range(5.0, 0.5).unwrap();
    let q = sample_potential(&model, &grid, 1.0, 3).unwrap().q_eps;
    let g = GridFunction::constant(grid, 1.0);
    let (u, _) = solve_semilinear(&grid, &q, &nl, &g).unwrap();

    let lu = (dense_laplacian(&grid) + DMatrix::from_diagonal(&DVector::from_column_slice(q.values()))).lu();
    let gv = DVector::from_column_slice(g.values());
    let mut p = DVector::zeros(grid.interior_count());
    for _ in 0..1000 {
        let next = lu.solve(&(&gv - p.map(|s| nl.f(s)))).unwrap();
        let step = (&next - &p).norm();
        p = next;
        if step < 1e-15 {
            break;
        }
    }
    assert!(l2_dist(&grid, &u, &p) <= 1e-9);
}

#[test]
fn newton_history_descends_with_quadratic_tail() {
    let grid = Grid::new(2, 65).unwrap();
    let nl = Nonlinearity::default();
    let model = build_short_range(5.0, 0.5).unwrap();
    let q = sample_potential(&model, &grid, 0.125, 8).unwrap().q_eps;
    let g = GridFunction::from_fn(grid, |x| 20.0 * x[0] * x[1]);
    let (_, rep) = solve_semilinear(&grid, &q, &nl, &g).unwrap();
    assert!(rep.converged && rep.final_residual_l2 <= 1e-10);
    assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    let r = &rep.residual_history;
    let k = r.len();
    assert!(k >= 3);
    assert!(r[k - 2] <= r[k - 3] / 10.0 && r[k - 1] <= r[k - 2] / 10.0, "{r:?}");
}

#[test]
fn zero_source_is_immediate() {
    let grid = Grid::new(2, 17).unwrap();
    let q = GridFunction::constant(grid, 3.0);
    let (u, rep) = solve_semilinear(&grid, &q, &Nonlinearity::default(), &GridFunction::zeros(grid)).unwrap();
    assert_eq!(u.linf_norm(), 0.0);
    assert!(rep.newton_iterations <= 1);
}

#[test]
fn nonconvergence_carries_report() {
    let grid = Grid::new(2, 17).unwrap();
    let q = GridFunction::constant(grid, 5.0);
    let g = GridFunction::constant(grid, 50.0);
    let opts = SolverOptions {
        newton_max_iter: 1,
        ..SolverOptions::default()
    };
    match solve_semilinear_with(&grid, &q, &Nonlinearity::default(), &g, &opts) {
        Err(Error::NewtonNonConvergence { report }) => {
            assert_eq!(report.newton_iterations, 1);
            assert!(!report.converged);
        }
        other => panic!("expected nonconvergence, got {other:?}"),
    }
}

#[test]
fn insufficient_margin_is_a_validation_error() {
    let grid = Grid::new(2, 17).unwrap();
    let q = GridFunction::constant(grid, -19.0);
    let err = solve_semilinear(&grid, &q, &Nonlinearity::default(), &GridFunction::constant(grid, 1.0));
    assert!(matches!(err, Err(Error::Validation(_))), "{err:?}");
}

#[test]
fn linearized_inverse_is_self_adjoint_and_contracting() {
    let grid = Grid::new(2, 33).unwrap();
    let nl = Nonlinearity::default();
    let (u, _) = solve_homogenized(&grid, 5.0, &nl, &GridFunction::constant(grid, 1.0)).unwrap();
    let fprime = u.map(|s| nl.df(s));
    let a = random_field(&grid, 1);
    let b = random_field(&grid, 2);
    let ga = apply_linearized_inverse(&grid, 5.0, &fprime, &a).unwrap();
    let gb = apply_linearized_inverse(&grid, 5.0, &fprime, &b).unwrap();
    assert!((ga.inner(&b) - a.inner(&gb)).abs() <= 1e-9);

    let c = grid.dirichlet_lambda1() + 5.0 + fprime.min();
    for seed in 3..13 {
        let r = random_field(&grid, seed);
        let w = apply_linearized_inverse(&grid, 5.0, &fprime, &r).unwrap();
        assert!(w.l2_norm() <= r.l2_norm() / c);
    }
}

#[test]
fn green_columns_are_symmetric_and_positive() {
    let grid = Grid::new(2, 33).unwrap();
    let nl = Nonlinearity::default();
    let (u, _) = solve_homogenized(&grid, 5.0, &nl, &GridFunction::constant(grid, 1.0)).unwrap();
    let op = LinearizedOperator::around(&grid, 5.0, &nl, &u);
    let (x, y) = ([5usize, 9], [20usize, 27]);
    let gx = op.green_column(&x).unwrap();
    let gy = op.green_column(&y).unwrap();
    let (ix, iy) = (grid.index_of(&x).unwrap(), grid.index_of(&y).unwrap());
    assert!((gy.values()[ix] - gx.values()[iy]).abs() <= 1e-8);
    assert!(gx.min() >= 0.0 && gy.min() >= 0.0);
    let free = green_column(&grid, 5.0, &u.map(|s| nl.df(s)), &y).unwrap();
    assert_eq!(free, gy);
    assert!(op.green_column(&[0, 4]).is_err());
}

#[test]
fn green_decay_in_three_dimensions() {
    let grid = Grid::new(3, 33).unwrap();
    let pole = [16usize, 16, 16];
    let col = green_column(&grid, 1.0, &GridFunction::zeros(grid), &pole).unwrap();
    let y = [0.5, 0.5, 0.5];
    let mut max_ratio: f64 = 0.0;
    for i in 0..grid.interior_count() {
        let x = grid.coords(i);
        let r = (0..3).map(|a| (x[a] - y[a]).powi(2)).sum::<f64>().sqrt();
        if r >= 4.0 * grid.h() {
            max_ratio = max_ratio.max(col.values()[i] * r);
        }
    }
    // Free-space kernel of -Δ in three dimensions: 1/(4πr).
    assert!(max_ratio > 0.0 && max_ratio <= 1.1 / (4.0 * PI), "{max_ratio}");
}

#[test]
fn eigenvalues_in_two_and_three_dimensions() {
    let mut prev = 0.0;
    for n in [17, 33, 65] {
        let l = smallest_eigenvalue(&Grid::new(2, n).unwrap());
        assert!(l > prev && l < 2.0 * PI * PI);
        prev = l;
    }
    let l3 = smallest_eigenvalue(&Grid::new(3, 33).unwrap());
    assert!((l3 - 3.0 * PI * PI).abs() / (3.0 * PI * PI) < 0.01);
}

#[test]
fn discrete_poincare_inequality() {
    let grid = Grid::new(2, 33).unwrap();
    let l1 = smallest_eigenvalue(&grid);
    for seed in 0..10 {
        let v = random_field(&grid, 100 + seed);
        let lv = laplacian_apply(&grid, &v);
        assert!(lv.inner(&v) >= l1 * v.l2_norm().powi(2) * (1.0 - 1e-12));
    }
}
