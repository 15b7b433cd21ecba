//! Discrete semilinear problems `-Δ_h u + q u + f(u) = g` with zero Dirichlet data.
//!
//! The heterogeneous and homogenized problems are both minimizers of the
//! strictly convex energy
//! `I[v] = Σ h^d (½|∇_h v|² + ½ q v² + F(v) - g v)`, found by damped Newton.
//! Linearized operators `-Δ_h + q̄ + f′(u)` are inverted by CG.

use serde::{Deserialize, Serialize};

use crate::cg::{CgOptions, Preconditioner, ShiftedOperator};
use crate::error::{Error, Result};
use crate::grid::{apply_shifted_laplacian, Grid, GridFunction};

/// Built-in reaction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `f ≡ 0`.
    Linear,
    /// `f(u) = u (u - 1) (u - θ)`.
    Bistable { theta: f64 },
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Nonlinearity::Bistable { theta: 0.3 }
    }
}

impl Nonlinearity {
    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Linear => "linear",
            Nonlinearity::Bistable { .. } => "bistable",
        }
    }

    /// Growth exponent `γ` with `|f(s)| ≤ C (1 + |s|^γ)`.
    pub fn gamma(&self) -> f64 {
        match self {
            Nonlinearity::Linear => 1.0,
            Nonlinearity::Bistable { .. } => 3.0,
        }
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Bistable { theta } => s * (s - 1.0) * (s - theta),
        }
    }

    #[inline]
    pub fn df(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Bistable { theta } => 3.0 * s * s - 2.0 * (1.0 + theta) * s + theta,
        }
    }

    #[inline]
    pub fn d2f(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Bistable { theta } => 6.0 * s - 2.0 * (1.0 + theta),
        }
    }

    /// Antiderivative `F(s) = ∫₀^s f`.
    #[inline]
    pub fn antiderivative(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Bistable { theta } => {
                let s2 = s * s;
                0.25 * s2 * s2 - (1.0 + theta) * s2 * s / 3.0 + 0.5 * theta * s2
            }
        }
    }

    /// `inf_s f′(s)`, in closed form.
    pub fn min_derivative(&self) -> f64 {
        match *self {
            Nonlinearity::Linear => 0.0,
            Nonlinearity::Bistable { theta } => theta - (1.0 + theta).powi(2) / 3.0,
        }
    }

    /// Returns the realized margin `λ₁ + q_min + inf f′`, or a validation
    /// error when it falls below `required_margin` (or is not positive).
    pub fn validate(&self, lambda1: f64, q_min: f64, required_margin: f64) -> Result<f64> {
        if let Nonlinearity::Bistable { theta } = *self {
            if !theta.is_finite() {
                return Err(Error::Validation("theta must be finite".into()));
            }
        }
        let c = lambda1 + q_min + self.min_derivative();
        if !(c > 0.0 && c >= required_margin) {
            return Err(Error::Validation(format!(
                "ellipticity margin lambda1 + q_min + min f' = {c:.6} is below the required {required_margin}"
            )));
        }
        Ok(c)
    }

    /// Checks `|f(s)| ≤ C (1 + |s|^γ)` on a lattice of `s` values and the
    /// `γ < 5` restriction in three dimensions. Returns the smallest `C`.
    pub fn growth_constant(&self, dim: usize) -> Result<f64> {
        let gamma = self.gamma();
        if dim == 3 && gamma >= 5.0 {
            return Err(Error::Validation(format!("growth exponent {gamma} must be < 5 in 3D")));
        }
        let c = (-400..=400)
            .map(|k| k as f64 * 0.25)
            .map(|s| self.f(s).abs() / (1.0 + s.abs().powf(gamma)))
            .fold(0.0, f64::max);
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub max_halvings: usize,
    pub cg: CgOptions,
    /// Minimum admissible ellipticity margin `c`.
    pub required_margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max_iter: 50,
            max_halvings: 30,
            cg: CgOptions::default(),
            required_margin: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn with_preconditioner(mut self, p: Preconditioner) -> Self {
        self.cg.preconditioner = p;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub newton_iterations: usize,
    pub final_residual_l2: f64,
    pub cg_iterations_total: usize,
    pub converged: bool,
    /// Residual `L²` norm before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    /// Energy of each accepted iterate, starting from `u₀ ≡ 0`.
    pub energy_history: Vec<f64>,
}

fn check_same_grid(grid: &Grid, fields: &[&GridFunction]) {
    for f in fields {
        assert_eq!(grid, f.grid(), "field does not live on this grid");
    }
}

/// Discrete energy `I[v]`. The forward-difference Dirichlet form over all
/// cell edges equals `½ ⟨-Δ_h v, v⟩`.
pub fn energy(
    grid: &Grid,
    q_field: &GridFunction,
    nl: &Nonlinearity,
    g: &GridFunction,
    v: &GridFunction,
) -> f64 {
    check_same_grid(grid, &[q_field, g, v]);
    let mut lap = vec![0.0; v.len()];
    apply_shifted_laplacian(grid, v.values(), None, &mut lap);
    let density: f64 = v
        .values()
        .iter()
        .zip(&lap)
        .zip(q_field.values().iter().zip(g.values()))
        .map(|((&vi, &li), (&qi, &gi))| {
            0.5 * vi * li + 0.5 * qi * vi * vi + nl.antiderivative(vi) - gi * vi
        })
        .sum();
    grid.cell_volume() * density
}

/// Gradient of the energy divided by `h^d`: `-Δ_h v + q v + f(v) - g`.
pub fn residual(
    grid: &Grid,
    q_field: &GridFunction,
    nl: &Nonlinearity,
    g: &GridFunction,
    v: &GridFunction,
) -> GridFunction {
    check_same_grid(grid, &[q_field, g, v]);
    let mut out = vec![0.0; v.len()];
    apply_shifted_laplacian(grid, v.values(), Some(q_field.values()), &mut out);
    for ((o, &vi), &gi) in out.iter_mut().zip(v.values()).zip(g.values()) {
        *o += nl.f(vi) - gi;
    }
    GridFunction::from_values(*grid, out)
}

/// Solves the heterogeneous problem with default options.
pub fn solve_semilinear(
    grid: &Grid,
    q_field: &GridFunction,
    nl: &Nonlinearity,
    g: &GridFunction,
) -> Result<(GridFunction, SolveReport)> {
    solve_semilinear_with(grid, q_field, nl, g, &SolverOptions::default())
}

/// Damped Newton from `u₀ ≡ 0`; each step solves
/// `(-Δ_h + q + f′(u_k)) δ = -residual` and halves the step until the energy
/// does not increase.
pub fn solve_semilinear_with(
    grid: &Grid,
    q_field: &GridFunction,
    nl: &Nonlinearity,
    g: &GridFunction,
    opts: &SolverOptions,
) -> Result<(GridFunction, SolveReport)> {
    check_same_grid(grid, &[q_field, g]);
    nl.validate(grid.dirichlet_lambda1(), q_field.min(), opts.required_margin)?;

    let mut u = GridFunction::zeros(*grid);
    let mut e = energy(grid, q_field, nl, g, &u);
    let mut report = SolveReport {
        newton_iterations: 0,
        final_residual_l2: f64::NAN,
        cg_iterations_total: 0,
        converged: false,
        residual_history: Vec::new(),
        energy_history: vec![e],
    };
    loop {
        let r = residual(grid, q_field, nl, g, &u);
        let rnorm = r.l2_norm();
        report.residual_history.push(rnorm);
        report.final_residual_l2 = rnorm;
        if rnorm <= opts.newton_tol {
            report.converged = true;
            return Ok((u, report));
        }
        if report.newton_iterations == opts.newton_max_iter {
            return Err(Error::NewtonNonConvergence { report });
        }

        let coef: Vec<f64> = q_field
            .values()
            .iter()
            .zip(u.values())
            .map(|(&q, &ui)| q + nl.df(ui))
            .collect();
        let jac = ShiftedOperator::new(*grid, coef, opts.cg);
        let (step, iters) = jac.solve(&r)?;
        report.cg_iterations_total += iters;

        // Energy differences sink below round-off near the minimizer.
        let slack = 1e-13 * e.abs().max(1e-300);
        let mut t = 1.0;
        let mut trial = u.clone();
        trial.axpy(-t, &step);
        let mut e_trial = energy(grid, q_field, nl, g, &trial);
        let mut halvings = 0;
        while e_trial > e + slack && halvings < opts.max_halvings {
            t *= 0.5;
            halvings += 1;
            trial = u.clone();
            trial.axpy(-t, &step);
            e_trial = energy(grid, q_field, nl, g, &trial);
        }
        u = trial;
        e = e_trial;
        report.energy_history.push(e);
        report.newton_iterations += 1;
    }
}

/// The homogenized problem: `solve_semilinear` with `q ≡ q̄`.
pub fn solve_homogenized(
    grid: &Grid,
    q_mean: f64,
    nl: &Nonlinearity,
    g: &GridFunction,
) -> Result<(GridFunction, SolveReport)> {
    solve_homogenized_with(grid, q_mean, nl, g, &SolverOptions::default())
}

pub fn solve_homogenized_with(
    grid: &Grid,
    q_mean: f64,
    nl: &Nonlinearity,
    g: &GridFunction,
    opts: &SolverOptions,
) -> Result<(GridFunction, SolveReport)> {
    let q = GridFunction::constant(*grid, q_mean);
    solve_semilinear_with(grid, &q, nl, g, opts)
}

/// The solution operator `𝒢_u` of `-Δ_h + q̄ + f′(u)`.
pub struct LinearizedOperator {
    op: ShiftedOperator,
}

impl LinearizedOperator {
    pub fn new(grid: &Grid, q_mean: f64, fprime_u: &GridFunction) -> Self {
        Self::with_options(grid, q_mean, fprime_u, CgOptions::default())
    }

    pub fn with_options(grid: &Grid, q_mean: f64, fprime_u: &GridFunction, cg: CgOptions) -> Self {
        check_same_grid(grid, &[fprime_u]);
        let coef = fprime_u.values().iter().map(|&d| q_mean + d).collect();
        Self {
            op: ShiftedOperator::new(*grid, coef, cg),
        }
    }

    /// Around the homogenized solution `u`.
    pub fn around(grid: &Grid, q_mean: f64, nl: &Nonlinearity, u: &GridFunction) -> Self {
        Self::new(grid, q_mean, &u.map(|s| nl.df(s)))
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    /// `w = 𝒢_u rhs`.
    pub fn solve(&self, rhs: &GridFunction) -> Result<GridFunction> {
        self.op.solve(rhs).map(|(w, _)| w)
    }

    /// `(-Δ_h + q̄ + f′(u)) v`.
    pub fn apply(&self, v: &GridFunction) -> GridFunction {
        self.op.apply_fn(v)
    }

    /// Lower bound `λ₁_h + min(q̄ + f′(u))` on the operator spectrum.
    pub fn coercivity(&self) -> f64 {
        let cmin = self.op.coefficient().iter().copied().fold(f64::INFINITY, f64::min);
        self.grid().dirichlet_lambda1() + cmin
    }
}

/// `w = 𝒢_u rhs`, solving `(-Δ_h + q̄ + f′(u)) w = rhs`.
pub fn apply_linearized_inverse(
    grid: &Grid,
    q_mean: f64,
    fprime_u: &GridFunction,
    rhs: &GridFunction,
) -> Result<GridFunction> {
    LinearizedOperator::new(grid, q_mean, fprime_u).solve(rhs)
}

/// Column `G_u(·, y)` of the discrete Green's function: `𝒢_u` applied to a
/// unit-mass delta `1/h^d` at node `y`.
pub fn green_column(
    grid: &Grid,
    q_mean: f64,
    fprime_u: &GridFunction,
    y_node: &[usize],
) -> Result<GridFunction> {
    LinearizedOperator::new(grid, q_mean, fprime_u).green_column(y_node)
}

impl LinearizedOperator {
    pub fn green_column(&self, y_node: &[usize]) -> Result<GridFunction> {
        let grid = *self.grid();
        let idx = grid.index_of(y_node).ok_or_else(|| {
            Error::Config(format!("Green's function pole {y_node:?} is not an interior node"))
        })?;
        let mut delta = GridFunction::zeros(grid);
        delta.values_mut()[idx] = 1.0 / grid.cell_volume();
        self.solve(&delta)
    }
}

/// `λ₁_h` of `-Δ_h` by inverse power iteration with a Rayleigh quotient,
/// stopped when the relative change drops below `1e-10`.
pub fn smallest_eigenvalue(grid: &Grid) -> f64 {
    let op = ShiftedOperator::new(*grid, vec![0.0; grid.interior_count()], CgOptions::default());
    let mut v = GridFunction::constant(*grid, 1.0);
    let mut lambda = f64::INFINITY;
    for _ in 0..10_000 {
        let norm = v.l2_norm();
        v = v.scale(1.0 / norm);
        let (w, _) = op.solve(&v).expect("the Dirichlet Laplacian is positive definite");
        // Rayleigh quotient of w: <Aw, w>/<w, w> = <v, w>/<w, w>.
        let next = v.inner(&w) / w.inner(&w);
        let change = ((next - lambda) / next).abs();
        lambda = next;
        v = w;
        if change <= 1e-10 {
            break;
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bistable_closed_forms() {
        let nl = Nonlinearity::Bistable { theta: 0.3 };
        assert!((nl.min_derivative() - (0.3 - 1.69 / 3.0)).abs() < 1e-15);
        let s_star = 1.3 / 3.0;
        assert!((nl.df(s_star) - nl.min_derivative()).abs() < 1e-14);
        for s in [-1.5, -0.2, 0.0, 0.4, 2.0] {
            let dh = 1e-5;
            let fd = (nl.antiderivative(s + dh) - nl.antiderivative(s - dh)) / (2.0 * dh);
            assert!((fd - nl.f(s)).abs() < 1e-8);
            let fd2 = (nl.f(s + dh) - nl.f(s - dh)) / (2.0 * dh);
            assert!((fd2 - nl.df(s)).abs() < 1e-8);
            let fd3 = (nl.df(s + dh) - nl.df(s - dh)) / (2.0 * dh);
            assert!((fd3 - nl.d2f(s)).abs() < 1e-8);
        }
        assert_eq!(nl.antiderivative(0.0), 0.0);
    }

    #[test]
    fn default_instance_margin() {
        let grid = Grid::new(2, 65).unwrap();
        let nl = Nonlinearity::default();
        let c = nl.validate(grid.dirichlet_lambda1(), 5.0 - 0.5, 0.5).unwrap();
        assert!(c >= 0.5);
        assert!(nl.validate(grid.dirichlet_lambda1(), -25.0, 0.5).is_err());
        assert!(nl.growth_constant(3).unwrap().is_finite());
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let grid = Grid::new(2, 17).unwrap();
        let q = GridFunction::from_fn(grid, |x| 5.0 + 0.5 * (7.0 * x[0]).sin());
        let (u, rep) = solve_semilinear(&grid, &q, &Nonlinearity::default(), &GridFunction::zeros(grid)).unwrap();
        assert_eq!(u.linf_norm(), 0.0);
        assert!(rep.newton_iterations <= 1);
        assert!(rep.converged);
    }

    #[test]
    fn homogenized_matches_constant_field_solve() {
        let grid = Grid::new(2, 17).unwrap();
        let nl = Nonlinearity::default();
        let g = GridFunction::constant(grid, 1.0);
        let (a, _) = solve_homogenized(&grid, 5.0, &nl, &g).unwrap();
        let (b, _) = solve_semilinear(&grid, &GridFunction::constant(grid, 5.0), &nl, &g).unwrap();
        assert_eq!(a, b);
        let (z, _) = solve_homogenized(&grid, 5.0, &nl, &GridFunction::zeros(grid)).unwrap();
        assert_eq!(z.linf_norm(), 0.0);
    }

    #[test]
    fn homogenized_sup_bound() {
        let grid = Grid::new(2, 33).unwrap();
        let nl = Nonlinearity::default();
        let g = GridFunction::constant(grid, 1.0);
        let (u, _) = solve_homogenized(&grid, 5.0, &nl, &g).unwrap();
        // At an interior maximum -Δ_h u ≥ 0, so (q̄ + f(u)/u) u ≤ g there;
        // f(s)/s = (s-1)(s-θ) ≥ -(1-θ)²/4.
        let c_inf = 5.0 - 0.7f64.powi(2) / 4.0;
        assert!(u.linf_norm() <= g.linf_norm() / c_inf, "{} vs {}", u.linf_norm(), g.linf_norm() / c_inf);
        // The margin c also counts λ₁, which a pointwise argument cannot use.
        let c = nl.validate(grid.dirichlet_lambda1(), 5.0, 0.5).unwrap();
        assert!(u.linf_norm() > g.linf_norm() / c);
    }

    #[test]
    fn dirichlet_energy_of_sine_mode() {
        let grid = Grid::new(2, 65).unwrap();
        let v = GridFunction::sine_mode(grid);
        let zero = GridFunction::zeros(grid);
        let e = energy(&grid, &zero, &Nonlinearity::Linear, &zero, &v);
        let expect = 2.0 * PI * PI / 2.0 * 0.25;
        assert!((e - expect).abs() < 0.02 * expect);
        assert_eq!(energy(&grid, &zero, &Nonlinearity::default(), &zero, &zero), 0.0);
    }

    #[test]
    fn linearized_inverse_recovers_eigenfunction() {
        let grid = Grid::new(2, 33).unwrap();
        let v = GridFunction::sine_mode(grid);
        let rhs = v.scale(grid.dirichlet_lambda1());
        let zero = GridFunction::zeros(grid);
        let w = apply_linearized_inverse(&grid, 0.0, &zero, &rhs).unwrap();
        assert!(w.sub(&v).linf_norm() < 1e-10);
        let w0 = apply_linearized_inverse(&grid, 0.0, &zero, &zero).unwrap();
        assert_eq!(w0.linf_norm(), 0.0);
    }

    #[test]
    fn green_pole_on_boundary_is_rejected() {
        let grid = Grid::new(2, 9).unwrap();
        let zero = GridFunction::zeros(grid);
        assert!(green_column(&grid, 1.0, &zero, &[0, 4]).is_err());
        assert!(green_column(&grid, 1.0, &zero, &[4, 8]).is_err());
    }

    #[test]
    fn eigenvalue_closed_form() {
        for n in [17, 33] {
            let grid = Grid::new(2, n).unwrap();
            let lam = smallest_eigenvalue(&grid);
            let exact = grid.dirichlet_lambda1();
            assert!(((lam - exact) / exact).abs() < 1e-10);
        }
    }
}
