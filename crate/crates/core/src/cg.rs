//! Preconditioned conjugate gradient for the SPD systems `(-Δ_h + c) w = r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_shifted_laplacian, dot, Grid, GridFunction};
use crate::spectral::ShiftedPoissonSolver;

/// Preconditioner for the linearized solves.
///
/// `FastSine` inverts `-Δ_h + s` exactly through the sine transform, with `s`
/// the midpoint of the coefficient range. The preconditioned spectrum then
/// lies in `[(λ₁+c_min)/(λ₁+s), (λ₁+c_max)/(λ₁+s)]`, so the iteration count
/// is independent of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    #[default]
    FastSine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the interior node count.
    pub max_iter_factor: usize,
    pub preconditioner: Preconditioner,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter_factor: 10,
            preconditioner: Preconditioner::default(),
        }
    }
}

/// The operator `-Δ_h + c(x)` on a grid.
pub struct ShiftedOperator {
    grid: Grid,
    coef: Vec<f64>,
    precond: Option<ShiftedPoissonSolver>,
    options: CgOptions,
}

impl ShiftedOperator {
    pub fn new(grid: Grid, coef: Vec<f64>, options: CgOptions) -> Self {
        assert_eq!(coef.len(), grid.interior_count());
        let precond = match options.preconditioner {
            Preconditioner::None => None,
            Preconditioner::FastSine => {
                let lo = coef.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = coef.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mid = 0.5 * (lo + hi);
                // Keep the preconditioner itself positive definite.
                let shift = mid.max(-0.5 * grid.dirichlet_lambda1());
                Some(ShiftedPoissonSolver::new(&grid, shift))
            }
        };
        Self {
            grid,
            coef,
            precond,
            options,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficient(&self) -> &[f64] {
        &self.coef
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        apply_shifted_laplacian(&self.grid, v, Some(&self.coef), out);
    }

    pub fn apply_fn(&self, v: &GridFunction) -> GridFunction {
        let mut out = vec![0.0; v.len()];
        self.apply(v.values(), &mut out);
        GridFunction::from_values(self.grid, out)
    }

    /// Solves `A w = rhs` from a zero initial guess; returns `w` and the
    /// iteration count.
    pub fn solve(&self, rhs: &GridFunction) -> Result<(GridFunction, usize)> {
        assert_eq!(rhs.grid(), &self.grid, "right-hand side lives on another grid");
        let (w, iters) = self.solve_slice(rhs.values())?;
        Ok((GridFunction::from_values(self.grid, w), iters))
    }

    pub(crate) fn solve_slice(&self, rhs: &[f64]) -> Result<(Vec<f64>, usize)> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        let rhs_norm = dot(rhs, rhs).sqrt();
        if rhs_norm == 0.0 {
            return Ok((x, 0));
        }
        let max_iter = self.options.max_iter_factor * n;
        let target = self.options.rel_tol * rhs_norm;

        let mut r = rhs.to_vec();
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=max_iter {
            self.apply(&p, &mut ap);
            let curvature = dot(&p, &ap);
            if curvature <= 0.0 || !curvature.is_finite() {
                return Err(Error::Ellipticity {
                    iteration: it,
                    curvature,
                });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= target {
                return Ok((x, it));
            }
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let rnorm = dot(&r, &r).sqrt();
        Err(Error::CgNonConvergence {
            iterations: max_iter,
            relative_residual: rnorm / rhs_norm,
        })
    }

    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        match &self.precond {
            Some(p) => p.solve(r, z),
            None => z.copy_from_slice(r),
        }
    }
}
