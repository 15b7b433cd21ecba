//! Numerical laboratory for fluctuations in the homogenization of
//! semilinear elliptic equations
//!
//! ```text
//! -Δu^ε + q(x/ε, ω) u^ε + f(u^ε) = g   in (0,1)^d,   u^ε = 0 on the boundary,
//! ```
//!
//! with rapidly oscillating stationary random potentials. The crate solves
//! the heterogeneous and homogenized problems by finite differences,
//! computes the corrector `χ^ε = -𝒢_u ν_ε u` and the remaining expansion
//! terms of `u^ε - u`, predicts the limiting Gaussian variance of
//! `⟨φ, u^ε - u⟩`, and checks error scaling and limiting laws by Monte Carlo.
//!
//! Modules, bottom up: [`grid`], [`randfield`], [`pde`], [`fluctuation`],
//! [`mc`], and the command-line front end in [`cli`].

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod cli;
pub mod error;
pub mod fluctuation;
pub mod grid;
pub mod mc;
pub mod pde;
pub mod randfield;
pub mod seed;
mod spectral;

pub use error::{Error, Result};
pub use grid::{inner_product, l2_norm, laplacian_apply, linf_norm, Grid, GridFunction};
pub use pde::{
    apply_linearized_inverse, energy, green_column, smallest_eigenvalue, solve_homogenized,
    solve_semilinear, LinearizedOperator, Nonlinearity, SolveReport, SolverOptions,
};
