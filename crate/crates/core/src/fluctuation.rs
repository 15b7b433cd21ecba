//! Corrector, expansion terms of `u^ε - u`, and predicted limit variances.
//!
//! With `ξ = u^ε - u`, `r = f(u^ε) - f(u) - f′(u) ξ` and `𝒢_u` the inverse
//! of `-Δ_h + q̄ + f′(u)`,
//!
//! ```text
//! ξ = -𝒢ν u + 𝒢ν𝒢ν u + 𝒢ν𝒢ν ξ - 𝒢 r + 𝒢ν𝒢 r
//! ```
//!
//! holds exactly for the discrete problems.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::{LinearizedOperator, Nonlinearity};
use crate::spectral::TorusFft;

/// `χ^ε = -𝒢_u (ν_ε u)`.
pub fn corrector(
    grid: &Grid,
    q_mean: f64,
    fprime_u: &GridFunction,
    nu_eps: &GridFunction,
    u: &GridFunction,
) -> Result<GridFunction> {
    let op = LinearizedOperator::new(grid, q_mean, fprime_u);
    corrector_with(&op, nu_eps, u)
}

pub fn corrector_with(op: &LinearizedOperator, nu_eps: &GridFunction, u: &GridFunction) -> Result<GridFunction> {
    Ok(op.solve(&nu_eps.hadamard(u))?.neg())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerms {
    /// `-𝒢ν u`, the corrector.
    pub t1: GridFunction,
    /// `𝒢ν𝒢ν u`.
    pub t2: GridFunction,
    /// `𝒢ν𝒢ν ξ`.
    pub t3: GridFunction,
    /// `-𝒢 r`.
    pub t4: GridFunction,
    /// `𝒢ν𝒢 r`.
    pub t5: GridFunction,
    pub xi: GridFunction,
    /// `ξ - χ`.
    pub z: GridFunction,
    pub r_eps: GridFunction,
    /// `(f(u^ε) - f(u)) / ξ`, with `f′(u)` where `ξ = 0`.
    pub h_eps: GridFunction,
}

impl ExpansionTerms {
    pub fn sum(&self) -> GridFunction {
        let mut s = self.t1.clone();
        for t in [&self.t2, &self.t3, &self.t4, &self.t5] {
            s.axpy(1.0, t);
        }
        s
    }

    /// `‖t1 + … + t5 - ξ‖_{L²}`.
    pub fn identity_defect(&self) -> f64 {
        self.sum().sub(&self.xi).l2_norm()
    }
}

/// All expansion terms for one realization. `u_eps` and `u` must be
/// converged solves of the heterogeneous and homogenized problems.
pub fn expansion_terms(
    grid: &Grid,
    q_mean: f64,
    nu_eps: &GridFunction,
    nl: &Nonlinearity,
    u_eps: &GridFunction,
    u: &GridFunction,
) -> Result<ExpansionTerms> {
    let op = LinearizedOperator::around(grid, q_mean, nl, u);
    expansion_terms_with(&op, nu_eps, nl, u_eps, u)
}

pub fn expansion_terms_with(
    op: &LinearizedOperator,
    nu_eps: &GridFunction,
    nl: &Nonlinearity,
    u_eps: &GridFunction,
    u: &GridFunction,
) -> Result<ExpansionTerms> {
    let xi = u_eps.sub(u);
    let t1 = corrector_with(op, nu_eps, u)?;
    // 𝒢ν𝒢νu = 𝒢(ν · (−t1)).
    let t2 = op.solve(&nu_eps.hadamard(&t1).neg())?;
    let g_nu_xi = op.solve(&nu_eps.hadamard(&xi))?;
    let t3 = op.solve(&nu_eps.hadamard(&g_nu_xi))?;

    let (r_vals, h_vals): (Vec<f64>, Vec<f64>) = u_eps
        .values()
        .iter()
        .zip(u.values())
        .map(|(&ue, &uh)| {
            let d = ue - uh;
            let df = nl.f(ue) - nl.f(uh);
            let r = df - nl.df(uh) * d;
            let h = if d == 0.0 { nl.df(uh) } else { df / d };
            (r, h)
        })
        .unzip();
    let r_eps = GridFunction::from_values(*op.grid(), r_vals);
    let h_eps = GridFunction::from_values(*op.grid(), h_vals);
    let t4 = op.solve(&r_eps)?.neg();
    let t5 = op.solve(&nu_eps.hadamard(&t4).neg())?;
    let z = xi.sub(&t1);
    Ok(ExpansionTerms {
        t1,
        t2,
        t3,
        t4,
        t5,
        xi,
        z,
        r_eps,
        h_eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationRange {
    ShortRange,
    LongRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariancePrediction {
    pub sigma2_phi: f64,
    pub kind: CorrelationRange,
    /// `m = 𝒢_u φ`.
    pub m_field: GridFunction,
}

/// `σ²_φ = σ² ∫ (𝒢_u φ)² u²` by the nodal quadrature.
pub fn predicted_variance_short(
    grid: &Grid,
    u: &GridFunction,
    phi: &GridFunction,
    sigma2: f64,
    q_mean: f64,
    fprime_u: &GridFunction,
) -> Result<VariancePrediction> {
    if !(sigma2 > 0.0) {
        return Err(Error::Config(format!("sigma2 must be positive, got {sigma2}")));
    }
    let m = LinearizedOperator::new(grid, q_mean, fprime_u).solve(phi)?;
    let mu = m.hadamard(u);
    Ok(VariancePrediction {
        sigma2_phi: sigma2 * mu.inner(&mu),
        kind: CorrelationRange::ShortRange,
        m_field: m,
    })
}

/// `σ²_{α,φ} = κ ∫∫ (u m)(y) (u m)(z) |y - z|^{-α}`, as a double nodal sum
/// evaluated by zero-padded FFT convolution.
///
/// The singular diagonal uses the mean of `|y - z|^{-α}` over the ball of
/// volume `h^d` centred at `z`, `d/(d-α) · ρ_h^{-α}`.
pub fn predicted_variance_long(
    grid: &Grid,
    u: &GridFunction,
    phi: &GridFunction,
    kappa: f64,
    alpha: f64,
    q_mean: f64,
    fprime_u: &GridFunction,
) -> Result<VariancePrediction> {
    let dim = grid.dim();
    if !(alpha > 0.0 && alpha < dim as f64) {
        return Err(Error::Config(format!("alpha must lie in (0, {dim}), got {alpha}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    let m = LinearizedOperator::new(grid, q_mean, fprime_u).solve(phi)?;
    let w = m.hadamard(u);
    let quad = riesz_quadratic_form(grid, w.values(), alpha);
    Ok(VariancePrediction {
        sigma2_phi: kappa * grid.cell_volume().powi(2) * quad,
        kind: CorrelationRange::LongRange,
        m_field: m,
    })
}

/// Diagonal weight of the Riesz kernel on one cell.
pub fn riesz_self_weight(grid: &Grid, alpha: f64) -> f64 {
    let d = grid.dim() as f64;
    let unit_ball = PI.powf(d / 2.0) / gamma_half_integer(grid.dim() + 2);
    let radius = grid.h() * (1.0 / unit_ball).powf(1.0 / d);
    d / (d - alpha) * radius.powf(-alpha)
}

/// `Γ(k/2)` for small positive integers `k`.
fn gamma_half_integer(k: usize) -> f64 {
    match k {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half_integer(k - 2),
    }
}

/// `Σ_{i,j} w_i w_j K(x_i - x_j)` with `K(x) = |x|^{-α}` off the diagonal.
fn riesz_quadratic_form(grid: &Grid, w: &[f64], alpha: f64) -> f64 {
    let dim = grid.dim();
    let m = grid.interior_per_axis();
    let side = (2 * m).next_power_of_two();
    let fft = TorusFft::new(side, dim);
    let total = fft.len();
    let h = grid.h();
    let self_weight = riesz_self_weight(grid, alpha);

    let mut kernel = vec![Complex64::new(0.0, 0.0); total];
    let mut padded = vec![Complex64::new(0.0, 0.0); total];
    for (idx, kv) in kernel.iter_mut().enumerate() {
        let mut rest = idx;
        let mut r2 = 0.0;
        for _ in 0..dim {
            let k = rest % side;
            rest /= side;
            let off = k.min(side - k) as f64;
            r2 += off * off;
        }
        *kv = if r2 == 0.0 {
            Complex64::new(self_weight, 0.0)
        } else {
            Complex64::new((r2.sqrt() * h).powf(-alpha), 0.0)
        };
    }
    for (i, &wi) in w.iter().enumerate() {
        let node = grid.node_of(i);
        let t = (0..dim).fold(0, |acc, a| acc * side + (node[a] - 1));
        padded[t] = Complex64::new(wi, 0.0);
    }
    fft.forward(&mut kernel);
    fft.forward(&mut padded);
    // Σ_ij w_i w_j K(i-j) = (1/N) Σ_k |Ŵ_k|² K̂_k for real, even K.
    let acc: f64 = kernel
        .iter()
        .zip(&padded)
        .map(|(k, p)| k.re * p.norm_sqr())
        .sum();
    acc / total as f64
}
