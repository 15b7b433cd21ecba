use thiserror::Error;

use crate::pde::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, model or study parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// The structural margin `λ₁ + q_min + min f′ ≥ c` does not hold.
    #[error("validation error: {0}")]
    Validation(String),

    #[error(
        "circulant embedding is not nonnegative definite: min/max eigenvalue ratio {min_ratio:.3e} \
         on the largest admissible torus of {torus} points per axis"
    )]
    Embedding { min_ratio: f64, torus: usize },

    /// Conjugate gradient met a direction of non-positive curvature.
    #[error("linearized operator is not elliptic: curvature {curvature:.3e} at CG iteration {iteration}")]
    Ellipticity { iteration: usize, curvature: f64 },

    #[error("conjugate gradient stalled after {iterations} iterations at relative residual {relative_residual:.3e}")]
    CgNonConvergence {
        iterations: usize,
        relative_residual: f64,
    },

    #[error(
        "Newton iteration did not converge: {} iterations, residual {:.3e}",
        report.newton_iterations,
        report.final_residual_l2
    )]
    NewtonNonConvergence { report: SolveReport },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate samples: {0}")]
    Degenerate(String),

    #[error("realization with seed {seed} failed: {source}")]
    Realization {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors raised by the numerical solvers rather than by bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Ellipticity { .. }
            | Error::CgNonConvergence { .. }
            | Error::NewtonNonConvergence { .. }
            | Error::Embedding { .. } => true,
            Error::Realization { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
