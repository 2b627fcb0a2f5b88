//! Dense real linear algebra and a small two-phase simplex solver.
//!
//! Everything here is sized for the problems the rest of the crate builds:
//! matrices with at most a few hundred rows and linear programs with a few
//! dozen variables.

mod linalg;
mod lp;
mod mat;

pub use linalg::{
    lu_solve, nullspace, numeric_rank, orthonormal_basis, rank_threshold, singular_values, svd,
    symmetric_eigen, symmetric_eigenvalues, Svd, SymmetricEigen,
};
pub use lp::{lp_solve, LinExpr, LpBuilder, LpProblem, LpSolution, Sense, Var};
pub use mat::{dot, max_abs, norm, Mat};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical cutoffs shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values at or below `rank_tol * max(1, σ_max)` count as zero.
    pub rank_tol: f64,
    /// Smallest admissible pivot and the simplex feasibility tolerance.
    pub lp_pivot_tol: f64,
    /// Acceptance threshold for certificate residuals.
    pub residual_tol: f64,
    /// Eigenvalues down to `-psd_tol * trace` count as non-negative.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            lp_pivot_tol: 1e-9,
            residual_tol: 1e-8,
            psd_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("rank_tol", self.rank_tol),
            ("lp_pivot_tol", self.lp_pivot_tol),
            ("residual_tol", self.residual_tol),
            ("psd_tol", self.psd_tol),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_residual_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }
}
