//! Instrumented Krylov engines.
//!
//! Every run records the full per-step history (iterates, directions,
//! preconditioned residuals, scalars) because the reduced-basis builders
//! harvest their spanning vectors from it. Runs are indexed by a step budget
//! `m`: a run performs at most `m − 1` updates, so it produces `u₀, …, u_{m−1}`
//! and `m` spanning vectors.

mod bicg;
mod gmres;
mod pcg;

pub use bicg::bicg_run;
pub use gmres::gmres_run;
pub use pcg::pcg_run;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrylovMethod {
    Pcg,
    Gmres,
    Bicg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIter,
    Tolerance,
    Breakdown,
}

/// Per-iteration history of one Krylov run.
///
/// `iterates[k]` is `u_k` (starting from `u₀ = 0`). For PCG/BiCG,
/// `directions[k]` is `p_k`; for GMRES it holds the M-orthonormal Arnoldi
/// vectors. `residual_norms[k]` belongs to `u_k`: Euclidean `‖f − A u_k‖` for
/// PCG/BiCG and `‖B(f − A u_k)‖_M` for GMRES.
#[derive(Debug, Clone, Default)]
pub struct KrylovTrace {
    pub method: Option<KrylovMethod>,
    pub iterates: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    pub dual_directions: Vec<Vec<f64>>,
    pub preconditioned_residuals: Vec<Vec<f64>>,
    pub dual_preconditioned_residuals: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub stop_reason: Option<StopReason>,
}

impl KrylovTrace {
    fn new(method: KrylovMethod) -> Self {
        Self {
            method: Some(method),
            ..Default::default()
        }
    }

    /// Number of updates performed.
    pub fn steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    /// The last iterate.
    pub fn solution(&self) -> &[f64] {
        self.iterates.last().map(Vec::as_slice).unwrap_or(&[])
    }

    fn fail(self, reason: impl Into<String>) -> Error {
        Error::NumericalBreakdown {
            iterations: self.steps(),
            reason: reason.into(),
            partial: Some(Box::new(self)),
        }
    }
}
