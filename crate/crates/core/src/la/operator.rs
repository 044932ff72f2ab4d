//! Opaque linear operators with an adjoint.

use std::sync::Arc;

use crate::la::{AffineOperator, SparseMatrix};

/// A square linear map `x ↦ T x` together with `x ↦ Tᵀ x`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64>;
}

/// Shared handle to an immutable operator (preconditioners in particular).
pub type LinearOperatorHandle = Arc<dyn LinearOperator>;

#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.spmv_into(x, &mut y);
        y
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols()];
        self.spmv_transpose_into(x, &mut y);
        y
    }
}

/// `A(θ)` for a fixed coefficient vector, applied term by term.
pub struct AffineAt<'a> {
    op: &'a AffineOperator,
    theta: Vec<f64>,
}

impl<'a> AffineAt<'a> {
    pub fn new(op: &'a AffineOperator, theta: &[f64]) -> crate::Result<Self> {
        if theta.len() != op.arity() {
            return Err(crate::Error::ArityMismatch {
                expected: op.arity(),
                got: theta.len(),
            });
        }
        Ok(Self {
            op,
            theta: theta.to_vec(),
        })
    }
}

impl LinearOperator for AffineAt<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.op.apply(&self.theta, x).expect("dimensions checked at construction")
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        self.op
            .apply_transpose(&self.theta, x)
            .expect("dimensions checked at construction")
    }
}
