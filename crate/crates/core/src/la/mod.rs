//! Dense and sparse kernels, inner products and the affine operator model.

pub mod affine;
pub mod dense;
pub mod mm;
pub mod operator;
pub mod sparse;
pub mod vector;
pub mod weight;

pub use affine::{assemble_affine, AffineOperator, ThetaMap};
pub use dense::{dense_solve, DenseLu, DenseMatrix};
pub use operator::{AffineAt, IdentityOperator, LinearOperator, LinearOperatorHandle};
pub use sparse::SparseMatrix;
pub use weight::{gram_schmidt_m, gram_schmidt_m_indexed, m_inner, SpdWeight, DEFAULT_DROP_TOL};
