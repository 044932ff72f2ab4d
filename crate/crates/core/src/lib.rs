//! Reduced Krylov basis methods for affine-parametric linear systems
//! `A(μ) u = f` with `A(μ) = Σ θ_j(μ) A_j`.
//!
//! One offline Krylov run (PCG, GMRES or BiCG, preconditioned by an exact
//! inverse `B = A(μ₀)⁻¹`) yields a small basis; online solves then cost
//! `O(m³)` per parameter and never touch `n`-sized data except for the lift.

pub mod error;
pub mod factor;
pub mod krylov;
pub mod la;
pub mod problems;
pub mod rkbm;

pub use error::{Error, Result};
