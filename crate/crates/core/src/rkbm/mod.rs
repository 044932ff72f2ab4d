//! Reduced models: offline construction from Krylov traces and the online solvers.

mod build;
mod diagnostics;
mod online;
mod persist;

pub use build::{build_multi, build_rcgbm, build_rkbm1, build_rkbm2, MultiMode};
pub use diagnostics::{diagnostics_for, relative_error_in, Diagnostics};
pub use online::{online_coords, online_solve, online_sweep, SweepPoint};
pub use persist::{export_model, import_model, MANIFEST_FILE, PAYLOAD_FILE};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::la::{DenseMatrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Galerkin,
    LeastSquares,
    PetrovGalerkin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Columns scaled to unit Euclidean norm, as harvested.
    UnitEuclidean,
    /// Columns M-orthonormalised with rank truncation.
    MOrthonormal,
}

/// Where a basis came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisMeta {
    /// `rcgbm`, `rkbm1`, `rkbm2`, `mrcgbm`, `mrkbm1` or `mrkbm2`.
    pub method: String,
    /// Coefficient vectors `θ(μ_l)` of the harvest instances.
    pub thetas: Vec<Vec<f64>>,
    /// Requested step budget per instance.
    pub m: usize,
    /// Spanning vectors actually harvested per instance.
    pub harvested: Vec<usize>,
    pub drop_tol: Option<f64>,
    pub normalization: Normalization,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// A reduced model with every parameter-independent block precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub(crate) variant: Variant,
    pub(crate) arity: usize,
    pub(crate) p: DenseMatrix,
    pub(crate) q: Option<DenseMatrix>,
    /// Galerkin: `PᵀA_jP`; Petrov–Galerkin: `QᵀA_jP`.
    pub(crate) reduced_a: Vec<DenseMatrix>,
    pub(crate) reduced_f: Vec<f64>,
    /// `G_{jk} = (BA_jP)ᵀ M (BA_kP)` stored row-major in `(j, k)`.
    pub(crate) ls_gram: Vec<DenseMatrix>,
    /// `h_j = (BA_jP)ᵀ M B f`.
    pub(crate) ls_rhs: Vec<Vec<f64>>,
    /// `‖B f‖²_M`, so the online least-squares residual needs no `n`-sized work.
    pub(crate) bf_norm_sq: f64,
    pub(crate) meta: BasisMeta,
}

impl ReducedModel {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of affine terms `J`.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Full dimension `n`.
    pub fn full_dim(&self) -> usize {
        self.p.nrows()
    }

    /// Reduced dimension.
    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    pub fn q(&self) -> Option<&DenseMatrix> {
        self.q.as_ref()
    }

    pub fn reduced_a(&self) -> &[DenseMatrix] {
        &self.reduced_a
    }

    pub fn reduced_f(&self) -> &[f64] {
        &self.reduced_f
    }

    pub fn ls_gram(&self, j: usize, k: usize) -> &DenseMatrix {
        &self.ls_gram[j * self.arity + k]
    }

    pub fn ls_rhs(&self) -> &[Vec<f64>] {
        &self.ls_rhs
    }

    pub fn bf_norm_sq(&self) -> f64 {
        self.bf_norm_sq
    }

    pub fn meta(&self) -> &BasisMeta {
        &self.meta
    }

    /// Consistency of all block shapes.
    pub fn validate(&self) -> Result<()> {
        let (n, r, j) = (self.full_dim(), self.dim(), self.arity);
        if r == 0 {
            return Err(Error::EmptyModel);
        }
        let square = |m: &DenseMatrix, what: &'static str| -> Result<()> {
            check_dim(what, r, m.nrows())?;
            check_dim(what, r, m.ncols())
        };
        match self.variant {
            Variant::Galerkin | Variant::PetrovGalerkin => {
                if self.reduced_a.len() != j {
                    return Err(Error::ArityMismatch { expected: j, got: self.reduced_a.len() });
                }
                for a in &self.reduced_a {
                    square(a, "reduced block")?;
                }
                check_dim("reduced rhs", r, self.reduced_f.len())?;
            }
            Variant::LeastSquares => {
                if self.ls_gram.len() != j * j || self.ls_rhs.len() != j {
                    return Err(Error::ArityMismatch { expected: j, got: self.ls_rhs.len() });
                }
                for g in &self.ls_gram {
                    square(g, "gram block")?;
                }
                for h in &self.ls_rhs {
                    check_dim("least-squares rhs", r, h.len())?;
                }
            }
        }
        if let Some(q) = &self.q {
            check_dim("test basis rows", n, q.nrows())?;
            check_dim("test basis cols", r, q.ncols())?;
        } else if self.variant == Variant::PetrovGalerkin {
            return Err(Error::InvalidInput("petrov-galerkin model without test basis".into()));
        }
        Ok(())
    }
}

/// `Lᵀ A R` for tall `L`, `R` (columns of `A R` formed by sparse products).
pub(crate) fn project(left: &DenseMatrix, a: &SparseMatrix, right: &DenseMatrix) -> DenseMatrix {
    let ar: Vec<Vec<f64>> = right.columns().map(|c| a.spmv(c).expect("basis rows match operator")).collect();
    gram(left, &ar)
}

/// `Lᵀ [c₀ c₁ …]`.
pub(crate) fn gram(left: &DenseMatrix, cols: &[Vec<f64>]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(left.ncols(), cols.len());
    for (k, c) in cols.iter().enumerate() {
        for (i, l) in left.columns().enumerate() {
            out.set(i, k, crate::la::vector::dot(l, c));
        }
    }
    out
}
