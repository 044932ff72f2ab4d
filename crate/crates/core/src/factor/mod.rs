//! Sparse direct factorisations and the exact-inverse preconditioner built on them.

pub mod cholesky;
pub mod lu;
pub mod ordering;

use std::sync::Arc;

pub use cholesky::{chol_factor, CholeskyFactor, CholeskySymbolic};
pub use lu::{lu_factor, lu_factor_with_order, LuFactor};
pub use ordering::{rcm_order, Permutation};

use crate::error::{check_dim, Error, Result};
use crate::la::{AffineOperator, LinearOperator, LinearOperatorHandle, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Cholesky,
    Lu,
}

/// Either factorisation behind one solve interface.
#[derive(Debug, Clone)]
pub enum Factorization {
    Cholesky(CholeskyFactor),
    Lu(LuFactor),
}

impl Factorization {
    /// Cholesky when `spd_hint` is set, LU otherwise.
    pub fn new(a: &SparseMatrix, spd_hint: bool) -> Result<Self> {
        if spd_hint {
            chol_factor(a).map(Self::Cholesky)
        } else {
            lu_factor(a).map(Self::Lu)
        }
    }

    pub fn kind(&self) -> FactorKind {
        match self {
            Self::Cholesky(_) => FactorKind::Cholesky,
            Self::Lu(_) => FactorKind::Lu,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Cholesky(f) => f.dim(),
            Self::Lu(f) => f.dim(),
        }
    }

    /// Symmetric ordering (Cholesky) or column ordering (LU).
    pub fn permutation(&self) -> &Permutation {
        match self {
            Self::Cholesky(f) => f.permutation(),
            Self::Lu(f) => f.column_permutation(),
        }
    }

    pub fn lower(&self) -> SparseMatrix {
        match self {
            Self::Cholesky(f) => f.lower(),
            Self::Lu(f) => f.lower(),
        }
    }

    pub fn upper(&self) -> Option<SparseMatrix> {
        match self {
            Self::Cholesky(_) => None,
            Self::Lu(f) => Some(f.upper()),
        }
    }

    pub fn pivots(&self) -> Option<Vec<usize>> {
        match self {
            Self::Cholesky(_) => None,
            Self::Lu(f) => Some(f.row_pivots()),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Self::Cholesky(f) => f.solve(b),
            Self::Lu(f) => f.solve(b),
        }
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Self::Cholesky(f) => f.solve(b),
            Self::Lu(f) => f.solve_transpose(b),
        }
    }
}

/// `x ↦ A⁻¹x` backed by a stored factorisation.
#[derive(Debug, Clone)]
pub struct FactorizedInverse {
    factor: Factorization,
}

impl FactorizedInverse {
    pub fn new(factor: Factorization) -> Self {
        Self { factor }
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factor
    }
}

impl LinearOperator for FactorizedInverse {
    fn dim(&self) -> usize {
        self.factor.dim()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.factor.solve(x)
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        self.factor.solve_transpose(x)
    }
}

/// Block-diagonal inverse `blkdiag(A₁₁⁻¹, …, A_kk⁻¹)` over contiguous index blocks.
#[derive(Debug, Clone)]
pub struct BlockDiagonalInverse {
    offsets: Vec<usize>,
    blocks: Vec<Factorization>,
}

impl BlockDiagonalInverse {
    /// `offsets` are block boundaries: `[0, n₁, n₁+n₂, …, n]`.
    pub fn new(a: &SparseMatrix, offsets: &[usize], spd_hint: bool) -> Result<Self> {
        if offsets.len() < 2 || offsets[0] != 0 || *offsets.last().unwrap() != a.nrows() {
            return Err(Error::InvalidInput("block offsets must run from 0 to n".into()));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("block offsets must increase strictly".into()));
        }
        let blocks = offsets
            .windows(2)
            .map(|w| Factorization::new(&a.principal_block(w[0]..w[1]), spd_hint))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            offsets: offsets.to_vec(),
            blocks,
        })
    }

    fn apply_with(&self, x: &[f64], adjoint: bool) -> Vec<f64> {
        let mut y = Vec::with_capacity(x.len());
        for (w, f) in self.offsets.windows(2).zip(&self.blocks) {
            let part = &x[w[0]..w[1]];
            y.extend(if adjoint { f.solve_transpose(part) } else { f.solve(part) });
        }
        y
    }
}

impl LinearOperator for BlockDiagonalInverse {
    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_with(x, false)
    }

    fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        self.apply_with(x, true)
    }
}

/// `B = A(θ₀)⁻¹`, factorised once; Cholesky when `spd_hint`, LU otherwise.
pub fn make_exact_preconditioner(
    op: &AffineOperator,
    theta0: &[f64],
    spd_hint: bool,
) -> Result<LinearOperatorHandle> {
    let a = op.assemble(theta0)?;
    Ok(Arc::new(FactorizedInverse::new(Factorization::new(&a, spd_hint)?)))
}

/// Block-diagonal variant of [`make_exact_preconditioner`].
pub fn make_block_preconditioner(
    op: &AffineOperator,
    theta0: &[f64],
    offsets: &[usize],
    spd_hint: bool,
) -> Result<LinearOperatorHandle> {
    let a = op.assemble(theta0)?;
    check_dim("block preconditioner", a.nrows(), *offsets.last().unwrap_or(&0))?;
    Ok(Arc::new(BlockDiagonalInverse::new(&a, offsets, spd_hint)?))
}
