//! Affine parametric operators `A(μ) = Σ_j θ_j(μ) A_j`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::la::SparseMatrix;

/// The parameter-independent terms `A_1 … A_J` plus a precomputed union pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    terms: Vec<SparseMatrix>,
    dim: usize,
    union: SparseMatrix,
    // slot in `union.values` of every stored entry of every term
    scatter: Vec<Vec<usize>>,
}

impl AffineOperator {
    pub fn new(terms: Vec<SparseMatrix>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("affine operator needs at least one term".into()))?;
        let dim = first.nrows();
        for t in &terms {
            if !t.is_square() {
                return Err(Error::InvalidInput("affine terms must be square".into()));
            }
            check_dim("affine term", dim, t.nrows())?;
        }
        let refs: Vec<&SparseMatrix> = terms.iter().collect();
        let mut union = SparseMatrix::linear_combination(&refs, &vec![0.0; terms.len()])?;
        union.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let scatter = terms
            .iter()
            .map(|t| {
                let mut slots = Vec::with_capacity(t.nnz());
                for i in 0..dim {
                    let base = union.row_starts()[i];
                    let ucols = union.row(i).0;
                    for &j in t.row(i).0 {
                        let k = ucols.binary_search(&j).expect("union contains every term entry");
                        slots.push(base + k);
                    }
                }
                slots
            })
            .collect();
        Ok(Self {
            terms,
            dim,
            union,
            scatter,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of affine terms `J`.
    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[SparseMatrix] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> &SparseMatrix {
        &self.terms[j]
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// `Σ θ_j A_j` on the union sparsity pattern.
    pub fn assemble(&self, theta: &[f64]) -> Result<SparseMatrix> {
        self.check_theta(theta)?;
        let mut out = self.union.clone();
        let vals = out.values_mut();
        for ((t, slots), &c) in self.terms.iter().zip(&self.scatter).zip(theta) {
            for (&slot, &v) in slots.iter().zip(t.values()) {
                vals[slot] += c * v;
            }
        }
        Ok(out)
    }

    /// `A(θ) x` evaluated term by term, without assembly.
    pub fn apply(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        check_dim("affine apply", self.dim, x.len())?;
        let mut y = vec![0.0; self.dim];
        let mut buf = vec![0.0; self.dim];
        for (t, &c) in self.terms.iter().zip(theta) {
            if c != 0.0 {
                t.spmv_into(x, &mut buf);
                crate::la::vector::axpy(c, &buf, &mut y);
            }
        }
        Ok(y)
    }

    /// `A(θ)ᵀ x`.
    pub fn apply_transpose(&self, theta: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        check_dim("affine apply_transpose", self.dim, x.len())?;
        let mut y = vec![0.0; self.dim];
        let mut buf = vec![0.0; self.dim];
        for (t, &c) in self.terms.iter().zip(theta) {
            if c != 0.0 {
                t.spmv_transpose_into(x, &mut buf);
                crate::la::vector::axpy(c, &buf, &mut y);
            }
        }
        Ok(y)
    }

    /// Whether every term is symmetric to `1e-12` relative.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|t| t.is_symmetric(1e-12))
    }
}

/// Free function form of [`AffineOperator::assemble`].
pub fn assemble_affine(op: &AffineOperator, theta: &[f64]) -> Result<SparseMatrix> {
    op.assemble(theta)
}

/// Coefficient functions `μ ↦ θ(μ)` for the supported problem families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaMap {
    /// `θ_j = μ_j`.
    Linear { arity: usize },
    /// `(ν₁, ν₂) ↦ (ν₁, cos ν₂)`.
    ConvectionDiffusion,
    /// `(ν₁, ν₂) ↦ (1/ν₁, ν₂)`.
    StiffnessMass,
    /// `μ ↦ (1, −μ²)`.
    Helmholtz,
    /// Lamé form `(ν₁, ν₂) ↦ (ν₁/(1+ν₂), ν₁ν₂/((1+ν₂)(1−2ν₂)))`, `ν₂ ∈ (0, ½)`.
    Elasticity,
}

impl ThetaMap {
    pub fn arity(&self) -> usize {
        match self {
            ThetaMap::Linear { arity } => *arity,
            _ => 2,
        }
    }

    /// Number of parameter components `d`.
    pub fn param_dim(&self) -> usize {
        match self {
            ThetaMap::Linear { arity } => *arity,
            ThetaMap::Helmholtz => 1,
            _ => 2,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ThetaMap::Linear { .. } => "linear",
            ThetaMap::ConvectionDiffusion => "convection_diffusion",
            ThetaMap::StiffnessMass => "stiffness_mass",
            ThetaMap::Helmholtz => "helmholtz",
            ThetaMap::Elasticity => "elasticity",
        }
    }

    pub fn eval(&self, mu: &[f64]) -> Result<Vec<f64>> {
        check_dim("parameter point", self.param_dim(), mu.len())?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameter {mu:?}")));
        }
        let theta = match self {
            ThetaMap::Linear { .. } => mu.to_vec(),
            ThetaMap::ConvectionDiffusion => vec![mu[0], mu[1].cos()],
            ThetaMap::StiffnessMass => {
                if mu[0] == 0.0 {
                    return Err(Error::InvalidParameter("nu_1 must be nonzero".into()));
                }
                vec![1.0 / mu[0], mu[1]]
            }
            ThetaMap::Helmholtz => vec![1.0, -mu[0] * mu[0]],
            ThetaMap::Elasticity => {
                let (n1, n2) = (mu[0], mu[1]);
                if !(n2 > 0.0 && n2 < 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "nu_2 = {n2} outside (0, 1/2)"
                    )));
                }
                vec![n1 / (1.0 + n2), n1 * n2 / ((1.0 + n2) * (1.0 - 2.0 * n2))]
            }
        };
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite theta at {mu:?}")));
        }
        Ok(theta)
    }
}
