//! Affine-parametric model problems on the structured triangulation of `[−1,1]²`.
//!
//! All generators use linear elements with homogeneous Dirichlet conditions,
//! exact element integrals and a constant source. Outputs are deterministic.

mod export;
pub mod mesh;

pub use export::{export_bundle, import_bundle, BUNDLE_MANIFEST};
pub use mesh::{DofMap, Element, StructuredMesh};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{AffineOperator, SparseMatrix, ThetaMap};
use mesh::{assemble, load};

/// Constant source used by every generator.
pub const SOURCE: f64 = 10.0;
/// Convection field of the convection–diffusion problem.
pub const CONVECTION: [f64; 2] = [1.0, -2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Norms {
    pub h1_semi: SparseMatrix,
    pub l2: SparseMatrix,
}

impl Norms {
    /// `h1_semi + l2`, the full H¹ norm.
    pub fn combined(&self) -> SparseMatrix {
        SparseMatrix::linear_combination(&[&self.h1_semi, &self.l2], &[1.0, 1.0]).expect("norm matrices share a shape")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshMeta {
    /// Cells per side.
    pub nx: usize,
    pub ny: usize,
    /// Vertices including the boundary.
    pub nv: usize,
    /// Unknowns.
    pub n_dofs: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBundle {
    pub kind: ProblemKind,
    pub op: AffineOperator,
    pub rhs: Vec<f64>,
    pub theta_map: ThetaMap,
    pub norms: Norms,
    pub mesh_meta: MeshMeta,
    /// Component offsets `[0, …, n]`; `[0, n]` for scalar problems.
    pub block_offsets: Vec<usize>,
}

impl ProblemBundle {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `A(μ)` coefficients.
    pub fn theta(&self, mu: &[f64]) -> Result<Vec<f64>> {
        self.theta_map.eval(mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Piecewise-constant diffusion on four quadrants.
    Pwcoeff,
    Convdiff,
    Stiffmass,
    Helmholtz,
    Elasticity,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Pwcoeff,
        ProblemKind::Convdiff,
        ProblemKind::Stiffmass,
        ProblemKind::Helmholtz,
        ProblemKind::Elasticity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Pwcoeff => "pwcoeff",
            ProblemKind::Convdiff => "convdiff",
            ProblemKind::Stiffmass => "stiffmass",
            ProblemKind::Helmholtz => "helmholtz",
            ProblemKind::Elasticity => "elasticity",
        }
    }

    pub fn generate(&self, n_cells_per_side: usize) -> Result<ProblemBundle> {
        match self {
            ProblemKind::Pwcoeff => poisson_pw2d(n_cells_per_side),
            ProblemKind::Convdiff => conv_diff2d(n_cells_per_side),
            ProblemKind::Stiffmass => stiff_mass2d(n_cells_per_side),
            ProblemKind::Helmholtz => helmholtz2d(n_cells_per_side),
            ProblemKind::Elasticity => elasticity2d(n_cells_per_side),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = ProblemKind::ALL.iter().map(|k| k.name()).collect();
            Error::InvalidInput(format!("unknown problem '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

fn check_size(n: usize) -> Result<StructuredMesh> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 cells per side, got {n}")));
    }
    Ok(StructuredMesh::new(n))
}

fn meta(mesh: &StructuredMesh, n_dofs: usize) -> MeshMeta {
    let n = mesh.cells_per_side();
    MeshMeta {
        nx: n,
        ny: n,
        nv: mesh.vertex_count(),
        n_dofs,
        lower: [-1.0, -1.0],
        upper: [1.0, 1.0],
    }
}

fn stiffness(mesh: &StructuredMesh) -> Result<SparseMatrix> {
    assemble(mesh, DofMap::Interior, 1, |_, e| vec![(0, 0, e.stiffness())])
}

fn mass(mesh: &StructuredMesh) -> Result<SparseMatrix> {
    assemble(mesh, DofMap::Interior, 1, |_, e| vec![(0, 0, e.mass())])
}

fn scalar_bundle(kind: ProblemKind, mesh: &StructuredMesh, terms: Vec<SparseMatrix>, theta_map: ThetaMap) -> Result<ProblemBundle> {
    let n = mesh.interior_count();
    Ok(ProblemBundle {
        kind,
        op: AffineOperator::new(terms)?,
        rhs: load(mesh, DofMap::Interior, &[SOURCE]),
        theta_map,
        norms: Norms {
            h1_semi: stiffness(mesh)?,
            l2: mass(mesh)?,
        },
        mesh_meta: meta(mesh, n),
        block_offsets: vec![0, n],
    })
}

/// Which quadrant holds a point: 0 bottom-left, 1 bottom-right, 2 top-left,
/// 3 top-right.
fn quadrant(c: [f64; 2]) -> usize {
    usize::from(c[0] > 0.0) + 2 * usize::from(c[1] > 0.0)
}

/// `Σ_j ν_j ∫_{Ω_j} ∇u·∇v` with `Ω_j` the four quadrants of the square.
/// Elements are assigned to the quadrant holding their centroid.
pub fn poisson_pw2d(n_cells_per_side: usize) -> Result<ProblemBundle> {
    let mesh = check_size(n_cells_per_side)?;
    if n_cells_per_side % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "piecewise-coefficient problem needs an even cell count so quadrants align with the mesh, got {n_cells_per_side}"
        )));
    }
    let terms = (0..4)
        .map(|q| {
            assemble(&mesh, DofMap::Interior, 1, |t, e| {
                if quadrant(mesh.centroid(t)) == q {
                    vec![(0, 0, e.stiffness())]
                } else {
                    Vec::new()
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scalar_bundle(ProblemKind::Pwcoeff, &mesh, terms, ThetaMap::Linear { arity: 4 })
}

/// Diffusion plus convection by `b = (1, −2)`; `θ = (ν₁, cos ν₂)`.
pub fn conv_diff2d(n_cells_per_side: usize) -> Result<ProblemBundle> {
    let mesh = check_size(n_cells_per_side)?;
    let conv = assemble(&mesh, DofMap::Interior, 1, |_, e| vec![(0, 0, e.convection(CONVECTION))])?;
    scalar_bundle(ProblemKind::Convdiff, &mesh, vec![stiffness(&mesh)?, conv], ThetaMap::ConvectionDiffusion)
}

/// Stiffness and mass; `θ = (1/ν₁, ν₂)`.
pub fn stiff_mass2d(n_cells_per_side: usize) -> Result<ProblemBundle> {
    let mesh = check_size(n_cells_per_side)?;
    scalar_bundle(ProblemKind::Stiffmass, &mesh, vec![stiffness(&mesh)?, mass(&mesh)?], ThetaMap::StiffnessMass)
}

/// Stiffness and mass; `θ = (1, −μ²)`.
pub fn helmholtz2d(n_cells_per_side: usize) -> Result<ProblemBundle> {
    let mesh = check_size(n_cells_per_side)?;
    scalar_bundle(ProblemKind::Helmholtz, &mesh, vec![stiffness(&mesh)?, mass(&mesh)?], ThetaMap::Helmholtz)
}

/// Plane strain: `a₁ = ∫ε(u):ε(v)`, `a₂ = ∫(∇·u)(∇·v)`, unknowns ordered
/// `[u_x; u_y]`, source `(10, 10)`.
pub fn elasticity2d(n_cells_per_side: usize) -> Result<ProblemBundle> {
    let mesh = check_size(n_cells_per_side)?;
    let pairs = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let strain = assemble(&mesh, DofMap::Interior, 2, |_, e| pairs.iter().map(|&(a, b)| (a, b, e.strain(a, b))).collect())?;
    let div = assemble(&mesh, DofMap::Interior, 2, |_, e| pairs.iter().map(|&(a, b)| (a, b, e.div_div(a, b))).collect())?;
    let h1 = assemble(&mesh, DofMap::Interior, 2, |_, e| vec![(0, 0, e.stiffness()), (1, 1, e.stiffness())])?;
    let l2 = assemble(&mesh, DofMap::Interior, 2, |_, e| vec![(0, 0, e.mass()), (1, 1, e.mass())])?;
    let nd = mesh.interior_count();
    Ok(ProblemBundle {
        kind: ProblemKind::Elasticity,
        op: AffineOperator::new(vec![strain, div])?,
        rhs: load(&mesh, DofMap::Interior, &[SOURCE, SOURCE]),
        theta_map: ThetaMap::Elasticity,
        norms: Norms { h1_semi: h1, l2 },
        mesh_meta: meta(&mesh, 2 * nd),
        block_offsets: vec![0, nd, 2 * nd],
    })
}

#[cfg(test)]
mod tests;
