//! Online stage: `O(r³)` reduced solves, independent of `n` except for the lift.

use crate::error::{Error, Result};
use crate::la::{dense_solve, vector, DenseMatrix};
use crate::rkbm::{ReducedModel, Variant};

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<f64>,
    /// Least squares: `‖Bf − BA(μ)Pc‖_M`. Galerkin / Petrov–Galerkin: Euclidean
    /// residual of the reduced system.
    pub residual_norm: f64,
    pub lifted: Option<Vec<f64>>,
}

fn combine(blocks: &[DenseMatrix], coeffs: &[f64], r: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(r, r);
    for (blk, &c) in blocks.iter().zip(coeffs) {
        if c != 0.0 {
            out.add_scaled(c, blk).expect("reduced blocks share a shape");
        }
    }
    out
}

/// Reduced matrix and right-hand side at `θ`.
fn reduced_system(model: &ReducedModel, theta: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
    let jn = model.arity;
    if theta.len() != jn {
        return Err(Error::ArityMismatch {
            expected: jn,
            got: theta.len(),
        });
    }
    let r = model.dim();
    Ok(match model.variant {
        Variant::Galerkin | Variant::PetrovGalerkin => (combine(&model.reduced_a, theta, r), model.reduced_f.clone()),
        Variant::LeastSquares => {
            let weights: Vec<f64> = (0..jn * jn).map(|i| theta[i / jn] * theta[i % jn]).collect();
            let g = combine(&model.ls_gram, &weights, r);
            let mut h = vec![0.0; r];
            for (hj, &t) in model.ls_rhs.iter().zip(theta) {
                vector::axpy(t, hj, &mut h);
            }
            (g, h)
        }
    })
}

fn solve_at(model: &ReducedModel, theta: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (a, rhs) = reduced_system(model, theta)?;
    let c = dense_solve(&a, &rhs).map_err(|e| match e {
        Error::SingularReducedSystem { condition, .. } => Error::SingularReducedSystem {
            theta: theta.to_vec(),
            condition,
        },
        other => other,
    })?;
    if !vector::all_finite(&c) {
        return Err(Error::SingularReducedSystem {
            theta: theta.to_vec(),
            condition: f64::INFINITY,
        });
    }
    let ac = a.matvec(&c)?;
    let residual = match model.variant {
        // ‖Bf − BAPc‖²_M = ‖Bf‖²_M − 2 cᵀh + cᵀGc
        Variant::LeastSquares => (model.bf_norm_sq - 2.0 * vector::dot(&c, &rhs) + vector::dot(&c, &ac))
            .max(0.0)
            .sqrt(),
        _ => vector::norm(&vector::sub(&rhs, &ac)),
    };
    Ok((c, residual))
}

/// Reduced coordinates at `θ`.
pub fn online_coords(model: &ReducedModel, theta: &[f64]) -> Result<Vec<f64>> {
    solve_at(model, theta).map(|(c, _)| c)
}

/// Reduced coordinates and the lifted full-space approximation `P c`.
pub fn online_solve(model: &ReducedModel, theta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = online_coords(model, theta)?;
    let lifted = model.p.matvec(&c)?;
    Ok((c, lifted))
}

/// [`online_solve`] over a grid of coefficient vectors, in grid order. Failures
/// are reported per point; the sweep always visits every point.
pub fn online_sweep(model: &ReducedModel, thetas: &[Vec<f64>], lift: bool) -> Vec<Result<SweepPoint>> {
    thetas
        .iter()
        .map(|theta| {
            let (coords, residual_norm) = solve_at(model, theta)?;
            let lifted = if lift { Some(model.p.matvec(&coords)?) } else { None };
            Ok(SweepPoint {
                coords,
                residual_norm,
                lifted,
            })
        })
        .collect()
}
