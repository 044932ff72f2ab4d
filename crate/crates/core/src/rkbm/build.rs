//! Offline stage: harvest spanning vectors from Krylov runs and precompute blocks.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::krylov::{bicg_run, gmres_run, pcg_run, KrylovTrace};
use crate::la::{gram_schmidt_m, vector, AffineAt, AffineOperator, DenseMatrix, LinearOperator, SpdWeight};
use crate::rkbm::{gram, project, BasisMeta, Normalization, ReducedModel, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiMode {
    Mrcgbm,
    Mrkbm1,
    Mrkbm2,
}

impl MultiMode {
    fn name(self) -> &'static str {
        match self {
            MultiMode::Mrcgbm => "mrcgbm",
            MultiMode::Mrkbm1 => "mrkbm1",
            MultiMode::Mrkbm2 => "mrkbm2",
        }
    }
}

/// A breakdown with a partial trace still yields a (smaller) basis.
fn keep_partial(run: Result<KrylovTrace>, notes: &mut Vec<String>) -> Result<KrylovTrace> {
    match run {
        Ok(t) => Ok(t),
        Err(Error::NumericalBreakdown {
            iterations,
            reason,
            partial: Some(t),
        }) => {
            notes.push(format!("breakdown after {iterations} steps: {reason}"));
            Ok(*t)
        }
        Err(e) => Err(e),
    }
}

fn check_inputs(op: &AffineOperator, f: &[f64], b: &dyn LinearOperator, m: usize) -> Result<()> {
    check_dim("right-hand side", op.dim(), f.len())?;
    check_dim("preconditioner", op.dim(), b.dim())?;
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    Ok(())
}

/// Columns scaled to unit Euclidean norm; stops at the first zero or non-finite column.
fn unit_columns(n: usize, cols: &[Vec<f64>]) -> Result<DenseMatrix> {
    let mut out = Vec::with_capacity(cols.len());
    for c in cols {
        let nrm = vector::norm(c);
        if !(nrm > 0.0) || !nrm.is_finite() {
            break;
        }
        out.push(c.iter().map(|x| x / nrm).collect::<Vec<_>>());
    }
    if out.is_empty() {
        return Err(Error::EmptyModel);
    }
    DenseMatrix::from_columns(n, &out)
}

fn galerkin_blocks(op: &AffineOperator, f: &[f64], test: &DenseMatrix, trial: &DenseMatrix) -> (Vec<DenseMatrix>, Vec<f64>) {
    let blocks = op.terms().iter().map(|a| project(test, a, trial)).collect();
    let rhs = test.matvec_transpose(f).expect("basis rows match rhs");
    (blocks, rhs)
}

/// `G_{jk}`, `h_j` and `‖Bf‖²_M` for the least-squares online stage.
fn least_squares_blocks(
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    weight: &SpdWeight,
    p: &DenseMatrix,
) -> (Vec<DenseMatrix>, Vec<Vec<f64>>, f64) {
    let jn = op.arity();
    let bf = b.apply(f);
    let mbf = weight.apply(&bf);
    let w: Vec<Vec<Vec<f64>>> = op
        .terms()
        .iter()
        .map(|a| p.columns().map(|c| b.apply(&a.spmv(c).expect("basis rows match operator"))).collect())
        .collect();
    let mw: Vec<Vec<Vec<f64>>> = w.iter().map(|cols| cols.iter().map(|c| weight.apply(c)).collect()).collect();
    let wmat: Vec<DenseMatrix> = w
        .iter()
        .map(|cols| DenseMatrix::from_columns(p.nrows(), cols).expect("uniform columns"))
        .collect();

    let mut gram_blocks = vec![DenseMatrix::zeros(0, 0); jn * jn];
    for j in 0..jn {
        for k in j..jn {
            let g = gram(&wmat[j], &mw[k]);
            if k != j {
                gram_blocks[k * jn + j] = g.transpose();
            }
            gram_blocks[j * jn + k] = g;
        }
    }
    let rhs = wmat
        .iter()
        .map(|wj| wj.matvec_transpose(&mbf).expect("uniform columns"))
        .collect();
    (gram_blocks, rhs, vector::dot(&bf, &mbf))
}

fn check_theta(op: &AffineOperator, theta: &[f64]) -> Result<()> {
    if theta.len() != op.arity() {
        return Err(Error::ArityMismatch {
            expected: op.arity(),
            got: theta.len(),
        });
    }
    Ok(())
}

/// Galerkin model on the PCG directions `p₀ … p_{m−1}` harvested at `θ₁`.
pub fn build_rcgbm(
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    theta1: &[f64],
    m: usize,
) -> Result<ReducedModel> {
    check_inputs(op, f, b, m)?;
    let a1 = AffineAt::new(op, theta1)?;
    let mut notes = Vec::new();
    let trace = keep_partial(pcg_run(&a1, b, f, m, 0.0), &mut notes)?;
    let p = unit_columns(op.dim(), &trace.directions)?;
    let (reduced_a, reduced_f) = galerkin_blocks(op, f, &p, &p);
    Ok(ReducedModel {
        variant: Variant::Galerkin,
        arity: op.arity(),
        meta: BasisMeta {
            method: "rcgbm".into(),
            thetas: vec![theta1.to_vec()],
            m,
            harvested: vec![p.ncols()],
            drop_tol: None,
            normalization: Normalization::UnitEuclidean,
            notes,
        },
        p,
        q: None,
        reduced_a,
        reduced_f,
        ls_gram: Vec::new(),
        ls_rhs: Vec::new(),
        bf_norm_sq: 0.0,
    })
}

/// Least-squares model on the GMRES snapshots `z_j = B(f − A(θ₁)u_j)`.
pub fn build_rkbm1(
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    weight: &SpdWeight,
    theta1: &[f64],
    m: usize,
) -> Result<ReducedModel> {
    check_inputs(op, f, b, m)?;
    let a1 = AffineAt::new(op, theta1)?;
    let mut notes = Vec::new();
    let trace = keep_partial(gmres_run(&a1, b, f, m, weight, 0.0), &mut notes)?;
    let p = unit_columns(op.dim(), &trace.preconditioned_residuals)?;
    let (ls_gram, ls_rhs, bf_norm_sq) = least_squares_blocks(op, f, b, weight, &p);
    Ok(ReducedModel {
        variant: Variant::LeastSquares,
        arity: op.arity(),
        meta: BasisMeta {
            method: "rkbm1".into(),
            thetas: vec![theta1.to_vec()],
            m,
            harvested: vec![p.ncols()],
            drop_tol: None,
            normalization: Normalization::UnitEuclidean,
            notes,
        },
        p,
        q: None,
        reduced_a: Vec::new(),
        reduced_f: Vec::new(),
        ls_gram,
        ls_rhs,
        bf_norm_sq,
    })
}

/// Petrov–Galerkin model on the BiCG directions `p_k` (trial) and `p*_k` (test).
pub fn build_rkbm2(
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    theta1: &[f64],
    r0_star: &[f64],
    m: usize,
) -> Result<ReducedModel> {
    check_inputs(op, f, b, m)?;
    let a1 = AffineAt::new(op, theta1)?;
    let mut notes = Vec::new();
    let trace = keep_partial(bicg_run(&a1, b, f, r0_star, m, 0.0), &mut notes)?;
    let n = op.dim();
    let mut p = unit_columns(n, &trace.directions)?;
    let mut q = unit_columns(n, &trace.dual_directions)?;
    let r = p.ncols().min(q.ncols());
    p = p.leading_columns(r);
    q = q.leading_columns(r);
    let (reduced_a, reduced_f) = galerkin_blocks(op, f, &q, &p);
    Ok(ReducedModel {
        variant: Variant::PetrovGalerkin,
        arity: op.arity(),
        meta: BasisMeta {
            method: "rkbm2".into(),
            thetas: vec![theta1.to_vec()],
            m,
            harvested: vec![r],
            drop_tol: None,
            normalization: Normalization::UnitEuclidean,
            notes,
        },
        p,
        q: Some(q),
        reduced_a,
        reduced_f,
        ls_gram: Vec::new(),
        ls_rhs: Vec::new(),
        bf_norm_sq: 0.0,
    })
}

/// Union of the Krylov harvests at several instances, M-orthonormalised with
/// rank truncation at `drop_tol`. For `Mrkbm2` the shadow residual is `f`.
#[allow(clippy::too_many_arguments)]
pub fn build_multi(
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    weight: &SpdWeight,
    thetas: &[Vec<f64>],
    m: usize,
    mode: MultiMode,
    drop_tol: f64,
) -> Result<ReducedModel> {
    check_inputs(op, f, b, m)?;
    if thetas.is_empty() {
        return Err(Error::InvalidInput("at least one parameter instance is required".into()));
    }
    let n = op.dim();
    let mut notes = Vec::new();
    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut harvested = Vec::new();
    for theta in thetas {
        check_theta(op, theta)?;
        let a = AffineAt::new(op, theta)?;
        let t = match mode {
            MultiMode::Mrcgbm => keep_partial(pcg_run(&a, b, f, m, 0.0), &mut notes)?,
            MultiMode::Mrkbm1 => keep_partial(gmres_run(&a, b, f, m, weight, 0.0), &mut notes)?,
            MultiMode::Mrkbm2 => keep_partial(bicg_run(&a, b, f, f, m, 0.0), &mut notes)?,
        };
        let cols = match mode {
            MultiMode::Mrkbm1 => t.preconditioned_residuals,
            _ => t.directions,
        };
        harvested.push(cols.len());
        primal.extend(cols);
        dual.extend(t.dual_directions);
    }
    let (mut p, rank) = gram_schmidt_m(&primal, weight, drop_tol)?;
    if rank == 0 {
        return Err(Error::EmptyModel);
    }
    let mut q = None;
    if mode == MultiMode::Mrkbm2 {
        let (qm, qrank) = gram_schmidt_m(&dual, weight, drop_tol)?;
        let r = rank.min(qrank);
        if r == 0 {
            return Err(Error::EmptyModel);
        }
        if qrank != rank {
            notes.push(format!("trial rank {rank} and test rank {qrank} differ; both truncated to {r}"));
        }
        p = p.leading_columns(r);
        q = Some(qm.leading_columns(r));
    }
    debug_assert_eq!(p.nrows(), n);

    let meta = BasisMeta {
        method: mode.name().into(),
        thetas: thetas.to_vec(),
        m,
        harvested,
        drop_tol: Some(drop_tol),
        normalization: Normalization::MOrthonormal,
        notes,
    };
    let mut model = ReducedModel {
        variant: Variant::Galerkin,
        arity: op.arity(),
        p,
        q: None,
        reduced_a: Vec::new(),
        reduced_f: Vec::new(),
        ls_gram: Vec::new(),
        ls_rhs: Vec::new(),
        bf_norm_sq: 0.0,
        meta,
    };
    match mode {
        MultiMode::Mrcgbm => {
            let (a, rhs) = galerkin_blocks(op, f, &model.p, &model.p);
            model.reduced_a = a;
            model.reduced_f = rhs;
        }
        MultiMode::Mrkbm1 => {
            let (g, h, bf2) = least_squares_blocks(op, f, b, weight, &model.p);
            model.variant = Variant::LeastSquares;
            model.ls_gram = g;
            model.ls_rhs = h;
            model.bf_norm_sq = bf2;
        }
        MultiMode::Mrkbm2 => {
            let qm = q.expect("test basis built for mrkbm2");
            let (a, rhs) = galerkin_blocks(op, f, &qm, &model.p);
            model.variant = Variant::PetrovGalerkin;
            model.reduced_a = a;
            model.reduced_f = rhs;
            model.q = Some(qm);
        }
    }
    Ok(model)
}
