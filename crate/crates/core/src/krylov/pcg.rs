use crate::error::{check_dim, Result};
use crate::krylov::{KrylovMethod, KrylovTrace, StopReason};
use crate::la::{vector, LinearOperator};

/// Preconditioned conjugate gradients for `B A u = B f`, at most `m − 1` updates.
///
/// Stops early when `‖r_k‖ ≤ tol·‖f‖`, when `(r_k, z_k)` is exactly zero, or on
/// `(A p, p) ≤ 0`. With `tol = 0` the recurrence keeps going past roundoff-level
/// residuals: the recursively updated residuals still carry Krylov directions.
pub fn pcg_run(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    f: &[f64],
    m: usize,
    tol: f64,
) -> Result<KrylovTrace> {
    let n = a.dim();
    check_dim("pcg rhs", n, f.len())?;
    check_dim("pcg preconditioner", n, b.dim())?;
    let mut trace = KrylovTrace::new(KrylovMethod::Pcg);
    let f_norm = vector::norm(f);

    let mut u = vec![0.0; n];
    let mut r = f.to_vec();
    let z = b.apply(&r);
    let mut p = z.clone();
    let mut rz = vector::dot(&r, &z);
    trace.iterates.push(u.clone());
    trace.preconditioned_residuals.push(z);
    trace.directions.push(p.clone());
    trace.residual_norms.push(f_norm);
    if !rz.is_finite() {
        return Err(trace.fail("nonfinite (r0, z0)"));
    }
    if f_norm == 0.0 || rz <= 0.0 {
        trace.stop_reason = Some(if f_norm == 0.0 { StopReason::Tolerance } else { StopReason::Breakdown });
        return Ok(trace);
    }

    for _ in 1..m.max(1) {
        let ap = a.apply(&p);
        let pap = vector::dot(&ap, &p);
        if !pap.is_finite() {
            return Err(trace.fail("nonfinite (Ap, p)"));
        }
        if pap <= 0.0 {
            trace.stop_reason = Some(StopReason::Breakdown);
            return Ok(trace);
        }
        let alpha = rz / pap;
        vector::axpy(alpha, &p, &mut u);
        vector::axpy(-alpha, &ap, &mut r);
        let z = b.apply(&r);
        let rz_new = vector::dot(&r, &z);
        if !rz_new.is_finite() {
            return Err(trace.fail("nonfinite (r, z)"));
        }
        let r_norm = vector::norm(&r);
        trace.alphas.push(alpha);
        trace.iterates.push(u.clone());
        trace.residual_norms.push(r_norm);
        trace.preconditioned_residuals.push(z.clone());
        if r_norm <= tol * f_norm || rz_new <= 0.0 {
            trace.stop_reason = Some(StopReason::Tolerance);
            return Ok(trace);
        }
        let beta = rz_new / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        trace.betas.push(beta);
        trace.directions.push(p.clone());
        rz = rz_new;
    }
    trace.stop_reason = Some(StopReason::MaxIter);
    Ok(trace)
}
