use crate::error::{check_dim, Error, Result};
use crate::krylov::{KrylovMethod, KrylovTrace, StopReason};
use crate::la::{vector, LinearOperator};

const SERIOUS: f64 = 1e-14;

/// Preconditioned BiCG with the dual chain driven by `Aᵗ` and `Bᵗ`.
///
/// `a.apply_adjoint` and `b.apply_adjoint` supply the transposes. At most
/// `m − 1` updates; a (near-)zero `(r, z*)` or `(A p, p*)` ends the run with
/// [`StopReason::Breakdown`] and whatever has been recorded so far.
pub fn bicg_run(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    f: &[f64],
    r0_star: &[f64],
    m: usize,
    tol: f64,
) -> Result<KrylovTrace> {
    let n = a.dim();
    check_dim("bicg rhs", n, f.len())?;
    check_dim("bicg shadow residual", n, r0_star.len())?;
    check_dim("bicg preconditioner", n, b.dim())?;
    if vector::dot(f, r0_star) == 0.0 {
        return Err(Error::InvalidInput("(f, r0*) must be nonzero".into()));
    }
    let mut trace = KrylovTrace::new(KrylovMethod::Bicg);
    let f_norm = vector::norm(f);

    let mut u = vec![0.0; n];
    let mut r = f.to_vec();
    let mut rs = r0_star.to_vec();
    let z = b.apply(&r);
    let zs = b.apply_adjoint(&rs);
    let mut p = z.clone();
    let mut ps = zs.clone();
    let mut rho = vector::dot(&r, &zs);
    trace.iterates.push(u.clone());
    trace.residual_norms.push(f_norm);
    trace.directions.push(p.clone());
    trace.dual_directions.push(ps.clone());
    if !rho.is_finite() {
        return Err(trace.fail("nonfinite (r0, z0*)"));
    }
    if rho.abs() < SERIOUS * f_norm * vector::norm(&zs) {
        trace.stop_reason = Some(StopReason::Breakdown);
        trace.preconditioned_residuals.push(z);
        trace.dual_preconditioned_residuals.push(zs);
        return Ok(trace);
    }
    trace.preconditioned_residuals.push(z);
    trace.dual_preconditioned_residuals.push(zs);

    for _ in 1..m.max(1) {
        let ap = a.apply(&p);
        let d = vector::dot(&ap, &ps);
        if !d.is_finite() {
            return Err(trace.fail("nonfinite (Ap, p*)"));
        }
        if d.abs() < SERIOUS * vector::norm(&ap) * vector::norm(&ps) || d == 0.0 {
            trace.stop_reason = Some(StopReason::Breakdown);
            return Ok(trace);
        }
        let alpha = rho / d;
        vector::axpy(alpha, &p, &mut u);
        vector::axpy(-alpha, &ap, &mut r);
        let atps = a.apply_adjoint(&ps);
        vector::axpy(-alpha, &atps, &mut rs);
        let z = b.apply(&r);
        let zs = b.apply_adjoint(&rs);
        let rho_new = vector::dot(&r, &zs);
        if !rho_new.is_finite() {
            return Err(trace.fail("nonfinite (r, z*)"));
        }
        let r_norm = vector::norm(&r);
        trace.alphas.push(alpha);
        trace.iterates.push(u.clone());
        trace.residual_norms.push(r_norm);
        trace.preconditioned_residuals.push(z.clone());
        trace.dual_preconditioned_residuals.push(zs.clone());
        if r_norm <= tol * f_norm {
            trace.stop_reason = Some(StopReason::Tolerance);
            return Ok(trace);
        }
        if rho_new.abs() < SERIOUS * r_norm * vector::norm(&zs) {
            trace.stop_reason = Some(StopReason::Breakdown);
            return Ok(trace);
        }
        let beta = rho_new / rho;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        for (pi, zi) in ps.iter_mut().zip(&zs) {
            *pi = zi + beta * *pi;
        }
        trace.betas.push(beta);
        trace.directions.push(p.clone());
        trace.dual_directions.push(ps.clone());
        rho = rho_new;
    }
    trace.stop_reason = Some(StopReason::MaxIter);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::lu_factor;
    use crate::krylov::pcg_run;
    use crate::krylov::testutil::{convection_1d, laplacian_1d, random_vec};
    use crate::la::IdentityOperator;

    #[test]
    fn symmetric_case_matches_pcg() {
        let a = laplacian_1d(25);
        let d: Vec<f64> = (0..25).map(|i| 1.0 + i as f64 / 25.0).collect();
        let bop = crate::la::SparseMatrix::diagonal(&d);
        let f = random_vec(25, 4);
        let cg = pcg_run(&a, &bop, &f, 8, 0.0).unwrap();
        let bi = bicg_run(&a, &bop, &f, &f, 8, 0.0).unwrap();
        for (p, q) in bi.directions.iter().zip(&cg.directions) {
            assert!(vector::rel_diff(p, q) <= 1e-10);
        }
        assert_eq!(bi.directions, bi.dual_directions);
    }

    #[test]
    fn identity_one_step() {
        let f = vec![1.0, 2.0];
        let t = bicg_run(&IdentityOperator(2), &IdentityOperator(2), &f, &f, 5, 0.0).unwrap();
        assert_eq!(t.steps(), 1);
        assert_eq!(t.solution(), f.as_slice());
    }

    #[test]
    fn finite_termination_nonsymmetric() {
        let a = convection_1d(20, 0.4);
        let f = random_vec(20, 5);
        let t = bicg_run(&a, &IdentityOperator(20), &f, &f, 21, 0.0).unwrap();
        let exact = lu_factor(&a).unwrap().solve(&f);
        assert!(vector::rel_diff(t.solution(), &exact) <= 1e-8);
    }

    #[test]
    fn orthogonal_shadow_rejected() {
        let f = vec![1.0, 0.0];
        let rs = vec![0.0, 1.0];
        assert!(bicg_run(&IdentityOperator(2), &IdentityOperator(2), &f, &rs, 3, 0.0).is_err());
    }
}
