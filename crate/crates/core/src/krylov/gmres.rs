use crate::error::{check_dim, Result};
use crate::krylov::{KrylovMethod, KrylovTrace, StopReason};
use crate::la::{vector, LinearOperator, SpdWeight};

/// Givens rotation zeroing `b` in `(a, b)`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let r = a.hypot(b);
    (a / r, b / r, r)
}

/// Full (unrestarted) GMRES for `B A u = B f` minimising `‖B f − B A u‖_M`.
///
/// Arnoldi runs in the M-inner product with modified Gram–Schmidt plus one
/// reorthogonalisation pass. After each step the iterate `u_j` is formed
/// explicitly and `z_j = B(f − A u_j)` is recorded; on a happy breakdown the
/// (vanishing) last `z` is not recorded.
pub fn gmres_run(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    f: &[f64],
    m: usize,
    weight: &SpdWeight,
    tol: f64,
) -> Result<KrylovTrace> {
    let n = a.dim();
    check_dim("gmres rhs", n, f.len())?;
    check_dim("gmres preconditioner", n, b.dim())?;
    if let Some(d) = weight.dim() {
        check_dim("gmres weight", n, d)?;
    }
    let mut trace = KrylovTrace::new(KrylovMethod::Gmres);

    let bf = b.apply(f);
    let mbf = weight.apply(&bf);
    let beta = vector::dot(&bf, &mbf).sqrt();
    trace.iterates.push(vec![0.0; n]);
    trace.residual_norms.push(beta);
    trace.preconditioned_residuals.push(bf.clone());
    if !beta.is_finite() {
        return Err(trace.fail("nonfinite ‖Bf‖_M"));
    }
    if beta == 0.0 {
        trace.stop_reason = Some(StopReason::Tolerance);
        return Ok(trace);
    }

    let mut v: Vec<Vec<f64>> = vec![bf.iter().map(|x| x / beta).collect()];
    let mut mv: Vec<Vec<f64>> = vec![mbf.iter().map(|x| x / beta).collect()];
    trace.directions.push(v[0].clone());
    // columns of the rotated (upper triangular) Hessenberg factor
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    let mut g = vec![beta];

    for j in 0..m.max(1) - 1 {
        let mut w = b.apply(&a.apply(&v[j]));
        let mut h = vec![0.0; j + 2];
        for _ in 0..2 {
            for i in 0..=j {
                let c = vector::dot(&w, &mv[i]);
                h[i] += c;
                vector::axpy(-c, &v[i], &mut w);
            }
        }
        let mw = weight.apply(&w);
        let h_next = vector::dot(&w, &mw).max(0.0).sqrt();
        h[j + 1] = h_next;
        if !vector::all_finite(&h) {
            return Err(trace.fail("nonfinite Hessenberg entry"));
        }

        for (i, &(c, s)) in rotations.iter().enumerate() {
            let t = c * h[i] + s * h[i + 1];
            h[i + 1] = -s * h[i] + c * h[i + 1];
            h[i] = t;
        }
        let (c, s, rr) = givens(h[j], h[j + 1]);
        rotations.push((c, s));
        h[j] = rr;
        h.truncate(j + 1);
        g.push(-s * g[j]);
        g[j] *= c;
        r_cols.push(h);

        // back substitution R y = g[..=j]
        let k = j + 1;
        let mut y = g[..k].to_vec();
        for col in (0..k).rev() {
            y[col] /= r_cols[col][col];
            let yc = y[col];
            for row in 0..col {
                y[row] -= r_cols[col][row] * yc;
            }
        }
        let mut u = vec![0.0; n];
        for (vi, &yi) in v.iter().zip(&y) {
            vector::axpy(yi, vi, &mut u);
        }
        let resid = g[k].abs();
        trace.iterates.push(u.clone());
        trace.residual_norms.push(resid);

        if h_next < 1e-14 * beta {
            trace.stop_reason = Some(StopReason::Breakdown);
            return Ok(trace);
        }
        let mut res = f.to_vec();
        vector::axpy(-1.0, &a.apply(&u), &mut res);
        trace.preconditioned_residuals.push(b.apply(&res));
        if resid <= tol * beta {
            trace.stop_reason = Some(StopReason::Tolerance);
            return Ok(trace);
        }
        v.push(w.iter().map(|x| x / h_next).collect());
        mv.push(mw.iter().map(|x| x / h_next).collect());
        trace.directions.push(v[j + 1].clone());
    }
    trace.stop_reason = Some(StopReason::MaxIter);
    Ok(trace)
}
