//! Error measurements and the quantities entering the convergence bounds.
//!
//! The estimators here are sampling/iteration based; they are diagnostics,
//! not certified bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::factor::chol_factor;
use crate::krylov::pcg_run;
use crate::la::{vector, AffineAt, AffineOperator, LinearOperator, SparseMatrix, SpdWeight};
use crate::rkbm::{online_solve, ReducedModel};

const LANCZOS_STEPS: usize = 50;
const SAMPLES: usize = 200;
const POWER_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `κ(BA(μ))`; only for symmetric operators.
    pub kappa: Option<f64>,
    /// Lower edge of the M-field of values of `BA(μ)`.
    pub gamma: f64,
    /// M-operator norm of `BA(μ)`.
    pub gamma_cap: f64,
    /// `‖u − û‖_M` at this parameter (its sup over a grid is `σ_m`).
    pub sigma_m: f64,
    pub bound_pcg: Option<f64>,
    /// `None` when the sampled `γ` is not positive.
    pub bound_gmres: Option<f64>,
    /// `‖u − û‖_{A(μ)} / ‖u‖_{A(μ)}` (symmetric part of `A(μ)`).
    pub rel_error_energy: f64,
    /// `‖u − û‖_M / ‖u‖_M`.
    pub rel_error_weight: f64,
    /// `‖BA(u − û)‖_M / ‖Bf‖_M`.
    pub rel_residual_m: f64,
}

/// `‖u − v‖_W / ‖u‖_W` for a symmetric positive (semi)definite `W`.
pub fn relative_error_in(w: &SparseMatrix, truth: &[f64], approx: &[f64]) -> f64 {
    let e = vector::sub(truth, approx);
    let num = w.bilinear(&e, &e).max(0.0).sqrt();
    let den = w.bilinear(truth, truth).max(0.0).sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Extreme eigenvalues of the symmetric tridiagonal `(diag, off)` by bisection.
fn tridiag_extremes(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    // number of eigenvalues < x (Sturm sequence)
    let count = |x: f64| {
        let mut c = 0;
        let mut d = 1.0;
        for i in 0..n {
            let o = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { o / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    let bisect = |k: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(n - 1))
}

/// `κ(BA)` from the Lanczos tridiagonal hidden in a PCG run.
fn lanczos_kappa(a: &dyn LinearOperator, b: &dyn LinearOperator, start: &[f64]) -> Result<Option<f64>> {
    let t = pcg_run(a, b, start, LANCZOS_STEPS + 1, 0.0)?;
    let s = t.alphas.len();
    if s == 0 {
        return Ok(None);
    }
    let mut diag = vec![0.0; s];
    let mut off = vec![0.0; s.saturating_sub(1)];
    for k in 0..s {
        diag[k] = 1.0 / t.alphas[k];
        if k > 0 {
            diag[k] += t.betas[k - 1] / t.alphas[k - 1];
        }
        if k + 1 < s {
            off[k] = t.betas[k].sqrt() / t.alphas[k];
        }
    }
    let (lmin, lmax) = tridiag_extremes(&diag, &off);
    Ok(if lmin > 0.0 { Some((lmax / lmin).max(1.0)) } else { None })
}

/// Sampled and power-iterated `γ`, `Γ` of `T = BA` in the M-inner product.
fn field_of_values(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    weight: &SpdWeight,
    n: usize,
) -> Result<(f64, f64)> {
    let minv = match weight {
        SpdWeight::Identity => None,
        SpdWeight::Matrix(m) => Some(chol_factor(m)?),
    };
    let solve_m = |x: &[f64]| match &minv {
        Some(f) => f.solve(x),
        None => x.to_vec(),
    };
    let t = |x: &[f64]| b.apply(&a.apply(x));
    // M-adjoint of T: M⁻¹ Aᵀ Bᵀ M
    let t_adj = |x: &[f64]| solve_m(&a.apply_adjoint(&b.apply_adjoint(&weight.apply(x))));
    let mnorm2 = |x: &[f64]| vector::dot(&weight.apply(x), x);

    let mut rng = ChaCha8Rng::seed_from_u64(0xf0f);
    let mut gamma = f64::INFINITY;
    let mut cap: f64 = 0.0;
    let mut best = vec![0.0; n];
    for _ in 0..SAMPLES {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vv = mnorm2(&v);
        let tv = t(&v);
        let rq = vector::dot(&weight.apply(&tv), &v) / vv;
        if rq < gamma {
            gamma = rq;
            best = v.clone();
        }
        cap = cap.max((mnorm2(&tv) / vv).sqrt());
    }

    // Γ² = λ_max(T^# T)
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..POWER_STEPS {
        let w = t_adj(&t(&v));
        let s = mnorm2(&w).sqrt();
        if !(s > 0.0) {
            break;
        }
        v = w.iter().map(|x| x / s).collect();
        cap = cap.max(mnorm2(&t(&v)).sqrt() / mnorm2(&v).sqrt());
    }

    // γ = Γ − λ_max(ΓI − H), H = (T + T^#)/2
    let shift = cap;
    let mut v = best;
    for _ in 0..POWER_STEPS {
        let tv = t(&v);
        let tav = t_adj(&v);
        let w: Vec<f64> = (0..n).map(|i| shift * v[i] - 0.5 * (tv[i] + tav[i])).collect();
        let s = mnorm2(&w).sqrt();
        if !(s > 0.0) {
            break;
        }
        v = w.iter().map(|x| x / s).collect();
        let rq = vector::dot(&weight.apply(&t(&v)), &v) / mnorm2(&v);
        gamma = gamma.min(rq);
    }
    Ok((gamma, cap))
}

/// Errors of the online solution at `θ` against a supplied truth, plus the
/// quantities of the PCG and GMRES convergence bounds for `m = model.dim()`.
pub fn diagnostics_for(
    model: &ReducedModel,
    op: &AffineOperator,
    f: &[f64],
    b: &dyn LinearOperator,
    weight: &SpdWeight,
    theta: &[f64],
    truth: &[f64],
) -> Result<Diagnostics> {
    let n = op.dim();
    check_dim("truth", n, truth.len())?;
    check_dim("rhs", n, f.len())?;
    let (_, uh) = online_solve(model, theta)?;
    let a = AffineAt::new(op, theta)?;
    let e = vector::sub(truth, &uh);

    let ae = a.apply(&e);
    let energy_num = vector::dot(&ae, &e).max(0.0).sqrt();
    let energy_den = vector::dot(&a.apply(truth), truth).max(0.0).sqrt();
    let weight_num = weight.norm(&e)?;
    let weight_den = weight.norm(truth)?;
    let bf_m = weight.norm(&b.apply(f))?;
    let res_m = weight.norm(&b.apply(&ae))?;
    let ratio = |x: f64, y: f64| if y > 0.0 { x / y } else { x };

    let m = model.dim() as i32;
    let kappa = if op.is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a);
        let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        lanczos_kappa(&a, b, &start)?
    } else {
        None
    };
    let bound_pcg = kappa.map(|k| {
        let s = k.sqrt();
        2.0 * ((s - 1.0) / (s + 1.0)).powi(m)
    });
    let (gamma, gamma_cap) = field_of_values(&a, b, weight, n)?;
    let bound_gmres = if gamma > 0.0 && gamma_cap > 0.0 {
        let q = (1.0 - (gamma / gamma_cap).powi(2)).max(0.0);
        Some(q.powf(m as f64 / 2.0))
    } else {
        None
    };
    Ok(Diagnostics {
        kappa,
        gamma,
        gamma_cap,
        sigma_m: weight_num,
        bound_pcg,
        bound_gmres,
        rel_error_energy: ratio(energy_num, energy_den),
        rel_error_weight: ratio(weight_num, weight_den),
        rel_residual_m: ratio(res_m, bf_m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_extremes_of_laplacian() {
        let n = 10;
        let (lo, hi) = tridiag_extremes(&vec![2.0; n], &vec![-1.0; n - 1]);
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        assert!((lo - (2.0 - 2.0 * h.cos())).abs() <= 1e-12);
        assert!((hi - (2.0 + 2.0 * h.cos())).abs() <= 1e-12);
    }

    #[test]
    fn single_entry_tridiagonal() {
        let (lo, hi) = tridiag_extremes(&[3.0], &[]);
        assert!((lo - 3.0).abs() <= 1e-12 && (hi - 3.0).abs() <= 1e-12);
    }
}
