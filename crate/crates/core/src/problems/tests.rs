use nalgebra::{DMatrix, Matrix2, Matrix3, SymmetricEigen};

use super::*;
use crate::factor::{chol_factor, lu_factor};
use crate::la::vector;

/// Reference assembly: hat functions from the inverse Vandermonde matrix,
/// integrals by the edge-midpoint rule (exact for quadratics).
struct Oracle {
    n: usize,
}

type Hat = [f64; 3]; // φ(x, y) = c₀ + c₁x + c₂y

impl Oracle {
    fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let h = 2.0 / self.n as f64;
        [-1.0 + h * i as f64, -1.0 + h * j as f64]
    }

    fn dof(&self, i: usize, j: usize) -> Option<usize> {
        (i > 0 && j > 0 && i < self.n && j < self.n).then(|| (i - 1) + (j - 1) * (self.n - 1))
    }

    fn cells(&self) -> Vec<[(usize, usize); 3]> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                out.push([(i, j), (i + 1, j), (i + 1, j + 1)]);
                out.push([(i, j), (i + 1, j + 1), (i, j + 1)]);
            }
        }
        out
    }

    fn hats(&self, t: &[(usize, usize); 3]) -> ([Hat; 3], f64, [[f64; 2]; 3]) {
        let p: Vec<[f64; 2]> = t.iter().map(|&(i, j)| self.point(i, j)).collect();
        let v = Matrix3::new(1.0, p[0][0], p[0][1], 1.0, p[1][0], p[1][1], 1.0, p[2][0], p[2][1]);
        let inv = v.try_inverse().unwrap();
        let hats = [0, 1, 2].map(|k| [inv[(0, k)], inv[(1, k)], inv[(2, k)]]);
        let area = v.determinant().abs() / 2.0;
        let mids = [0, 1, 2].map(|k| {
            let (a, b) = (p[k], p[(k + 1) % 3]);
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
        });
        (hats, area, mids)
    }

    /// `local(hats, area, midpoints)[k][l]` scattered into a dense matrix of
    /// `comps` components.
    fn assemble(&self, comps: usize, local: impl Fn(&[Hat; 3], f64, &[[f64; 2]; 3], usize, usize, usize, usize) -> f64) -> DMatrix<f64> {
        let nd = (self.n - 1) * (self.n - 1);
        let mut a = DMatrix::zeros(comps * nd, comps * nd);
        for t in self.cells() {
            let (hats, area, mids) = self.hats(&t);
            for k in 0..3 {
                for l in 0..3 {
                    let (Some(r), Some(c)) = (self.dof(t[k].0, t[k].1), self.dof(t[l].0, t[l].1)) else { continue };
                    for ca in 0..comps {
                        for cb in 0..comps {
                            a[(ca * nd + r, cb * nd + c)] += local(&hats, area, &mids, k, l, ca, cb);
                        }
                    }
                }
            }
        }
        a
    }
}

fn eval(h: &Hat, p: [f64; 2]) -> f64 {
    h[0] + h[1] * p[0] + h[2] * p[1]
}

fn quad(area: f64, mids: &[[f64; 2]; 3], f: impl Fn([f64; 2]) -> f64) -> f64 {
    mids.iter().map(|&m| f(m)).sum::<f64>() * area / 3.0
}

fn oracle_stiffness(n: usize) -> DMatrix<f64> {
    Oracle { n }.assemble(1, |h, area, _, k, l, _, _| area * (h[k][1] * h[l][1] + h[k][2] * h[l][2]))
}

fn oracle_mass(n: usize) -> DMatrix<f64> {
    Oracle { n }.assemble(1, |h, area, mids, k, l, _, _| quad(area, mids, |p| eval(&h[k], p) * eval(&h[l], p)))
}

fn oracle_convection(n: usize) -> DMatrix<f64> {
    Oracle { n }.assemble(1, |h, area, mids, k, l, _, _| {
        let bgrad = 1.0 * h[l][1] - 2.0 * h[l][2];
        quad(area, mids, |p| bgrad * eval(&h[k], p))
    })
}

fn strain_of(h: &Hat, comp: usize) -> Matrix2<f64> {
    // ∇(φ e_c) has row c equal to ∇φ
    let mut g = Matrix2::zeros();
    g[(comp, 0)] = h[1];
    g[(comp, 1)] = h[2];
    (g + g.transpose()) * 0.5
}

fn oracle_strain(n: usize) -> DMatrix<f64> {
    Oracle { n }.assemble(2, |h, area, _, k, l, a, b| area * strain_of(&h[k], a).dot(&strain_of(&h[l], b)))
}

fn oracle_div(n: usize) -> DMatrix<f64> {
    Oracle { n }.assemble(2, |h, area, _, k, l, a, b| area * strain_of(&h[k], a).trace() * strain_of(&h[l], b).trace())
}

fn max_diff(a: &SparseMatrix, b: &DMatrix<f64>) -> f64 {
    let d = a.to_dense();
    assert_eq!((d.nrows(), d.ncols()), b.shape());
    let mut worst = 0.0_f64;
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            worst = worst.max((d.get(i, j) - b[(i, j)]).abs());
        }
    }
    worst
}

fn eigenvalues(a: &SparseMatrix) -> Vec<f64> {
    let d = a.to_dense();
    let m = DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| d.get(i, j));
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn pw_terms_partition_the_stiffness() {
    let b = poisson_pw2d(8).unwrap();
    let sum = SparseMatrix::linear_combination(&b.op.terms().iter().collect::<Vec<_>>(), &[1.0; 4]).unwrap();
    assert!(max_diff(&sum, &oracle_stiffness(8)) <= 1e-14);
    for a in b.op.terms() {
        assert_eq!(a.asymmetry(), 0.0);
        assert!(eigenvalues(a)[0] >= -1e-12);
    }
    assert!(eigenvalues(&sum)[0] > 1e-3);
    assert_eq!(b.op.arity(), 4);
    assert_eq!(b.theta(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn pw_quadrant_layout() {
    // ν = e_j leaves only the quadrant-j elements; a dof deep inside the
    // bottom-right quadrant sees only term 2.
    let b = poisson_pw2d(8).unwrap();
    let mesh = StructuredMesh::new(8);
    let i = mesh.interior_index((6, 2)).unwrap();
    let diag: Vec<f64> = b.op.terms().iter().map(|a| a.get(i, i)).collect();
    assert!(diag[1] > 0.0);
    assert_eq!([diag[0], diag[2], diag[3]], [0.0; 3]);
    let i = mesh.interior_index((2, 6)).unwrap();
    assert!(b.op.term(2).get(i, i) > 0.0 && b.op.term(3).get(i, i) == 0.0);
}

#[test]
fn pw_entries_match_reference_assembly() {
    let b = poisson_pw2d(4).unwrap();
    assert_eq!(b.dim(), 9);
    let o = Oracle { n: 4 };
    for (q, a) in b.op.terms().iter().enumerate() {
        let nd = 9;
        let mut r = DMatrix::zeros(nd, nd);
        for t in o.cells() {
            let p: Vec<[f64; 2]> = t.iter().map(|&(i, j)| o.point(i, j)).collect();
            let cx = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let quad = match (cx > 0.0, cy > 0.0) {
                (false, false) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (true, true) => 3,
            };
            if quad != q {
                continue;
            }
            let (h, area, _) = o.hats(&t);
            for k in 0..3 {
                for l in 0..3 {
                    if let (Some(i), Some(j)) = (o.dof(t[k].0, t[k].1), o.dof(t[l].0, t[l].1)) {
                        r[(i, j)] += area * (h[k][1] * h[l][1] + h[k][2] * h[l][2]);
                    }
                }
            }
        }
        assert!(max_diff(a, &r) <= 1e-13, "quadrant {q}");
    }
}

#[test]
fn pw_rejects_bad_sizes() {
    assert!(poisson_pw2d(5).is_err());
    assert!(poisson_pw2d(1).is_err());
    assert!(poisson_pw2d(0).is_err());
}

#[test]
fn convection_is_skew() {
    let b = conv_diff2d(16).unwrap();
    let c = b.op.term(1);
    let sum = SparseMatrix::linear_combination(&[c, &c.transpose()], &[1.0, 1.0]).unwrap();
    assert!(sum.max_abs() <= 1e-13);
    let v = crate::krylov::testutil::random_vec(b.dim(), 3);
    assert!(c.bilinear(&v, &v).abs() <= 1e-12 * vector::dot(&v, &v));
    assert_eq!(b.norms.h1_semi, *b.op.term(0));
    let th = b.theta(&[2.0, std::f64::consts::PI]).unwrap();
    assert!((th[0] - 2.0).abs() <= 1e-15 && (th[1] + 1.0).abs() <= 1e-15);
}

#[test]
fn convdiff_entries_match_reference_assembly() {
    let b = conv_diff2d(4).unwrap();
    assert!(max_diff(b.op.term(0), &oracle_stiffness(4)) <= 1e-13);
    assert!(max_diff(b.op.term(1), &oracle_convection(4)) <= 1e-13);
}

#[test]
fn mass_sums_to_domain_area() {
    for n in [2, 5, 16] {
        let mesh = StructuredMesh::new(n);
        let full = mesh::assemble(&mesh, DofMap::All, 1, |_, e| vec![(0, 0, e.mass())]).unwrap();
        let ones = vec![1.0; full.nrows()];
        assert!((full.bilinear(&ones, &ones) - 4.0).abs() <= 1e-10);
    }
    // interior-only mass loses exactly the boundary rows and columns
    let b = stiff_mass2d(4).unwrap();
    assert!(max_diff(b.op.term(1), &oracle_mass(4)) <= 1e-13);
}

#[test]
fn stiffmass_terms_are_spd() {
    let b = stiff_mass2d(8).unwrap();
    for a in b.op.terms() {
        assert!(chol_factor(a).is_ok());
    }
    assert!(chol_factor(&b.norms.combined()).is_ok());
    assert_eq!(b.theta(&[2.0, 3.0]).unwrap(), vec![0.5, 3.0]);
    assert!(b.theta(&[0.0, 1.0]).is_err());
}

#[test]
fn helmholtz_at_zero_is_poisson() {
    let h = helmholtz2d(8).unwrap();
    let p = stiff_mass2d(8).unwrap();
    let a = h.op.assemble(&h.theta(&[0.0]).unwrap()).unwrap();
    let u = lu_factor(&a).unwrap().solve(&h.rhs);
    let up = chol_factor(p.op.term(0)).unwrap().solve(&p.rhs);
    assert!(vector::rel_diff(&u, &up) <= 1e-12);
    assert_eq!(h.theta(&[1.0]).unwrap(), vec![1.0, -1.0]);
    assert_eq!(h.theta_map.arity(), 2);
}

#[test]
fn helmholtz_indefinite_above_first_eigenvalue() {
    let h = helmholtz2d(4).unwrap();
    let a = h.op.assemble(&h.theta(&[3.0]).unwrap()).unwrap();
    assert_eq!(a.asymmetry(), 0.0);
    let ev = eigenvalues(&a);
    assert!(ev[0] < 0.0 && *ev.last().unwrap() > 0.0);
    let a0 = h.op.assemble(&h.theta(&[1.0]).unwrap()).unwrap();
    assert!(eigenvalues(&a0)[0] > 0.0);
}

#[test]
fn elasticity_terms() {
    let b = elasticity2d(6).unwrap();
    let nd = 25;
    assert_eq!(b.dim(), 2 * nd);
    assert_eq!(b.block_offsets, vec![0, nd, 2 * nd]);
    assert!(chol_factor(b.op.term(0)).is_ok());
    let ev = eigenvalues(b.op.term(1));
    assert!(ev[0] >= -1e-12 * ev.last().unwrap());
    assert!(b.rhs.iter().all(|&v| v > 0.0));
    let th = b.theta(&[1.0, 0.25]).unwrap();
    assert!((th[0] - 0.8).abs() <= 1e-15 && (th[1] - 0.4).abs() <= 1e-15);
    assert!(b.theta(&[1.0, 0.5]).is_err());
    assert!(b.theta(&[1.0, 0.0]).is_err());
}

#[test]
fn elasticity_entries_match_reference_assembly() {
    let b = elasticity2d(4).unwrap();
    assert!(max_diff(b.op.term(0), &oracle_strain(4)) <= 1e-13);
    assert!(max_diff(b.op.term(1), &oracle_div(4)) <= 1e-13);
}

#[test]
fn generators_are_deterministic() {
    for kind in ProblemKind::ALL {
        assert_eq!(kind.generate(6).unwrap(), kind.generate(6).unwrap(), "{kind}");
    }
}

#[test]
fn interior_parameters_give_nonsingular_systems() {
    let cases: [(ProblemKind, Vec<f64>); 5] = [
        (ProblemKind::Pwcoeff, vec![1.0, 2.0, 3.0, 1.5]),
        (ProblemKind::Convdiff, vec![1.0, 0.3]),
        (ProblemKind::Stiffmass, vec![2.0, 2.0]),
        (ProblemKind::Helmholtz, vec![0.5]),
        (ProblemKind::Elasticity, vec![1.0, 0.2]),
    ];
    for (kind, mu) in cases {
        let b = kind.generate(8).unwrap();
        let a = b.op.assemble(&b.theta(&mu).unwrap()).unwrap();
        assert!(lu_factor(&a).is_ok(), "{kind}");
    }
}

/// Nested refinement: coarse P1 values interpolated onto the fine mesh.
fn prolong(n: usize, coarse: &[f64]) -> Vec<f64> {
    let cm = StructuredMesh::new(n);
    let fm = StructuredMesh::new(2 * n);
    let val = |i: usize, j: usize| cm.interior_index((i, j)).map_or(0.0, |k| coarse[k]);
    let mut out = vec![0.0; fm.interior_count()];
    for j in 1..2 * n {
        for i in 1..2 * n {
            let v = match (i % 2, j % 2) {
                (0, 0) => val(i / 2, j / 2),
                (1, 0) => 0.5 * (val(i / 2, j / 2) + val(i / 2 + 1, j / 2)),
                (0, 1) => 0.5 * (val(i / 2, j / 2) + val(i / 2, j / 2 + 1)),
                _ => 0.5 * (val(i / 2, j / 2) + val(i / 2 + 1, j / 2 + 1)),
            };
            out[fm.interior_index((i, j)).unwrap()] = v;
        }
    }
    out
}

#[test]
fn prolongation_is_exact_for_linear_functions() {
    let n = 4;
    let cm = StructuredMesh::new(n);
    let fm = StructuredMesh::new(2 * n);
    let f = |p: [f64; 2]| 0.3 + 2.0 * p[0] - p[1];
    let mut coarse = vec![0.0; cm.interior_count()];
    for j in 1..n {
        for i in 1..n {
            coarse[cm.interior_index((i, j)).unwrap()] = f(cm.coord((i, j)));
        }
    }
    let fine = prolong(n, &coarse);
    // away from the boundary the interpolant is the function itself
    for j in 2..2 * n - 1 {
        for i in 2..2 * n - 1 {
            let k = fm.interior_index((i, j)).unwrap();
            assert!((fine[k] - f(fm.coord((i, j)))).abs() <= 1e-14);
        }
    }
}

#[test]
fn refinement_converges_at_first_order() {
    let solve = |n: usize| {
        let b = stiff_mass2d(n).unwrap();
        let a = b.op.assemble(&b.theta(&[1.0, 1.0]).unwrap()).unwrap();
        chol_factor(&a).unwrap().solve(&b.rhs)
    };
    let (u1, u2, u3) = (solve(8), solve(16), solve(32));
    let k = stiff_mass2d(32).unwrap().norms.h1_semi;
    let u1f = prolong(16, &prolong(8, &u1));
    let u2f = prolong(16, &u2);
    let e1 = vector::sub(&u1f, &u2f);
    let e2 = vector::sub(&u2f, &u3);
    let ratio = (k.bilinear(&e1, &e1) / k.bilinear(&e2, &e2)).sqrt();
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn bundle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ProblemKind::ALL {
        let b = kind.generate(4).unwrap();
        let path = dir.path().join(kind.name());
        export_bundle(&b, &path).unwrap();
        let back = import_bundle(&path).unwrap();
        assert_eq!(back, b, "{kind}");
    }
}

#[test]
fn kind_names_parse() {
    for kind in ProblemKind::ALL {
        assert_eq!(kind.name().parse::<ProblemKind>().unwrap(), kind);
    }
    let err = "stokes".parse::<ProblemKind>().unwrap_err().to_string();
    assert!(err.contains("convdiff") && err.contains("elasticity"));
}
