use krb_core::factor::{chol_factor, lu_factor, make_exact_preconditioner};
use krb_core::krylov::{gmres_run, pcg_run};
use krb_core::la::mm::{read_sparse, write_sparse, Symmetry};
use krb_core::la::{gram_schmidt_m, vector, AffineAt, AffineOperator, SparseMatrix, SpdWeight};
use krb_core::rkbm::{build_multi, build_rcgbm, build_rkbm1, export_model, import_model, online_solve, online_sweep, MultiMode};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(n: usize, rng: &mut ChaCha8Rng, density: f64) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 1.0 + rng.gen_range(0.0..1.0)));
        for j in 0..i {
            if rng.gen_bool(density) {
                let v: f64 = rng.gen_range(-0.5..0.5);
                t.extend([(i, j, v), (j, i, v), (i, i, v.abs()), (j, j, v.abs())]);
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

fn random_nonsym(n: usize, rng: &mut ChaCha8Rng) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0 + rng.gen_range(0.0..1.0)));
        for j in 0..n {
            if i != j && rng.gen_bool(0.15) {
                t.push((i, j, rng.gen_range(-0.4..0.4)));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &t).unwrap()
}

fn spd_problem(n: usize, seed: u64) -> (AffineOperator, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = random_spd(n, &mut rng, 0.2);
    let a2 = random_spd(n, &mut rng, 0.2);
    let f = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (AffineOperator::new(vec![a1, a2]).unwrap(), f)
}

fn orthonormal(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i] / vector::norm(&cols[j]));
    m.qr().q()
}

/// Sine of the largest principal angle between two column spans.
fn max_angle_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let residual = b - a * (a.transpose() * b);
    residual.singular_values().max()
}

#[test]
fn preconditioned_krylov_space_is_parameter_independent() {
    let (op, f) = spd_problem(60, 1);
    let b = make_exact_preconditioner(&op, &[1.0, 1.0], true).unwrap();
    let spans: Vec<DMatrix<f64>> = [[1.0, 2.0], [3.0, 0.5]]
        .iter()
        .map(|theta| {
            let a = AffineAt::new(&op, theta).unwrap();
            orthonormal(&pcg_run(&a, b.as_ref(), &f, 6, 0.0).unwrap().preconditioned_residuals)
        })
        .collect();
    assert_eq!(spans[0].ncols(), 6);
    assert!(max_angle_sine(&spans[0], &spans[1]) <= 1e-7);
    assert!(max_angle_sine(&spans[1], &spans[0]) <= 1e-7);
}

#[test]
fn three_term_operators_lose_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let terms: Vec<SparseMatrix> = (0..3).map(|_| random_spd(40, &mut rng, 0.2)).collect();
    let op = AffineOperator::new(terms).unwrap();
    let f: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = make_exact_preconditioner(&op, &[1.0, 1.0, 1.0], true).unwrap();
    let spans: Vec<DMatrix<f64>> = [[1.0, 2.0, 1.0], [1.0, 1.0, 3.0]]
        .iter()
        .map(|theta| {
            let a = AffineAt::new(&op, theta).unwrap();
            orthonormal(&pcg_run(&a, b.as_ref(), &f, 4, 0.0).unwrap().preconditioned_residuals)
        })
        .collect();
    assert!(max_angle_sine(&spans[0], &spans[1]) > 1e-4);
}

#[test]
fn multi_instance_space_contains_each_single_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let terms: Vec<SparseMatrix> = (0..3).map(|_| random_spd(50, &mut rng, 0.15)).collect();
    let op = AffineOperator::new(terms).unwrap();
    let f: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b = make_exact_preconditioner(&op, &[1.0, 1.0, 1.0], true).unwrap();
    let thetas = vec![vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 3.0]];
    let multi = build_multi(&op, &f, b.as_ref(), &SpdWeight::Identity, &thetas, 4, MultiMode::Mrcgbm, 1e-10).unwrap();
    let pm = DMatrix::from_column_slice(multi.full_dim(), multi.dim(), multi.p().values());
    for theta in &thetas {
        let single = build_rcgbm(&op, &f, b.as_ref(), theta, 4).unwrap();
        let ps = DMatrix::from_column_slice(single.full_dim(), single.dim(), single.p().values());
        assert!(max_angle_sine(&pm, &ps.qr().q()) <= 1e-9);
        // and the multi model is at least as accurate at the harvest point
        let truth = lu_factor(&op.assemble(theta).unwrap()).unwrap().solve(&f);
        let a = op.assemble(theta).unwrap();
        let err = |u: &[f64]| {
            let e = vector::sub(&truth, u);
            a.bilinear(&e, &e).sqrt()
        };
        let es = err(&online_solve(&single, theta).unwrap().1);
        let em = err(&online_solve(&multi, theta).unwrap().1);
        assert!(em <= es * (1.0 + 1e-8) + 1e-12);
    }
}

#[test]
fn cg_truth_consistency_on_generated_problem() {
    let bundle = krb_core::problems::stiff_mass2d(12).unwrap();
    let theta = bundle.theta(&[1.5, 2.0]).unwrap();
    let a = bundle.op.assemble(&theta).unwrap();
    let direct = chol_factor(&a).unwrap().solve(&bundle.rhs);
    let b = make_exact_preconditioner(&bundle.op, &bundle.theta(&[1.0, 1.0]).unwrap(), true).unwrap();
    let at = AffineAt::new(&bundle.op, &theta).unwrap();
    let t = pcg_run(&at, b.as_ref(), &bundle.rhs, 200, 1e-13).unwrap();
    assert!(vector::rel_diff(&t.solution(), &direct) <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn galerkin_model_is_pcg_iterate(seed in 0u64..1000, n in 8usize..40, m in 1usize..6, t1 in 0.2f64..4.0, t2 in 0.2f64..4.0) {
        let (op, f) = spd_problem(n, seed);
        let b = make_exact_preconditioner(&op, &[1.0, 1.0], true).unwrap();
        let model = build_rcgbm(&op, &f, b.as_ref(), &[1.0, 2.5], m).unwrap();
        let theta = [t1, t2];
        let (_, uh) = online_solve(&model, &theta).unwrap();
        let a = AffineAt::new(&op, &theta).unwrap();
        let trace = pcg_run(&a, b.as_ref(), &f, m + 1, 0.0).unwrap();
        // an early exact stop leaves the model with fewer columns
        let k = model.dim().min(trace.iterates.len() - 1);
        prop_assert!(vector::rel_diff(&uh, &trace.iterates[k]) <= 1e-7);
    }

    #[test]
    fn least_squares_model_is_gmres_iterate(seed in 0u64..1000, n in 8usize..40, m in 1usize..6, t1 in 0.5f64..3.0, t2 in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = random_spd(n, &mut rng, 0.2);
        let a2 = random_nonsym(n, &mut rng);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = AffineOperator::new(vec![a1.clone(), a2]).unwrap();
        let b = make_exact_preconditioner(&op, &[1.0, 0.0], false).unwrap();
        let w = SpdWeight::matrix(a1).unwrap();
        let model = build_rkbm1(&op, &f, b.as_ref(), &w, &[1.0, 1.0], m).unwrap();
        let theta = [t1, t2];
        let a = AffineAt::new(&op, &theta).unwrap();
        prop_assume!(lu_factor(&op.assemble(&theta).unwrap()).is_ok());
        let trace = gmres_run(&a, b.as_ref(), &f, m + 1, &w, 0.0).unwrap();
        let k = model.dim().min(trace.iterates.len() - 1);
        let (_, uh) = online_solve(&model, &theta).unwrap();
        prop_assert!(vector::rel_diff(&uh, &trace.iterates[k]) <= 1e-6);
    }

    #[test]
    fn weighted_gram_schmidt_is_orthonormal(seed in 0u64..1000, n in 5usize..30, k in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_spd(n, &mut rng, 0.3);
        let w = SpdWeight::matrix(m.clone()).unwrap();
        let cols: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let (q, rank) = gram_schmidt_m(&cols, &w, 1e-10).unwrap();
        prop_assert_eq!(rank, k.min(n));
        for i in 0..rank {
            for j in 0..rank {
                let v = m.bilinear(q.col(i), q.col(j));
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - e).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn direct_solvers_agree(seed in 0u64..1000, n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_spd(n, &mut rng, 0.25);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = chol_factor(&a).unwrap().solve(&f);
        let y = lu_factor(&a).unwrap().solve(&f);
        prop_assert!(vector::rel_diff(&x, &y) <= 1e-10);
        let r = vector::sub(&f, &a.spmv(&x).unwrap());
        prop_assert!(vector::norm(&r) <= 1e-10 * vector::norm(&f));
    }

    #[test]
    fn matrix_market_round_trip_is_exact(seed in 0u64..1000, n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_nonsym(n, &mut rng);
        let mut buf = Vec::new();
        write_sparse(&mut buf, &a, Symmetry::General).unwrap();
        prop_assert_eq!(read_sparse(buf.as_slice()).unwrap(), a);
        let s = random_spd(n, &mut rng, 0.3);
        let mut buf = Vec::new();
        write_sparse(&mut buf, &s, Symmetry::Symmetric).unwrap();
        prop_assert_eq!(read_sparse(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn sweep_order_does_not_matter(seed in 0u64..1000, shift in 0usize..10) {
        let (op, f) = spd_problem(20, seed);
        let b = make_exact_preconditioner(&op, &[1.0, 1.0], true).unwrap();
        let model = build_rcgbm(&op, &f, b.as_ref(), &[1.0, 2.0], 4).unwrap();
        let grid: Vec<Vec<f64>> = (0..10).map(|i| vec![0.5 + 0.2 * i as f64, 2.0 - 0.1 * i as f64]).collect();
        let mut rotated = grid.clone();
        rotated.rotate_left(shift);
        let a = online_sweep(&model, &grid, true);
        let b2 = online_sweep(&model, &rotated, true);
        for (i, pt) in a.iter().enumerate() {
            let j = (i + 10 - shift) % 10;
            prop_assert_eq!(pt.as_ref().unwrap(), b2[j].as_ref().unwrap());
        }
    }

    #[test]
    fn persisted_models_are_bit_identical(seed in 0u64..1000, m in 1usize..6) {
        let (op, f) = spd_problem(15, seed);
        let b = make_exact_preconditioner(&op, &[1.0, 1.0], true).unwrap();
        let model = build_rcgbm(&op, &f, b.as_ref(), &[1.0, 2.0], m).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_model(&model, dir.path()).unwrap();
        let back = import_model(dir.path()).unwrap();
        prop_assert_eq!(&back, &model);
    }
}
