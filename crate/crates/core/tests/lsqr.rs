use nalgebra::{DMatrix, DVector};
use nlk_core::{lsqr_solve, DenseOperator, LinearOperator, LsqrConfig, RowBlock, SparseRow};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `U diag(σ) V^T` with orthonormal factors, `rank` nonzero singular values
/// in `[0.5, 2]`.
fn conditioned(rng: &mut ChaCha8Rng, p: usize, n: usize, rank: usize) -> DMatrix<f64> {
    let u = gaussian_matrix(rng, p, p).qr().q();
    let v = gaussian_matrix(rng, n, n).qr().q();
    let mut s = DMatrix::zeros(p, n);
    for k in 0..rank {
        s[(k, k)] = rng.random_range(0.5..2.0);
    }
    u * s * v.transpose()
}

fn operator(a: &DMatrix<f64>) -> DenseOperator {
    let data: Vec<f64> = a.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
    DenseOperator::new(a.nrows(), a.ncols(), data).unwrap()
}

/// Eigenpairs of `A^T A`, split into range and null space of `A`.
fn gram_eigen(a: &DMatrix<f64>) -> (Vec<(f64, DVector<f64>)>, Vec<DVector<f64>>) {
    let eig = (a.transpose() * a).symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut range = Vec::new();
    let mut null = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k).into_owned();
        if lambda > 1e-10 * top {
            range.push((lambda, v));
        } else {
            null.push(v);
        }
    }
    (range, null)
}

/// `A^+ b = Σ_k v_k v_k^T A^T b / λ_k` over the nonzero eigenvalues of `A^T A`.
fn pinv_solution(a: &DMatrix<f64>, b: &[f64]) -> DVector<f64> {
    let atb = a.transpose() * DVector::from_column_slice(b);
    let (range, _) = gram_eigen(a);
    let mut x = DVector::zeros(a.ncols());
    for (lambda, v) in range {
        x += &v * (v.dot(&atb) / lambda);
    }
    x
}

#[test]
fn matches_dense_pseudoinverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let p = rng.random_range(1..=30);
        let n = rng.random_range(1..=30);
        let rank = rng.random_range(1..=p.min(n));
        let a = conditioned(&mut rng, p, n, rank);
        let b: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expected = pinv_solution(&a, &b);
        let got = lsqr_solve(&operator(&a), &b, &LsqrConfig::default()).unwrap();
        let gap = (DVector::from_vec(got.solution) - &expected).norm();
        assert!(gap <= 1e-8 * expected.norm(), "{p}x{n} rank {rank}: gap {gap:e}");
    }
}

#[test]
fn normal_equation_residual_is_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let cfg = LsqrConfig::default();
    for _ in 0..100 {
        let p = rng.random_range(1..=50);
        let n = rng.random_range(1..=50);
        let a = conditioned(&mut rng, p, n, p.min(n));
        let b = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
        let v = DVector::from_vec(lsqr_solve(&operator(&a), b.as_slice(), &cfg).unwrap().solution);
        let r = &a * &v - &b;
        let atr = a.transpose() * &r;
        let scale = a.norm() * r.norm() + (a.transpose() * &b).norm();
        assert!(atr.norm() <= 10.0 * cfg.atol.max(cfg.btol) * scale);
    }
}

#[test]
fn rank_deficient_solution_has_no_null_space_component() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..50 {
        let p = rng.random_range(3..=25);
        let n = rng.random_range(3..=25);
        let rank = rng.random_range(1..p.min(n));
        let a = conditioned(&mut rng, p, n, rank);
        let b: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = DVector::from_vec(lsqr_solve(&operator(&a), &b, &LsqrConfig::default()).unwrap().solution);
        let (_, basis) = gram_eigen(&a);
        assert_eq!(basis.len(), n - rank);
        assert!(!basis.is_empty());
        for z in basis {
            assert!(v.dot(&z).abs() <= 1e-8 * v.norm() * z.norm());
        }
    }
}

fn random_sparse_rows(rng: &mut ChaCha8Rng, p: usize, n: usize) -> Vec<SparseRow> {
    (0..p)
        .map(|_| {
            let mut row = SparseRow::new(n);
            for j in 0..n {
                if rng.random_bool(0.4) {
                    row.push(j, rng.random_range(-3.0..3.0));
                }
            }
            row
        })
        .collect()
}

proptest! {
    #[test]
    fn row_block_adjoint_is_consistent(seed in any::<u64>(), p in 1usize..20, n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_sparse_rows(&mut rng, p, n);
        let op = RowBlock::new(&rows, n);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut av = vec![0.0; p];
        let mut atu = vec![0.0; n];
        op.apply(&v, &mut av);
        op.apply_adjoint(&u, &mut atu);
        let lhs: f64 = av.iter().zip(&u).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(&atu).map(|(a, b)| a * b).sum();
        let scale: f64 = av.iter().map(|a| a.abs()).sum::<f64>() + atu.iter().map(|a| a.abs()).sum::<f64>() + 1.0;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn dense_operator_adjoint_is_consistent(seed in any::<u64>(), p in 1usize..20, n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian_matrix(&mut rng, p, n);
        let op = operator(&a);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut av = vec![0.0; p];
        let mut atu = vec![0.0; n];
        op.apply(&v, &mut av);
        op.apply_adjoint(&u, &mut atu);
        let lhs: f64 = av.iter().zip(&u).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(&atu).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs() + 1.0));
    }
}

#[test]
fn sparse_block_solve_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..20 {
        let rows = random_sparse_rows(&mut rng, 6, 12);
        if rows.iter().all(|r| r.nnz() == 0) {
            continue;
        }
        let dense = DMatrix::from_row_slice(6, 12, &rows.iter().flat_map(|r| r.to_dense()).collect::<Vec<_>>());
        let b: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sparse = lsqr_solve(&RowBlock::new(&rows, 12), &b, &LsqrConfig::default()).unwrap();
        let via_dense = lsqr_solve(&operator(&dense), &b, &LsqrConfig::default()).unwrap();
        for (x, y) in sparse.solution.iter().zip(&via_dense.solution) {
            assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }
}
