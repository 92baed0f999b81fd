mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use schwarz_lab::sparse::{axpy, dot, factor_spd, SparseMatrix};
use schwarz_lab::Error;

fn sparse(a: &Dense) -> SparseMatrix {
    let (r, c) = (a.len(), a[0].len());
    let flat: Vec<f64> = a.iter().flatten().copied().collect();
    SparseMatrix::from_dense(&flat, r, c).unwrap()
}

fn dense(a: &SparseMatrix) -> Dense {
    from_row_major(&a.to_dense(), a.nrows(), a.ncols())
}

#[test]
fn duplicate_triplets_are_summed() {
    let a = SparseMatrix::from_triplets(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
    assert_eq!(a.to_dense(), vec![3.0]);
    assert_eq!(a.nnz(), 1);
}

#[test]
fn empty_triplets_give_zero_matrix() {
    let a = SparseMatrix::from_triplets(&[], 2, 2).unwrap();
    assert_eq!(a.nnz(), 0);
    assert_eq!(a.row_offsets(), &[0, 0, 0]);
    assert_eq!(a.spmv(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn out_of_range_triplet_is_structural_error() {
    assert!(matches!(SparseMatrix::from_triplets(&[(2, 0, 1.0)], 2, 2), Err(Error::Structure(_))));
}

#[test]
fn element_stencils_match_dense_assembly() {
    let n1 = 4;
    let (oracle, _) = dense_poisson(n1, 1.0);
    let idx = |i: usize, j: usize| (i > 0 && i < n1 && j > 0 && j < n1).then(|| (j - 1) * (n1 - 1) + i - 1);
    let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
    let mut triplets = Vec::new();
    for ey in 0..n1 {
        for ex in 0..n1 {
            for (p, &(px, py)) in corners.iter().enumerate() {
                for (q, &(qx, qy)) in corners.iter().enumerate() {
                    if let (Some(a), Some(b)) = (idx(ex + px, ey + py), idx(ex + qx, ey + qy)) {
                        triplets.push((a, b, Q1_STIFFNESS[p][q]));
                    }
                }
            }
        }
    }
    let a = SparseMatrix::from_triplets(&triplets, 9, 9).unwrap();
    assert_eq!(dense(&a), oracle);
    assert!(a.is_symmetric(0.0));
}

#[test]
fn spmv_identity_zero_and_dense_oracle() {
    let mut r = rng(1);
    let x = random_vector(5, &mut r);
    assert_eq!(SparseMatrix::identity(5).spmv(&x).unwrap(), x);
    let a = random_spd(5, &mut r);
    let s = sparse(&a);
    assert_eq!(s.spmv(&[0.0; 5]).unwrap(), vec![0.0; 5]);
    let y = s.spmv(&x).unwrap();
    for (u, v) in y.iter().zip(matvec(&a, &x)) {
        assert!((u - v).abs() <= 1e-14 * v.abs().max(1e-300));
    }
    assert!(matches!(s.spmv(&[1.0; 4]), Err(Error::Dimension { .. })));
}

#[test]
fn dot_and_axpy() {
    let mut r = rng(2);
    let x = random_vector(100, &mut r);
    let y = random_vector(100, &mut r);
    assert_eq!(dot(&x, &[0.0; 100]).unwrap(), 0.0);
    assert_eq!(axpy(0.0, &x, &y).unwrap(), y);
    let exact = compensated_sum(x.iter().zip(&y).map(|(a, b)| a * b));
    let mag: f64 = x.iter().zip(&y).map(|(a, b)| (a * b).abs()).sum();
    assert!((dot(&x, &y).unwrap() - exact).abs() <= 1e-13 * mag);
    assert!(dot(&x, &y[..99]).is_err());
    assert!(axpy(1.0, &x, &y[..99]).is_err());
}

#[test]
fn factor_identity_and_diagonal() {
    let b = vec![3.0, -1.0, 0.5];
    let f = factor_spd(&SparseMatrix::identity(3)).unwrap();
    assert_eq!(f.solve(&b).unwrap(), b);
    let d = SparseMatrix::from_triplets(&[(0, 0, 2.0), (1, 1, 4.0)], 2, 2).unwrap();
    let x = factor_spd(&d).unwrap().solve(&[2.0, 8.0]).unwrap();
    assert!(dist(&x, &[1.0, 2.0]) < 1e-15);
}

#[test]
fn factor_poisson_matches_dense_elimination() {
    let (a, _) = dense_poisson(8, 1.0);
    let ones = vec![1.0; a.len()];
    let oracle = solve(&a, &ones);
    let x = factor_spd(&sparse(&a)).unwrap().solve(&ones).unwrap();
    assert!(dist(&x, &oracle) <= 1e-9 * norm(&oracle));
    let res: Vec<f64> = matvec(&a, &x).iter().zip(&ones).map(|(u, v)| u - v).collect();
    assert!(norm(&res) / norm(&ones) < 1e-10);
}

#[test]
fn indefinite_matrix_is_rejected() {
    let a = SparseMatrix::from_dense(&[1.0, 2.0, 2.0, 1.0], 2, 2).unwrap();
    assert!(matches!(factor_spd(&a), Err(Error::NotPositiveDefinite { .. })));
    let singular = SparseMatrix::from_dense(&[1.0, 1.0, 1.0, 1.0], 2, 2).unwrap();
    assert!(factor_spd(&singular).is_err());
}

#[test]
fn extract_block_cases() {
    let mut r = rng(3);
    let (a, _) = dense_poisson(6, 1.0);
    let s = sparse(&a);
    let all: Vec<usize> = (0..a.len()).collect();
    assert_eq!(s.extract_block(&all, &all).unwrap(), s);
    // first and last rows of the 5x5 interior grid are not adjacent
    let zero = s.extract_block(&[0, 1, 2], &[20, 21, 22]).unwrap();
    assert!(zero.values().iter().all(|v| *v == 0.0));

    let m: Dense = (0..5)
        .map(|_| random_vector(5, &mut r).into_iter().map(|v| if v.abs() < 0.4 { 0.0 } else { v }).collect())
        .collect();
    let sm = sparse(&m);
    let (rows, cols) = (vec![0, 2, 3], vec![1, 3, 4]);
    let blk = dense(&sm.extract_block(&rows, &cols).unwrap());
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            assert_eq!(blk[a][b], m[i][j]);
        }
    }
    assert!(sm.extract_block(&[0, 5], &cols).is_err());
    assert!(sm.extract_block(&[2, 1], &cols).is_err());
}

#[test]
fn matrix_market_dump() {
    let a = SparseMatrix::from_triplets(&[(0, 1, 2.5)], 2, 2).unwrap();
    let mut out = Vec::new();
    a.write_matrix_market(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 2.5"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spd_quadratic_form_positive(n in 2usize..20, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = sparse(&random_spd(n, &mut r));
        for _ in 0..100 {
            let x = random_vector(n, &mut r);
            prop_assert!(dot(&x, &s.spmv(&x).unwrap()).unwrap() > 0.0);
        }
    }

    #[test]
    fn factor_solve_round_trip(n in 1usize..200, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = sparse(&random_spd(n, &mut r));
        let y = random_vector(n, &mut r);
        let x = factor_spd(&s).unwrap().solve(&s.spmv(&y).unwrap()).unwrap();
        prop_assert!(dist(&x, &y) <= 1e-9 * norm(&y));
    }

    #[test]
    fn extract_block_composes(seed in any::<u64>(), mask in proptest::collection::vec(any::<bool>(), 25)) {
        let (a, _) = dense_poisson(6, 1.0);
        let s = sparse(&a);
        let mut r = rng(seed);
        let outer: Vec<usize> = (0..25).filter(|&i| mask[i]).collect();
        prop_assume!(!outer.is_empty());
        let inner: Vec<usize> = (0..outer.len()).filter(|_| r.random_bool(0.5)).collect();
        prop_assume!(!inner.is_empty());
        let composed: Vec<usize> = inner.iter().map(|&k| outer[k]).collect();
        let two_step = s.extract_block(&outer, &outer).unwrap().extract_block(&inner, &inner).unwrap();
        prop_assert_eq!(two_step, s.extract_block(&composed, &composed).unwrap());
    }

    #[test]
    fn assembly_rows_sorted_and_unique(entries in proptest::collection::vec((0usize..6, 0usize..6, -5.0f64..5.0), 0..60)) {
        let a = SparseMatrix::from_triplets(&entries, 6, 6).unwrap();
        prop_assert_eq!(a.row_offsets().len(), 7);
        for i in 0..6 {
            let (cols, _) = a.row(i);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
        let mut oracle = zeros(6, 6);
        for &(i, j, v) in &entries {
            oracle[i][j] += v;
        }
        let d = dense(&a);
        for i in 0..6 {
            for j in 0..6 {
                prop_assert!((d[i][j] - oracle[i][j]).abs() < 1e-12);
            }
        }
    }
}
