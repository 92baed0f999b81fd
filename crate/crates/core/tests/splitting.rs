mod common;

use common::*;
use schwarz_lab::fem::{assemble_poisson_constant, GridSpec};
use schwarz_lab::splitting::{build_splitting, estimate_spectral_bounds, Splitting, WeightSpec};
use schwarz_lab::Error;

fn splitting(n1: usize, n0: usize, layers: usize) -> (Splitting, Vec<f64>) {
    let p = assemble_poisson_constant(GridSpec::new(n1, n0).unwrap(), 1.0, 1.0).unwrap();
    (build_splitting(&p, layers, &WeightSpec::default()).unwrap(), p.b)
}

#[test]
fn subdomain_sets_match_geometry_and_cover() {
    let (s, _) = splitting(24, 4, 1);
    let mut covered = vec![false; s.dim()];
    for sub in &s.subdomains {
        let (cx, cy) = sub.cell;
        assert_eq!(sub.id, cy * 4 + cx + 1);
        assert_eq!(sub.dofs, oracle_dofs(24, 4, 1, cx, cy));
        for &d in &sub.dofs {
            covered[d] = true;
        }
        // nodes interior to the coarse cell always belong to it
        for j in cy * 6 + 1..(cy + 1) * 6 {
            for i in cx * 6 + 1..(cx + 1) * 6 {
                assert!(sub.dofs.contains(&s.grid.fine_index(i, j)));
            }
        }
    }
    assert!(covered.iter().all(|c| *c));
}

#[test]
fn figure_one_configuration() {
    let (s, _) = splitting(24, 4, 1);
    assert_eq!(s.n(), 16);
    assert!((s.delta() - 1.0 / 6.0).abs() < 1e-15);
    for sub in &s.subdomains {
        let (cx, cy) = sub.cell;
        if (1..3).contains(&cx) && (1..3).contains(&cy) {
            assert_eq!(s.neighbors[sub.id].len(), 8);
        }
    }
    assert_eq!(s.max_neighbors, 8);
    for i in 1..=s.n() {
        for &j in &s.neighbors[i] {
            assert!(s.neighbors[j].contains(&i));
            let shared = s.subdomains[i - 1].dofs.iter().any(|d| s.subdomains[j - 1].dofs.contains(d));
            assert!(shared);
        }
    }
}

#[test]
fn neighbor_bound_for_small_overlap() {
    for (n1, n0, l) in [(24, 4, 2), (30, 5, 2), (40, 4, 4)] {
        let (s, _) = splitting(n1, n0, l);
        assert!(s.neighbors.iter().all(|v| v.len() <= 8));
    }
}

#[test]
fn reference_configuration_sizes() {
    let (s, _) = splitting(400, 20, 6);
    assert_eq!(s.n(), 400);
    assert!((s.delta() - 0.3).abs() < 1e-15);
    let sum = s.summary();
    // interior subdomains are (20 + 2*6 - 1)^2 nodes
    assert_eq!(sum.interior_subdomain_dofs, Some(961));
    assert_eq!(sum.coarse_dofs, 361);
    assert!(sum.to_text().contains("n = 400"));
}

#[test]
fn overlap_must_stay_below_k() {
    let p = assemble_poisson_constant(GridSpec::new(8, 2).unwrap(), 1.0, 1.0).unwrap();
    assert!(matches!(build_splitting(&p, 4, &WeightSpec::default()), Err(Error::Overlap { .. })));
    assert!(build_splitting(&p, 0, &WeightSpec::default()).is_err());
    assert!(build_splitting(&p, 1, &WeightSpec::Uniform(-1.0)).is_err());
    assert!(build_splitting(&p, 1, &WeightSpec::PerIndex(vec![1.0; 3])).is_err());
}

#[test]
fn apply_t_cases() {
    let (s, b) = splitting(8, 2, 1);
    let (a, _) = dense_poisson(8, 1.0);
    assert!(s.apply_t(2, &vec![0.0; s.dim()]).unwrap().iter().all(|v| *v == 0.0));
    let mut r = rng(6);
    let res = random_vector(s.dim(), &mut r);
    for i in 1..=s.n() {
        let dofs = &s.subdomains[i - 1].dofs;
        let ri: Vec<f64> = dofs.iter().map(|&d| res[d]).collect();
        let oracle = solve(&local_matrix(&a, dofs), &ri);
        assert!(dist(&s.apply_t(i, &res).unwrap(), &oracle) <= 1e-10 * norm(&oracle));
    }
    let r0 = dense_prolongation(8, 2);
    let a0 = matmul(&transpose(&r0), &matmul(&a, &r0));
    let oracle = solve(&a0, &matvec(&transpose(&r0), &res));
    assert!(dist(&s.apply_t(0, &res).unwrap(), &oracle) <= 1e-10 * norm(&oracle));
    assert!(s.apply_t(5, &res).is_err());

    let (whole, bw) = splitting(6, 1, 1);
    let u = whole.apply_t(1, &bw).unwrap();
    let (aw, _) = dense_poisson(6, 1.0);
    assert!(dist(&u, &solve(&aw, &bw)) < 1e-12);
    let _ = b;
}

#[test]
fn apply_p_matches_dense_oracle() {
    for (n1, n0, l) in [(8, 2, 1), (9, 3, 1), (12, 3, 2)] {
        let (s, _) = splitting(n1, n0, l);
        let p = oracle_p(n1, n0, l);
        let mut r = rng(7);
        for _ in 0..5 {
            let x = random_vector(s.dim(), &mut r);
            let px = s.apply_p(&x).unwrap();
            let oracle = matvec(&p, &x);
            assert!(dist(&px, &oracle) <= 1e-10 * norm(&oracle));
        }
    }
}

#[test]
fn single_subdomain_is_identity() {
    let (s, _) = splitting(6, 1, 1);
    assert_eq!(s.n(), 1);
    assert_eq!(s.coarse.dim(), 0);
    let mut r = rng(8);
    let x = random_vector(s.dim(), &mut r);
    assert!(dist(&s.apply_p(&x).unwrap(), &x) < 1e-12);
    let b = estimate_spectral_bounds(&s, 10, 0).unwrap();
    assert!((b.lambda_min_est - 1.0).abs() < 1e-10);
    assert!((b.lambda_max_est - 1.0).abs() < 1e-10);
    assert!((b.kappa_est - 1.0).abs() < 1e-10);
}

#[test]
fn linearity_symmetry_and_sandwich() {
    let (s, _) = splitting(8, 2, 1);
    let a = s.matrix();
    let inner = |x: &[f64], y: &[f64]| -> f64 { a.spmv(x).unwrap().iter().zip(y).map(|(u, v)| u * v).sum() };
    let est = estimate_spectral_bounds(&s, 60, 1).unwrap();
    let mut r = rng(9);
    for _ in 0..20 {
        let v = random_vector(s.dim(), &mut r);
        let w = random_vector(s.dim(), &mut r);
        let sum: Vec<f64> = v.iter().zip(&w).map(|(x, y)| x + y).collect();
        let (pv, pw) = (s.apply_p(&v).unwrap(), s.apply_p(&w).unwrap());
        let lin: Vec<f64> = pv.iter().zip(&pw).map(|(x, y)| x + y).collect();
        assert!(dist(&s.apply_p(&sum).unwrap(), &lin) <= 1e-12 * norm(&lin));

        let (nv, nw) = (inner(&v, &v).sqrt(), inner(&w, &w).sqrt());
        assert!((inner(&pv, &w) - inner(&v, &pw)).abs() <= 1e-9 * nv * nw);

        let q = inner(&pv, &v);
        assert!(q >= 0.99 * est.lambda_min_est * nv * nv);
        assert!(q <= 1.01 * est.lambda_max_est * nv * nv);
    }
}

#[test]
fn lanczos_matches_dense_eigenvalues() {
    let (s, _) = splitting(8, 2, 1);
    let p = oracle_p(8, 2, 1);
    let (lo, hi) = p_extremes(&p, &dense_poisson(8, 1.0).0);
    let est = estimate_spectral_bounds(&s, 60, 2).unwrap();
    assert!((est.lambda_min_est - lo).abs() <= 0.01 * lo);
    assert!((est.lambda_max_est - hi).abs() <= 0.01 * hi);
    assert!(est.lambda_min_est <= est.lambda_max_est);
}

#[test]
fn user_bounds() {
    let (s, _) = splitting(8, 2, 1);
    let est = estimate_spectral_bounds(&s, 60, 2).unwrap();
    let b = est.with_user_bounds(0.5, 5.0).unwrap();
    assert!((b.kappa_bar() - 10.0).abs() < 1e-12);
    assert!(est.with_user_bounds(2.0, 1.0).is_err());
    assert!(est.with_user_bounds(0.0, 1.0).is_err());
}

#[test]
fn weights_scale_p() {
    let p = assemble_poisson_constant(GridSpec::new(8, 2).unwrap(), 1.0, 1.0).unwrap();
    let one = build_splitting(&p, 1, &WeightSpec::Uniform(1.0)).unwrap();
    let half = build_splitting(&p, 1, &WeightSpec::Uniform(0.5)).unwrap();
    let mut r = rng(10);
    let x = random_vector(one.dim(), &mut r);
    let a = one.apply_p(&x).unwrap();
    let b = half.apply_p(&x).unwrap();
    assert!(a.iter().zip(&b).all(|(u, v)| (u - 2.0 * v).abs() < 1e-12));
}
