//! Dense reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn from_row_major(data: &[f64], r: usize, c: usize) -> Dense {
    (0..r).map(|i| data[i * c..(i + 1) * c].to_vec()).collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            for j in 0..c {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Dense = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(*v);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            solve(a, &e)
        })
        .collect();
    transpose(&cols)
}

/// Neumaier compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

pub fn energy(a: &Dense, x: &[f64]) -> f64 {
    matvec(a, x).iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Random SPD matrix `B B^T + n I`.
pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Dense {
    let b: Dense = (0..n).map(|_| random_vector(n, rng)).collect();
    let mut a = matmul(&b, &transpose(&b));
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += n as f64;
    }
    a
}

/// Exact Q1 stiffness of the unit-coefficient Laplacian on one square,
/// corners ordered (0,0), (1,0), (1,1), (0,1).
pub const Q1_STIFFNESS: [[f64; 4]; 4] = [
    [4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0],
    [-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0],
];

/// Dense element-loop assembly of the unit-coefficient problem with constant load `f`.
pub fn dense_poisson(n1: usize, f: f64) -> (Dense, Vec<f64>) {
    let n = (n1 - 1) * (n1 - 1);
    let h = 1.0 / n1 as f64;
    let idx = |i: usize, j: usize| -> Option<usize> {
        (i > 0 && i < n1 && j > 0 && j < n1).then(|| (j - 1) * (n1 - 1) + (i - 1))
    };
    let mut a = zeros(n, n);
    let mut b = vec![0.0; n];
    let corners = [(0, 0), (1, 0), (1, 1), (0, 1)];
    for ey in 0..n1 {
        for ex in 0..n1 {
            for (p, &(px, py)) in corners.iter().enumerate() {
                let Some(gp) = idx(ex + px, ey + py) else { continue };
                b[gp] += f * h * h / 4.0;
                for (q, &(qx, qy)) in corners.iter().enumerate() {
                    if let Some(gq) = idx(ex + qx, ey + qy) {
                        a[gp][gq] += Q1_STIFFNESS[p][q];
                    }
                }
            }
        }
    }
    (a, b)
}

/// 1D hat function of coarse node `c` (spacing `k` fine cells) at fine node `i`.
pub fn hat(c: usize, k: usize, i: usize) -> f64 {
    let d = (i as f64 - (c * k) as f64).abs() / k as f64;
    (1.0 - d).max(0.0)
}

/// Dense bilinear interpolation matrix from interior coarse to interior fine nodes.
pub fn dense_prolongation(n1: usize, n0: usize) -> Dense {
    let k = n1 / n0;
    let mut r0 = zeros((n1 - 1) * (n1 - 1), (n0 - 1) * (n0 - 1));
    for j in 1..n1 {
        for i in 1..n1 {
            for cy in 1..n0 {
                for cx in 1..n0 {
                    r0[(j - 1) * (n1 - 1) + i - 1][(cy - 1) * (n0 - 1) + cx - 1] = hat(cx, k, i) * hat(cy, k, j);
                }
            }
        }
    }
    r0
}

/// Fine nodes strictly inside the coarse cell expanded by `layers` fine cells.
pub fn oracle_dofs(n1: usize, n0: usize, layers: usize, cx: usize, cy: usize) -> Vec<usize> {
    let k = (n1 / n0) as i64;
    let (l, n1i) = (layers as i64, n1 as i64);
    let inside = |c: usize, v: i64| v > c as i64 * k - l && v < (c as i64 + 1) * k + l && v > 0 && v < n1i;
    let mut out = Vec::new();
    for j in 1..n1i {
        for i in 1..n1i {
            if inside(cx, i) && inside(cy, j) {
                out.push(((j - 1) * (n1i - 1) + i - 1) as usize);
            }
        }
    }
    out
}

pub fn local_matrix(a: &Dense, dofs: &[usize]) -> Dense {
    dofs.iter().map(|&r| dofs.iter().map(|&c| a[r][c]).collect()).collect()
}

/// Dense `sum_i omega_i R_i A_i^{-1} R_i^T A` built from geometry alone.
pub fn oracle_p(n1: usize, n0: usize, layers: usize) -> Dense {
    let (a, _) = dense_poisson(n1, 1.0);
    let n = a.len();
    let mut b = zeros(n, n);
    if n0 > 1 {
        let r0 = dense_prolongation(n1, n0);
        let a0 = matmul(&transpose(&r0), &matmul(&a, &r0));
        let c = matmul(&r0, &matmul(&inverse(&a0), &transpose(&r0)));
        for i in 0..n {
            for j in 0..n {
                b[i][j] += c[i][j];
            }
        }
    }
    for cy in 0..n0 {
        for cx in 0..n0 {
            let dofs = oracle_dofs(n1, n0, layers, cx, cy);
            let inv = inverse(&local_matrix(&a, &dofs));
            for (p, &i) in dofs.iter().enumerate() {
                for (q, &j) in dofs.iter().enumerate() {
                    b[i][j] += inv[p][q];
                }
            }
        }
    }
    matmul(&b, &a)
}

/// Extreme eigenvalues of `P = B A` (B symmetric) through the similar form `L^T B L`.
pub fn p_extremes(p: &Dense, a: &Dense) -> (f64, f64) {
    use nalgebra::DMatrix;
    let n = a.len();
    let am = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let pm = DMatrix::from_fn(n, n, |i, j| p[i][j]);
    let bm = &pm * am.clone().try_inverse().unwrap();
    let l = am.cholesky().unwrap().l();
    let sym = l.transpose() * bm * &l;
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    (eig.min(), eig.max())
}
