//! Naive dense reference computations for small instances.
//!
//! Index sets and the coarse interpolation are rederived here from the grid
//! geometry, and all factorizations are dense, so agreement with the sparse
//! path is a genuine cross-check.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_dim, Error, Result};
use crate::splitting::Splitting;

pub const SIZE_CAP: usize = 2000;
pub const SUBSET_CAP: u128 = 100_000;

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseOperator {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        (0..n).for_each(|i| m.data[i * n + i] = 1.0);
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            check_dim(n, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn matmul(&self, other: &DenseOperator) -> DenseOperator {
        let n = self.n;
        let mut out = DenseOperator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a != 0.0 {
                    for j in 0..n {
                        out.data[i * n + j] += a * other.data[k * n + j];
                    }
                }
            }
        }
        out
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseOperator, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    if n > SIZE_CAP {
        return Err(Error::OracleCap(format!("dense solve of size {n}")));
    }
    check_dim(n, b.len())?;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs())).unwrap();
        if m[piv * n + col].abs() <= 1e-14 * scale {
            return Err(Error::Singular(col));
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for i in col + 1..n {
            let f = m[i * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    m[i * n + j] -= f * m[col * n + j];
                }
                x[i] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i * n + i];
    }
    Ok(x)
}

fn dense_inverse(a: &DenseOperator) -> Result<DenseOperator> {
    let n = a.n;
    let mut inv = DenseOperator::zeros(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = dense_solve(a, &e)?;
        for (i, v) in col.into_iter().enumerate() {
            inv.data[i * n + j] = v;
        }
    }
    Ok(inv)
}

/// Lower Cholesky factor by the textbook loop.
fn dense_cholesky(a: &DenseOperator) -> Result<DenseOperator> {
    let n = a.n;
    let mut l = DenseOperator::zeros(n);
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l.get(j, k) * l.get(j, k)).sum();
        let d = a.get(j, j) - s;
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let d = d.sqrt();
        l.data[j * n + j] = d;
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l.get(i, k) * l.get(j, k)).sum();
            l.data[i * n + j] = (a.get(i, j) - s) / d;
        }
    }
    Ok(l)
}

/// Dense data of one splitting component: global indices or interpolation, inverse local matrix, weight.
#[derive(Debug, Clone)]
struct DenseComponent {
    /// Columns of the prolongation (`N x M_i`), stored column-major by local index.
    prolong: Vec<Vec<(usize, f64)>>,
    inv: DenseOperator,
    weight: f64,
}

/// Dense additive Schwarz data with the spectrum of `P` in the `A`-inner product.
#[derive(Debug, Clone)]
pub struct DenseSplitting {
    pub a: DenseOperator,
    pub p: DenseOperator,
    /// Eigenvalues of `P`, ascending.
    pub spectrum: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    components: Vec<DenseComponent>,
}

fn hat(t: f64, width: f64) -> f64 {
    (1.0 - t.abs() / width).max(0.0)
}

/// Builds `P = sum_i omega_i R_i A_i^{-1} R_i^T A` densely from the grid geometry.
pub fn assemble_p_dense(s: &Splitting) -> Result<DenseSplitting> {
    let n_dof = s.dim();
    if n_dof > SIZE_CAP {
        return Err(Error::OracleCap(format!("N = {n_dof} exceeds {SIZE_CAP}")));
    }
    let g = s.grid;
    let (n0, n1) = (g.n0, g.n1);
    let (h, h0) = (1.0 / n1 as f64, 1.0 / n0 as f64);
    let side = n1 - 1;
    let coord = |idx: usize| (((idx % side) + 1) as f64 * h, ((idx / side) + 1) as f64 * h);

    let mut a = DenseOperator::zeros(n_dof);
    for i in 0..n_dof {
        let (cols, vals) = s.matrix().row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            a.data[i * n_dof + j] = v;
        }
    }

    let mut prolongs: Vec<Vec<Vec<(usize, f64)>>> = Vec::new();
    // coarse interpolation columns
    let mut coarse = Vec::new();
    for cy in 1..n0 {
        for cx in 1..n0 {
            let (xc, yc) = (cx as f64 * h0, cy as f64 * h0);
            let col: Vec<(usize, f64)> = (0..n_dof)
                .filter_map(|k| {
                    let (x, y) = coord(k);
                    let w = hat(x - xc, h0) * hat(y - yc, h0);
                    (w.abs() > 1e-14).then_some((k, w))
                })
                .collect();
            coarse.push(col);
        }
    }
    prolongs.push(coarse);
    let delta = s.layers as f64 * h;
    for cy in 0..n0 {
        for cx in 0..n0 {
            let (x0, x1) = (cx as f64 * h0 - delta, (cx + 1) as f64 * h0 + delta);
            let (y0, y1) = (cy as f64 * h0 - delta, (cy + 1) as f64 * h0 + delta);
            let inside = |v: f64, lo: f64, hi: f64| v > lo + 0.5 * h && v < hi - 0.5 * h;
            let cols: Vec<Vec<(usize, f64)>> = (0..n_dof)
                .filter(|&k| {
                    let (x, y) = coord(k);
                    inside(x, x0, x1) && inside(y, y0, y1)
                })
                .map(|k| vec![(k, 1.0)])
                .collect();
            prolongs.push(cols);
        }
    }

    let mut components = Vec::with_capacity(prolongs.len());
    let mut b = DenseOperator::zeros(n_dof);
    for (i, prolong) in prolongs.into_iter().enumerate() {
        let mi = prolong.len();
        let weight = s.weights[i];
        let mut local = DenseOperator::zeros(mi);
        for (p, cp) in prolong.iter().enumerate() {
            for (q, cq) in prolong.iter().enumerate() {
                let mut v = 0.0;
                for &(r, wr) in cp {
                    for &(c, wc) in cq {
                        v += wr * a.data[r * n_dof + c] * wc;
                    }
                }
                local.data[p * mi + q] = v;
            }
        }
        let inv = if mi > 0 { dense_inverse(&local)? } else { DenseOperator::zeros(0) };
        for (p, cp) in prolong.iter().enumerate() {
            for (q, cq) in prolong.iter().enumerate() {
                let v = weight * inv.data[p * mi + q];
                for &(r, wr) in cp {
                    for &(c, wc) in cq {
                        b.data[r * n_dof + c] += v * wr * wc;
                    }
                }
            }
        }
        components.push(DenseComponent { prolong, inv, weight });
    }

    let p = b.matmul(&a);
    let l = dense_cholesky(&a)?;
    let lm = DMatrix::from_row_slice(n_dof, n_dof, &l.data);
    let bm = DMatrix::from_row_slice(n_dof, n_dof, &b.data);
    let sym = lm.transpose() * bm * &lm;
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut spectrum: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let (lambda_min, lambda_max) = (spectrum[0], spectrum[n_dof - 1]);
    Ok(DenseSplitting { a, p, spectrum, lambda_min, lambda_max, kappa: lambda_max / lambda_min, components })
}

impl DenseSplitting {
    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `a(v, v) = v^T A v`.
    pub fn energy(&self, v: &[f64]) -> f64 {
        v.iter().zip(self.a.matvec(v)).map(|(x, y)| x * y).sum()
    }

    /// `omega_i R_i T_i e`, the weighted local correction for error `e`.
    pub fn local_correction(&self, i: usize, e: &[f64]) -> Vec<f64> {
        let comp = &self.components[i];
        let ae = self.a.matvec(e);
        let ri: Vec<f64> = comp.prolong.iter().map(|col| col.iter().map(|&(k, w)| w * ae[k]).sum()).collect();
        let di = comp.inv.matvec(&ri);
        let mut out = vec![0.0; e.len()];
        for (col, d) in comp.prolong.iter().zip(&di) {
            for &(k, w) in col {
                out[k] += comp.weight * w * d;
            }
        }
        out
    }

    /// `||e - xi sum_{i in set} omega_i R_i T_i e||_A^2`.
    pub fn error_after(&self, e: &[f64], set: &[usize], xi: f64) -> f64 {
        let mut next = e.to_vec();
        for &i in set {
            let c = self.local_correction(i, e);
            next.iter_mut().zip(&c).for_each(|(x, y)| *x -= xi * y);
        }
        self.energy(&next)
    }

    /// `a(P^{-1} v, v)`.
    pub fn omega_norm(&self, v: &[f64]) -> Result<f64> {
        let w = dense_solve(&self.p, v)?;
        Ok(self.a.matvec(&w).iter().zip(v).map(|(x, y)| x * y).sum())
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Every size-`p` subset of `0..count` in lexicographic order.
pub fn subsets(count: usize, p: usize) -> Result<Vec<Vec<usize>>> {
    if p > count {
        return Err(Error::Parameter(format!("p = {p} exceeds {count}")));
    }
    if binomial(count as u128, p as u128) > SUBSET_CAP {
        return Err(Error::OracleCap(format!("C({count}, {p}) subsets")));
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        out.push(idx.clone());
        let Some(k) = (0..p).rev().find(|&k| idx[k] != k + count - p) else { break };
        idx[k] += 1;
        for j in k + 1..p {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Exact `E ||e^{(1)}||_A^2` over all uniform size-`p` index sets.
pub fn exhaustive_expectation(ds: &DenseSplitting, e: &[f64], p: usize, xi: f64) -> Result<f64> {
    let all = subsets(ds.component_count(), p)?;
    let corr: Vec<Vec<f64>> = (0..ds.component_count()).map(|i| ds.local_correction(i, e)).collect();
    let mut total = 0.0;
    for set in &all {
        let mut next = e.to_vec();
        for &i in set {
            next.iter_mut().zip(&corr[i]).for_each(|(x, y)| *x -= xi * y);
        }
        total += ds.energy(&next);
    }
    Ok(total / all.len() as f64)
}
