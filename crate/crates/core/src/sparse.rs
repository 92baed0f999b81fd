//! Compressed sparse row storage, products, block extraction and a
//! profile (envelope) Cholesky factorization for the subproblem solves.

use std::collections::VecDeque;
use std::io::Write;

use crate::error::{check_dim, Error, Result};

/// Dense vectors are plain `Vec<f64>`; slices are accepted wherever possible.
pub type DenseVector = Vec<f64>;

/// CSR matrix with sorted, duplicate-free column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(triplets: &[(usize, usize, f64)], nrows: usize, ncols: usize) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::Structure(format!("triplet ({r}, {c}) outside {nrows}x{ncols}")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));

        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    /// Builds a matrix from raw CSR arrays, validating the layout.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 || row_offsets[0] != 0 {
            return Err(Error::Structure("row_offsets must have length nrows + 1 and start at 0".into()));
        }
        if *row_offsets.last().unwrap() != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::Structure("row_offsets, col_indices and values disagree".into()));
        }
        for i in 0..nrows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(Error::Structure(format!("row_offsets decrease at row {i}")));
            }
            let cols = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structure(format!("columns of row {i} not sorted and unique")));
            }
            if cols.iter().any(|&c| c >= ncols) {
                return Err(Error::Structure(format!("column index out of range in row {i}")));
            }
        }
        Ok(Self { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_offsets: vec![0; nrows + 1], col_indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, row_offsets: (0..=n).collect(), col_indices: (0..n).collect(), values: vec![1.0; n] }
    }

    /// Converts a row-major dense matrix, dropping exact zeros.
    pub fn from_dense(dense: &[f64], nrows: usize, ncols: usize) -> Result<Self> {
        check_dim(nrows * ncols, dense.len())?;
        let mut trip = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = dense[i * ncols + j];
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(&trip, nrows, ncols)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim(self.ncols, x.len())?;
        let mut y = vec![0.0; self.nrows];
        self.spmv_acc(1.0, x, &mut y);
        Ok(y)
    }

    /// `y += alpha * A x` without dimension checks; callers guarantee sizes.
    #[inline]
    pub fn spmv_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c];
            }
            *yi += alpha * s;
        }
    }

    /// `y = A^T x`.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim(self.nrows, x.len())?;
        let mut y = vec![0.0; self.ncols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                y[*c] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let slot = next[*c];
                col_indices[slot] = i;
                values[slot] = *v;
                next[*c] += 1;
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, row_offsets: counts, col_indices, values }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        check_dim(self.ncols, other.nrows)?;
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (k, a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(*k);
                for (j, b) in ocols.iter().zip(ovals) {
                    if mark[*j] != i {
                        mark[*j] = i;
                        acc[*j] = 0.0;
                        touched.push(*j);
                    }
                    acc[*j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix { nrows: self.nrows, ncols: other.ncols, row_offsets, col_indices, values })
    }

    /// Submatrix `A(rows, cols)`; both index sets must be sorted and in range.
    pub fn extract_block(&self, rows: &[usize], cols: &[usize]) -> Result<SparseMatrix> {
        validate_index_set(rows, self.nrows, "row")?;
        validate_index_set(cols, self.ncols, "column")?;
        let mut local = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            local[c] = k;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let (rc, rv) = self.row(r);
            for (c, v) in rc.iter().zip(rv) {
                let k = local[*c];
                if k != usize::MAX {
                    col_indices.push(k);
                    values.push(*v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix { nrows: rows.len(), ncols: cols.len(), row_offsets, col_indices, values })
    }

    /// Checks `|a_ij - a_ji| <= tol * max|a|` over all stored entries.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        (0..self.nrows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(j, v)| (v - self.get(*j, i)).abs() <= tol * scale)
        })
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                d[i * self.ncols + c] = *v;
            }
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(out, "{} {} {:.17e}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

fn validate_index_set(set: &[usize], bound: usize, what: &str) -> Result<()> {
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Structure(format!("{what} index set not sorted and unique")));
    }
    if let Some(&last) = set.last() {
        if last >= bound {
            return Err(Error::Structure(format!("{what} index {last} out of range {bound}")));
        }
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Returns `y + alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Result<DenseVector> {
    check_dim(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| b + alpha * a).collect())
}

pub fn norm2(x: &[f64]) -> f64 {
    dot_unchecked(x, x).sqrt()
}

/// Reverse Cuthill-McKee ordering of the symmetric pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.iter().filter(|&&j| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![0usize; n];

    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]).expect("unvisited node");
        let start = pseudo_peripheral(a, seed, &degree, &mut level);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&j| j != v && !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &SparseMatrix, start: usize, level: &mut [usize]) -> (usize, Vec<usize>) {
    level.iter_mut().for_each(|l| *l = usize::MAX);
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    let mut last = vec![start];
    while let Some(v) = queue.pop_front() {
        let lv = level[v];
        if lv > depth {
            depth = lv;
            last.clear();
        }
        if lv == depth {
            last.push(v);
        }
        for &j in a.row(v).0 {
            if level[j] == usize::MAX {
                level[j] = lv + 1;
                queue.push_back(j);
            }
        }
    }
    (depth, last)
}

fn pseudo_peripheral(a: &SparseMatrix, seed: usize, degree: &[usize], level: &mut [usize]) -> usize {
    let mut node = seed;
    let (mut depth, mut last) = bfs_levels(a, node, level);
    loop {
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).expect("nonempty level");
        let (d, l) = bfs_levels(a, candidate, level);
        if d > depth {
            node = candidate;
            depth = d;
            last = l;
        } else {
            return node;
        }
    }
}

/// Profile Cholesky factor `P A P^T = L L^T` under a reverse Cuthill-McKee ordering.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    env: Vec<f64>,
}

/// Relative pivot threshold below which a matrix is declared not positive definite.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

pub fn factor_spd(a: &SparseMatrix) -> Result<SpdFactor> {
    if a.nrows() != a.ncols() {
        return Err(Error::Structure(format!("factor of non-square {}x{} matrix", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let perm = reverse_cuthill_mckee(a);
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut first = vec![0usize; n];
    for i in 0..n {
        let (cols, _) = a.row(perm[i]);
        first[i] = cols.iter().map(|&c| inv[c]).filter(|&c| c <= i).min().unwrap_or(i);
    }
    let mut start = vec![0usize; n + 1];
    for i in 0..n {
        start[i + 1] = start[i] + (i - first[i] + 1);
    }
    let mut env = vec![0.0; start[n]];
    for i in 0..n {
        let (cols, vals) = a.row(perm[i]);
        for (c, v) in cols.iter().zip(vals) {
            let j = inv[*c];
            if j <= i {
                env[start[i] + j - first[i]] += v;
            }
        }
    }
    let max_diag = (0..n).map(|i| env[start[i + 1] - 1]).fold(0.0f64, f64::max);
    let threshold = PIVOT_TOLERANCE * max_diag;

    for i in 0..n {
        let fi = first[i];
        for j in fi..i {
            let fj = first[j];
            let k0 = fi.max(fj);
            let s = {
                let ri = &env[start[i] + k0 - fi..start[i] + j - fi];
                let rj = &env[start[j] + k0 - fj..start[j] + j - fj];
                dot_unchecked(ri, rj)
            };
            let ljj = env[start[j + 1] - 1];
            let slot = start[i] + j - fi;
            env[slot] = (env[slot] - s) / ljj;
        }
        let row = &env[start[i]..start[i + 1] - 1];
        let d = env[start[i + 1] - 1] - dot_unchecked(row, row);
        if !(d > threshold) {
            return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
        }
        env[start[i + 1] - 1] = d.sqrt();
    }
    Ok(SpdFactor { n, perm, first, start, env })
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.env.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<DenseVector> {
        check_dim(self.n, b.len())?;
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        Ok(x)
    }

    /// Solves into `x`; both slices must have the factor's dimension.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.env[self.start[i]..self.start[i + 1] - 1];
            let s = dot_unchecked(row, &y[fi..i]);
            y[i] = (y[i] - s) / self.env[self.start[i + 1] - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let zi = y[i] / self.env[self.start[i + 1] - 1];
            y[i] = zi;
            let row = &self.env[self.start[i]..self.start[i + 1] - 1];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * zi;
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
    }
}
