//! Overlapping domain-decomposition space splitting with a coarse space.
//!
//! Index `0` always denotes the coarse space `V0`; indices `1..=n` are the
//! overlapping subdomains, numbered row-major over the coarse cells
//! (`i = cy * n0 + cx + 1`).

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::fem::{coarse_operator, coarse_prolongation, FemProblem, GridSpec};
use crate::sparse::{dot_unchecked, factor_spd, DenseVector, SparseMatrix, SpdFactor};

mod lanczos;

pub use lanczos::{estimate_spectral_bounds, tridiagonal_extremes, SpectralBounds};

/// Weights `omega_0..omega_n` of the splitting.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Uniform(f64),
    PerIndex(Vec<f64>),
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Uniform(1.0)
    }
}

impl WeightSpec {
    fn resolve(&self, count: usize) -> Result<Vec<f64>> {
        let w = match self {
            WeightSpec::Uniform(v) => vec![*v; count],
            WeightSpec::PerIndex(v) => {
                check_dim(count, v.len())?;
                v.clone()
            }
        };
        if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::Parameter(format!("weights must be positive, got {bad}")));
        }
        Ok(w)
    }
}

/// One overlapping subdomain and its local operators.
#[derive(Debug, Clone)]
pub struct Subdomain {
    pub id: usize,
    /// Coarse cell `(cx, cy)` the subdomain grows from.
    pub cell: (usize, usize),
    /// Inclusive fine-node box `(i_lo, i_hi, j_lo, j_hi)`.
    pub node_box: (usize, usize, usize, usize),
    /// Sorted global indices `J_i`.
    pub dofs: Vec<usize>,
    pub matrix: SparseMatrix,
    pub factor: SpdFactor,
    /// Coarse nodes whose basis functions touch the subdomain (support of `R_{0i}`).
    pub coarse_support: Vec<usize>,
    halo_rows: Vec<usize>,
    halo_block: SparseMatrix,
}

impl Subdomain {
    pub fn size(&self) -> usize {
        self.dofs.len()
    }
}

/// Coarse space data: prolongation, Galerkin operator and factor.
#[derive(Debug, Clone)]
pub struct CoarseSpace {
    pub r0: SparseMatrix,
    r0t: SparseMatrix,
    ar0: SparseMatrix,
    pub a0: SparseMatrix,
    pub factor: Option<SpdFactor>,
}

impl CoarseSpace {
    pub fn dim(&self) -> usize {
        self.r0.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct Splitting {
    pub grid: GridSpec,
    pub layers: usize,
    pub weights: Vec<f64>,
    pub subdomains: Vec<Subdomain>,
    pub coarse: CoarseSpace,
    /// Symmetric neighbor lists by subdomain id (`neighbors[i]` for `i >= 1`, `neighbors[0]` empty).
    pub neighbors: Vec<Vec<usize>>,
    /// Coupling blocks `A_{ii'} = A(J_{i'}, J_i)` for every neighbor `i'` of `i`.
    pub coupling: Vec<Vec<(usize, SparseMatrix)>>,
    pub max_neighbors: usize,
    a: SparseMatrix,
}

fn boxes_intersect(a: (usize, usize, usize, usize), b: (usize, usize, usize, usize)) -> bool {
    a.0.max(b.0) <= a.1.min(b.1) && a.2.max(b.2) <= a.3.min(b.3)
}

/// Builds the splitting for `problem` with `layers` fine cell layers added around each coarse cell.
pub fn build_splitting(problem: &FemProblem, layers: usize, weights: &WeightSpec) -> Result<Splitting> {
    let grid = problem.grid;
    grid.validate()?;
    let (n0, n1, k) = (grid.n0, grid.n1, grid.k());
    if layers == 0 || layers >= k {
        return Err(Error::Overlap { layers, k });
    }
    let a = &problem.a;
    check_dim(grid.fine_dofs(), a.nrows())?;
    let n = n0 * n0;
    let weights = weights.resolve(n + 1)?;

    let r0 = coarse_prolongation(grid)?;
    let ar0 = a.matmul(&r0)?;
    let r0t = r0.transpose();
    let a0 = coarse_operator(a, &r0)?;
    let coarse_factor = if r0.ncols() > 0 { Some(factor_spd(&a0)?) } else { None };

    type Cell = (usize, usize);
    type NodeBox = (usize, usize, usize, usize);
    let boxes: Vec<(Cell, NodeBox)> = (0..n)
        .map(|s| {
            let (cx, cy) = (s % n0, s / n0);
            let lo = |c: usize| (c * k).saturating_sub(layers) + 1;
            let hi = |c: usize| ((c + 1) * k + layers - 1).min(n1 - 1);
            ((cx, cy), (lo(cx).max(1), hi(cx), lo(cy).max(1), hi(cy)))
        })
        .collect();

    let subdomains: Vec<Subdomain> = boxes
        .par_iter()
        .enumerate()
        .map(|(s, &(cell, bx))| -> Result<Subdomain> {
            let mut dofs = Vec::with_capacity((bx.1 + 1 - bx.0) * (bx.3 + 1 - bx.2));
            for j in bx.2..=bx.3 {
                for i in bx.0..=bx.1 {
                    dofs.push(grid.fine_index(i, j));
                }
            }
            let matrix = a.extract_block(&dofs, &dofs)?;
            let factor = factor_spd(&matrix)?;
            let mut halo_rows: Vec<usize> = dofs.iter().flat_map(|&d| a.row(d).0.iter().copied()).collect();
            halo_rows.sort_unstable();
            halo_rows.dedup();
            let halo_block = a.extract_block(&halo_rows, &dofs)?;
            let mut coarse_support: Vec<usize> = dofs.iter().flat_map(|&d| r0.row(d).0.iter().copied()).collect();
            coarse_support.sort_unstable();
            coarse_support.dedup();
            Ok(Subdomain { id: s + 1, cell, node_box: bx, dofs, matrix, factor, coarse_support, halo_rows, halo_block })
        })
        .collect::<Result<_>>()?;

    let mut neighbors = vec![Vec::new(); n + 1];
    for s in 0..n {
        for t in 0..n {
            if s != t && boxes_intersect(boxes[s].1, boxes[t].1) {
                neighbors[s + 1].push(t + 1);
            }
        }
    }
    let coupling: Vec<Vec<(usize, SparseMatrix)>> = (0..=n)
        .into_par_iter()
        .map(|i| -> Result<Vec<(usize, SparseMatrix)>> {
            if i == 0 {
                return Ok(Vec::new());
            }
            neighbors[i]
                .iter()
                .map(|&t| Ok((t, a.extract_block(&subdomains[t - 1].dofs, &subdomains[i - 1].dofs)?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let max_neighbors = neighbors.iter().map(Vec::len).max().unwrap_or(0);

    Ok(Splitting {
        grid,
        layers,
        weights,
        subdomains,
        coarse: CoarseSpace { r0, r0t, ar0, a0, factor: coarse_factor },
        neighbors,
        coupling,
        max_neighbors,
        a: a.clone(),
    })
}

impl Splitting {
    /// Number of subdomains `n` (the splitting has `n + 1` components).
    pub fn n(&self) -> usize {
        self.subdomains.len()
    }

    pub fn index_count(&self) -> usize {
        self.subdomains.len() + 1
    }

    /// Global dimension `N`.
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    /// Overlap parameter `delta = layers / k`.
    pub fn delta(&self) -> f64 {
        self.layers as f64 / self.grid.k() as f64
    }

    /// Whether components `i` and `j` share degrees of freedom; the coarse space overlaps everything.
    pub fn overlaps(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        if i == 0 || j == 0 {
            return self.coarse.dim() > 0;
        }
        self.neighbors[i].binary_search(&j).is_ok() || self.neighbors[i].contains(&j)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i > self.n() {
            return Err(Error::Parameter(format!("component index {i} exceeds n = {}", self.n())));
        }
        Ok(())
    }

    /// Local residual `R_i^T r` (for `i = 0`, `R0^T r`).
    pub fn restrict(&self, i: usize, r: &[f64]) -> Result<DenseVector> {
        self.check_index(i)?;
        check_dim(self.dim(), r.len())?;
        Ok(self.restrict_unchecked(i, r))
    }

    pub(crate) fn restrict_unchecked(&self, i: usize, r: &[f64]) -> DenseVector {
        if i == 0 {
            let mut r0 = vec![0.0; self.coarse.dim()];
            self.coarse.r0t.spmv_acc(1.0, r, &mut r0);
            r0
        } else {
            self.subdomains[i - 1].dofs.iter().map(|&d| r[d]).collect()
        }
    }

    /// Local solve `d_i = A_i^{-1} R_i^T r`; returns `(local residual, d_i)`.
    pub(crate) fn local_solve(&self, i: usize, r: &[f64]) -> (DenseVector, DenseVector) {
        let ri = self.restrict_unchecked(i, r);
        let mut d = vec![0.0; ri.len()];
        if i == 0 {
            if let Some(f) = &self.coarse.factor {
                f.solve_into(&ri, &mut d);
            }
        } else {
            self.subdomains[i - 1].factor.solve_into(&ri, &mut d);
        }
        (ri, d)
    }

    /// `d_i = A_i^{-1} r_i` for the residual `r` (coarse path for `i = 0`).
    pub fn apply_t(&self, i: usize, r: &[f64]) -> Result<DenseVector> {
        self.check_index(i)?;
        check_dim(self.dim(), r.len())?;
        Ok(self.local_solve(i, r).1)
    }

    /// `out += scale * R_i d`.
    pub fn add_prolongated(&self, i: usize, scale: f64, d: &[f64], out: &mut [f64]) {
        if i == 0 {
            for (row, o) in out.iter_mut().enumerate() {
                let (cols, vals) = self.coarse.r0.row(row);
                let s: f64 = cols.iter().zip(vals).map(|(c, v)| v * d[*c]).sum();
                *o += scale * s;
            }
        } else {
            for (&g, v) in self.subdomains[i - 1].dofs.iter().zip(d) {
                out[g] += scale * v;
            }
        }
    }

    /// `out += scale * A R_i d` using the stored local blocks.
    pub fn add_operator_prolongated(&self, i: usize, scale: f64, d: &[f64], out: &mut [f64]) {
        if i == 0 {
            self.coarse.ar0.spmv_acc(scale, d, out);
        } else {
            let sub = &self.subdomains[i - 1];
            for (k, &row) in sub.halo_rows.iter().enumerate() {
                let (cols, vals) = sub.halo_block.row(k);
                out[row] += scale * cols.iter().zip(vals).map(|(c, v)| v * d[*c]).sum::<f64>();
            }
        }
    }

    /// The additive Schwarz operator `P x = sum_i omega_i R_i A_i^{-1} R_i^T A x`.
    pub fn apply_p(&self, x: &[f64]) -> Result<DenseVector> {
        check_dim(self.dim(), x.len())?;
        let ax = self.a.spmv(x)?;
        Ok(self.apply_p_to_residual(&ax))
    }

    /// `sum_i omega_i R_i A_i^{-1} R_i^T r`, summed in ascending `i`.
    pub fn apply_p_to_residual(&self, r: &[f64]) -> DenseVector {
        let locals: Vec<DenseVector> = (0..=self.n()).into_par_iter().map(|i| self.local_solve(i, r).1).collect();
        let mut out = vec![0.0; self.dim()];
        for (i, d) in locals.iter().enumerate() {
            self.add_prolongated(i, self.weights[i], d, &mut out);
        }
        out
    }

    /// `omega_i r_i^T A_i^{-1} r_i`, the local energy of subproblem `i`.
    pub fn local_energy(&self, i: usize, r: &[f64]) -> f64 {
        let (ri, d) = self.local_solve(i, r);
        self.weights[i] * dot_unchecked(&ri, &d)
    }

    pub fn summary(&self) -> SplittingSummary {
        let sizes: Vec<usize> = self.subdomains.iter().map(Subdomain::size).collect();
        let interior: Vec<usize> = self
            .subdomains
            .iter()
            .filter(|s| {
                let (cx, cy) = s.cell;
                let n0 = self.grid.n0;
                cx > 0 && cy > 0 && cx + 1 < n0 && cy + 1 < n0
            })
            .map(Subdomain::size)
            .collect();
        SplittingSummary {
            n0: self.grid.n0,
            n1: self.grid.n1,
            k: self.grid.k(),
            layers: self.layers,
            delta: self.delta(),
            n: self.n(),
            fine_dofs: self.dim(),
            coarse_dofs: self.coarse.dim(),
            subdomain_dofs_min: sizes.iter().copied().min().unwrap_or(0),
            subdomain_dofs_max: sizes.iter().copied().max().unwrap_or(0),
            subdomain_dofs_mean: sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64,
            interior_subdomain_dofs: interior.first().copied(),
            max_neighbors: self.max_neighbors,
        }
    }
}

/// Structural statistics of a splitting.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SplittingSummary {
    pub n0: usize,
    pub n1: usize,
    pub k: usize,
    pub layers: usize,
    pub delta: f64,
    pub n: usize,
    pub fine_dofs: usize,
    pub coarse_dofs: usize,
    pub subdomain_dofs_min: usize,
    pub subdomain_dofs_max: usize,
    pub subdomain_dofs_mean: f64,
    pub interior_subdomain_dofs: Option<usize>,
    pub max_neighbors: usize,
}

impl SplittingSummary {
    /// `key = value` text, one field per line.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }
}
