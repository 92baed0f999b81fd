//! Bilinear (Q1) finite elements for `-div(a grad u) = f` on the unit square
//! with homogeneous Dirichlet conditions, and the coarse-space prolongation.
//!
//! Interior fine nodes are numbered row-major: node `(i, j)` with
//! `1 <= i, j <= n1 - 1` (x index `i`, y index `j`) has index
//! `(j - 1) * (n1 - 1) + (i - 1)`. Coarse interior nodes follow the same rule
//! on the `n0` grid.

use crate::error::{check_dim, Error, Result};
use crate::sparse::{DenseVector, SparseMatrix};

/// Fine grid with `n1` cells per direction refined from a coarse grid of `n0` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub n1: usize,
    pub n0: usize,
}

impl GridSpec {
    pub fn new(n1: usize, n0: usize) -> Result<Self> {
        let g = Self { n1, n0 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 {
            return Err(Error::Grid(format!("n1 = {} must be at least 2", self.n1)));
        }
        if self.n0 == 0 || !self.n1.is_multiple_of(self.n0) {
            return Err(Error::Grid(format!("n0 = {} does not divide n1 = {}", self.n0, self.n1)));
        }
        if self.n1 / self.n0 < 2 {
            return Err(Error::Grid(format!("refinement factor k = {} must exceed 1", self.n1 / self.n0)));
        }
        Ok(())
    }

    /// Refinement factor `k = n1 / n0`.
    pub fn k(&self) -> usize {
        self.n1 / self.n0
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n1 as f64
    }

    pub fn h0(&self) -> f64 {
        1.0 / self.n0 as f64
    }

    /// Number of interior fine nodes `(n1 - 1)^2`.
    pub fn fine_dofs(&self) -> usize {
        (self.n1 - 1) * (self.n1 - 1)
    }

    /// Number of interior coarse nodes `(n0 - 1)^2`.
    pub fn coarse_dofs(&self) -> usize {
        (self.n0 - 1) * (self.n0 - 1)
    }

    /// Index of interior fine node `(i, j)`.
    pub fn fine_index(&self, i: usize, j: usize) -> usize {
        (j - 1) * (self.n1 - 1) + (i - 1)
    }

    /// Grid coordinates `(i, j)` of a fine interior index.
    pub fn fine_coords(&self, idx: usize) -> (usize, usize) {
        (idx % (self.n1 - 1) + 1, idx / (self.n1 - 1) + 1)
    }
}

/// Assembled discrete model problem.
#[derive(Debug, Clone)]
pub struct FemProblem {
    pub grid: GridSpec,
    pub a: SparseMatrix,
    pub b: DenseVector,
    pub coefficient: String,
    pub rhs: String,
}

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

fn basis(s: f64, t: f64) -> [f64; 4] {
    [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t]
}

fn basis_grad(s: f64, t: f64) -> [[f64; 2]; 4] {
    [[-(1.0 - t), -(1.0 - s)], [1.0 - t, -s], [t, s], [-t, 1.0 - s]]
}

/// Assembles stiffness matrix and load vector with 2x2 Gauss quadrature per cell.
pub fn assemble_poisson(
    grid: GridSpec,
    coefficient: &dyn Fn(f64, f64) -> f64,
    rhs: &dyn Fn(f64, f64) -> f64,
) -> Result<FemProblem> {
    grid.validate()?;
    let n1 = grid.n1;
    let h = grid.h();
    let n = grid.fine_dofs();
    let corner = [(0usize, 0usize), (1, 0), (1, 1), (0, 1)];

    let mut triplets = Vec::with_capacity(16 * n1 * n1);
    let mut b = vec![0.0; n];
    for ey in 0..n1 {
        for ex in 0..n1 {
            let mut ke = [[0.0; 4]; 4];
            let mut fe = [0.0; 4];
            for &s in &GAUSS {
                for &t in &GAUSS {
                    let (x, y) = ((ex as f64 + s) * h, (ey as f64 + t) * h);
                    let av = coefficient(x, y);
                    if !(av > 0.0) {
                        return Err(Error::Ellipticity { value: av, x, y });
                    }
                    let fv = rhs(x, y);
                    let g = basis_grad(s, t);
                    let phi = basis(s, t);
                    for p in 0..4 {
                        for q in 0..4 {
                            ke[p][q] += 0.25 * av * (g[p][0] * g[q][0] + g[p][1] * g[q][1]);
                        }
                        fe[p] += 0.25 * fv * phi[p] * h * h;
                    }
                }
            }
            let nodes: Vec<Option<usize>> = corner
                .iter()
                .map(|&(dx, dy)| {
                    let (i, j) = (ex + dx, ey + dy);
                    (i > 0 && i < n1 && j > 0 && j < n1).then(|| grid.fine_index(i, j))
                })
                .collect();
            for p in 0..4 {
                let Some(gp) = nodes[p] else { continue };
                b[gp] += fe[p];
                for q in 0..4 {
                    if let Some(gq) = nodes[q] {
                        triplets.push((gp, gq, ke[p][q]));
                    }
                }
            }
        }
    }
    let a = SparseMatrix::from_triplets(&triplets, n, n)?;
    Ok(FemProblem { grid, a, b, coefficient: "custom".into(), rhs: "custom".into() })
}

/// Assembly with constant coefficient and constant right-hand side.
pub fn assemble_poisson_constant(grid: GridSpec, a: f64, f: f64) -> Result<FemProblem> {
    let mut p = assemble_poisson(grid, &|_, _| a, &|_, _| f)?;
    p.coefficient = format!("constant {a}");
    p.rhs = format!("constant {f}");
    Ok(p)
}

/// 1D hat-function weights of the coarse nodes seen from fine node `i`.
fn coarse_weights_1d(i: usize, k: usize, n0: usize) -> Vec<(usize, f64)> {
    let (c, r) = (i / k, i % k);
    let raw = if r == 0 { vec![(c, 1.0)] } else { vec![(c, (k - r) as f64 / k as f64), (c + 1, r as f64 / k as f64)] };
    raw.into_iter().filter(|&(c, _)| c > 0 && c < n0).collect()
}

/// Bilinear interpolation from interior coarse nodes to interior fine nodes (`N x M0`).
pub fn coarse_prolongation(grid: GridSpec) -> Result<SparseMatrix> {
    grid.validate()?;
    let (n0, n1, k) = (grid.n0, grid.n1, grid.k());
    let mut triplets = Vec::new();
    for j in 1..n1 {
        let wy = coarse_weights_1d(j, k, n0);
        for i in 1..n1 {
            let wx = coarse_weights_1d(i, k, n0);
            let row = grid.fine_index(i, j);
            for &(cy, vy) in &wy {
                for &(cx, vx) in &wx {
                    triplets.push((row, (cy - 1) * (n0 - 1) + (cx - 1), vx * vy));
                }
            }
        }
    }
    SparseMatrix::from_triplets(&triplets, grid.fine_dofs(), grid.coarse_dofs())
}

/// Galerkin coarse operator `R0^T A R0`.
pub fn coarse_operator(a: &SparseMatrix, r0: &SparseMatrix) -> Result<SparseMatrix> {
    check_dim(a.ncols(), r0.nrows())?;
    let ar0 = a.matmul(r0)?;
    r0.transpose().matmul(&ar0)
}
