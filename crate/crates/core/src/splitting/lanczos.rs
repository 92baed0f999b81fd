//! Lanczos estimates of the extreme eigenvalues of `P` in the `A`-inner product.

use rand::Rng;

use super::Splitting;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::sparse::dot_unchecked;

const MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpectralBounds {
    pub lambda_min_est: f64,
    pub lambda_max_est: f64,
    pub kappa_est: f64,
    /// Lanczos steps actually taken.
    pub steps: usize,
    pub restarts: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl SpectralBounds {
    /// Attaches user bounds `lower <= lambda_min`, `upper >= lambda_max`.
    pub fn with_user_bounds(mut self, lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower <= upper) {
            return Err(Error::Parameter(format!("need 0 < lower <= upper, got {lower}, {upper}")));
        }
        self.lower = Some(lower);
        self.upper = Some(upper);
        Ok(self)
    }

    /// `kappa_bar = upper / lower`, falling back to the estimate.
    pub fn kappa_bar(&self) -> f64 {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => u / l,
            _ => self.kappa_est,
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (k, &a) in alpha.iter().enumerate() {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
        q = a - x - if k == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (a.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect(alpha: &[f64], beta: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest and largest eigenvalues of a symmetric tridiagonal matrix.
pub fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    assert!(m > 0 && beta.len() + 1 >= m);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..m {
        let r = if k > 0 { beta[k - 1].abs() } else { 0.0 } + if k + 1 < m { beta[k].abs() } else { 0.0 };
        lo = lo.min(alpha[k] - r);
        hi = hi.max(alpha[k] + r);
    }
    let pad = 1e-12 * (lo.abs() + hi.abs() + 1.0);
    (lo, hi) = (lo - pad, hi + pad);
    (bisect(alpha, beta, 0, lo, hi), bisect(alpha, beta, m - 1, lo, hi))
}

struct Basis<'a> {
    s: &'a Splitting,
    v: Vec<Vec<f64>>,
    av: Vec<Vec<f64>>,
}

impl Basis<'_> {
    fn energy(&self, w: &[f64]) -> f64 {
        let mut aw = vec![0.0; w.len()];
        self.s.matrix().spmv_acc(1.0, w, &mut aw);
        dot_unchecked(w, &aw)
    }

    /// Removes the `A`-projection onto the basis (two passes).
    fn orthogonalize(&self, w: &mut [f64]) {
        for _ in 0..2 {
            for (vk, avk) in self.v.iter().zip(&self.av) {
                let c = dot_unchecked(w, avk);
                w.iter_mut().zip(vk).for_each(|(x, y)| *x -= c * y);
            }
        }
    }

    /// Appends `w / ||w||_A` if its norm is non-negligible relative to `scale`.
    fn push(&mut self, mut w: Vec<f64>, scale: f64) -> Option<f64> {
        let aw = self.s.matrix().spmv(&w).ok()?;
        let nrm2 = dot_unchecked(&w, &aw);
        if !(nrm2 > 0.0) {
            return None;
        }
        let nrm = nrm2.sqrt();
        if nrm <= 1e-10 * scale {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        self.v.push(w);
        self.av.push(aw.into_iter().map(|x| x / nrm).collect());
        Some(nrm)
    }
}

/// Lanczos with full reorthogonalization; restarts on breakdown with fresh random vectors.
pub fn estimate_spectral_bounds(s: &Splitting, iterations: usize, seed: u64) -> Result<SpectralBounds> {
    let n = s.dim();
    if n == 0 || iterations == 0 {
        return Err(Error::Estimation("empty operator or zero iterations".into()));
    }
    let steps_cap = iterations.min(n);
    let mut basis = Basis { s, v: Vec::new(), av: Vec::new() };
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut restarts = 0;

    let random_start = |attempt: u64| -> Vec<f64> {
        let mut rng = stream(seed, attempt, Purpose::Lanczos);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    };
    let mut start = random_start(0);
    basis.orthogonalize(&mut start);
    if basis.push(start, 0.0).is_none() {
        return Err(Error::Estimation("start vector has zero energy".into()));
    }

    while alpha.len() < steps_cap {
        let j = basis.v.len() - 1;
        let mut w = s.apply_p_to_residual(&basis.av[j]);
        let a_j = dot_unchecked(&w, &basis.av[j]);
        alpha.push(a_j);
        if alpha.len() == steps_cap {
            break;
        }
        basis.orthogonalize(&mut w);
        let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        match basis.push(w, scale) {
            Some(b) => beta.push(b),
            None => {
                let mut fresh = None;
                while restarts < MAX_RESTARTS && fresh.is_none() {
                    restarts += 1;
                    let mut r = random_start(restarts as u64);
                    let raw = basis.energy(&r).sqrt();
                    basis.orthogonalize(&mut r);
                    if basis.push(r, 100.0 * raw).is_some() {
                        fresh = Some(());
                    }
                }
                if fresh.is_none() {
                    break;
                }
                beta.push(0.0);
            }
        }
    }

    let (lmin, lmax) = tridiagonal_extremes(&alpha, &beta[..alpha.len() - 1]);
    if !(lmin > 0.0) || !lmax.is_finite() {
        return Err(Error::Estimation(format!("nonpositive Ritz value {lmin}")));
    }
    Ok(SpectralBounds {
        lambda_min_est: lmin,
        lambda_max_est: lmax,
        kappa_est: lmax / lmin,
        steps: alpha.len(),
        restarts,
        lower: None,
        upper: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_known_spectrum() {
        // 1D Laplacian tridiag(-1, 2, -1), eigenvalues 2 - 2 cos(k pi / (m + 1))
        let m = 10;
        let (lo, hi) = tridiagonal_extremes(&vec![2.0; m], &vec![-1.0; m - 1]);
        let pi = std::f64::consts::PI;
        assert!((lo - (2.0 - 2.0 * (pi / 11.0).cos())).abs() < 1e-12);
        assert!((hi - (2.0 - 2.0 * (10.0 * pi / 11.0).cos())).abs() < 1e-12);
    }

    #[test]
    fn decoupled_blocks() {
        let (lo, hi) = tridiagonal_extremes(&[3.0, 1.0, 5.0], &[0.0, 0.0]);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 5.0).abs() < 1e-12);
    }

    #[test]
    fn user_bounds_validation() {
        let b = SpectralBounds {
            lambda_min_est: 1.0,
            lambda_max_est: 4.0,
            kappa_est: 4.0,
            steps: 1,
            restarts: 0,
            lower: None,
            upper: None,
        };
        assert_eq!(b.kappa_bar(), 4.0);
        assert!(b.with_user_bounds(2.0, 1.0).is_err());
        assert!((b.with_user_bounds(0.9, 3.33).unwrap().kappa_bar() - 3.7).abs() < 1e-12);
    }
}
