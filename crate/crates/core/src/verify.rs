//! Bound checks against the dense oracle on small instances.

use rand::Rng;

use crate::error::Result;
use crate::faults::{build_groups, local_comm_cycle, partition_rate_bound, PartitionRates};
use crate::fem::{assemble_poisson_constant, GridSpec};
use crate::iteration::{
    accel_params, accel_step, one_step, sample_index_set, AccelState, AccelStepParams, IterationState, Relaxation,
    SamplerMode,
};
use crate::oracle::{assemble_p_dense, dense_solve, exhaustive_expectation, DenseSplitting};
use crate::rng::{stream, Purpose};
use crate::splitting::{build_splitting, estimate_spectral_bounds, Splitting, WeightSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Small instance with its dense data and load vector.
pub struct Instance {
    pub splitting: Splitting,
    pub dense: DenseSplitting,
    pub b: Vec<f64>,
}

pub fn instance(n1: usize, n0: usize, layers: usize) -> Result<Instance> {
    let p = assemble_poisson_constant(GridSpec::new(n1, n0)?, 1.0, 1.0)?;
    let splitting = build_splitting(&p, layers, &WeightSpec::default())?;
    let dense = assemble_p_dense(&splitting)?;
    Ok(Instance { splitting, dense, b: p.b })
}

fn random_vector(n: usize, seed: u64, counter: u64) -> Vec<f64> {
    let mut rng = stream(seed, counter, Purpose::Test);
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (m, (var / k).sqrt())
}

/// Lanczos estimates against the dense spectrum (1% relative).
pub fn spectrum_vs_oracle(inst: &Instance, seed: u64) -> Result<Check> {
    let est = estimate_spectral_bounds(&inst.splitting, 60, seed)?;
    let rel_min = (est.lambda_min_est - inst.dense.lambda_min).abs() / inst.dense.lambda_min;
    let rel_max = (est.lambda_max_est - inst.dense.lambda_max).abs() / inst.dense.lambda_max;
    Ok(Check {
        name: "spectrum vs dense oracle".into(),
        passed: rel_min <= 0.01 && rel_max <= 0.01,
        detail: format!(
            "lanczos [{:.6}, {:.6}] dense [{:.6}, {:.6}]",
            est.lambda_min_est, est.lambda_max_est, inst.dense.lambda_min, inst.dense.lambda_max
        ),
    })
}

/// Exhaustive expectation against the one-step bound for every `p` and three relaxations.
pub fn one_step_bound_exhaustive(inst: &Instance, seed: u64) -> Result<Check> {
    let d = &inst.dense;
    let count = d.component_count();
    let e = random_vector(d.dim(), seed, 1);
    let e0 = d.energy(&e);
    let mut worst = f64::NEG_INFINITY;
    let mut passed = true;
    for scale in [0.5, 1.0, 1.5] {
        let xi = scale / d.lambda_max;
        for p in 1..=count {
            let exact = exhaustive_expectation(d, &e, p, xi)?;
            let lx = d.lambda_max * xi;
            let bound = (1.0 - lx * (2.0 - lx) * p as f64 / (d.kappa * count as f64)) * e0;
            passed &= exact <= bound;
            worst = worst.max(exact / bound);
        }
    }
    Ok(Check {
        name: "one-step expectation bound (exhaustive)".into(),
        passed,
        detail: format!("max E/bound = {worst:.6}"),
    })
}

/// Monte-Carlo mean of the accelerated error against `2 prod(1 - p/((n+1) sqrt(kappa)))`.
pub fn accelerated_bound_monte_carlo(
    inst: &Instance,
    p: usize,
    trajectories: usize,
    steps: usize,
    seed: u64,
) -> Result<Check> {
    let s = &inst.splitting;
    let d = &inst.dense;
    let n = s.n();
    let u_star = dense_solve(&d.a, &inst.b)?;
    let u_norm = d.energy(&u_star);
    let (alpha, beta, xi, eta) = accel_params(p, n, d.lambda_max, d.lambda_min)?;
    let prm = AccelStepParams { alpha, beta, xi, eta };
    let mut sq = vec![Vec::with_capacity(trajectories); steps + 1];
    for t in 0..trajectories {
        let mut st = AccelState::new(s, &inst.b)?;
        let mut rng = stream(seed, t as u64, Purpose::Trajectory);
        for (m, bucket) in sq.iter_mut().enumerate() {
            let err: Vec<f64> = st.x_u.iter().zip(&u_star).map(|(a, b)| a - b).collect();
            bucket.push(d.energy(&err));
            if m < steps {
                let set = sample_index_set(&SamplerMode::Uniform, n, p, &mut rng)?;
                accel_step(&mut st, s, &set, prm)?;
            }
        }
    }
    let rate = 1.0 - p as f64 / ((n + 1) as f64 * d.kappa.sqrt());
    let mut passed = true;
    let mut worst = f64::NEG_INFINITY;
    for (m, bucket) in sq.iter().enumerate() {
        let (mean, se) = mean_se(bucket);
        let bound = 2.0 * rate.powi(m as i32) * u_norm;
        passed &= mean <= bound + 3.0 * se;
        worst = worst.max(mean / bound);
    }
    Ok(Check {
        name: format!("accelerated expectation bound (p = {p})"),
        passed,
        detail: format!("max mean/bound = {worst:.4} over {trajectories} trajectories"),
    })
}

/// Per-step reduction with one persistently failed node and redundancy `l`.
pub fn single_fault_reduction(
    inst: &Instance,
    l: usize,
    failed: usize,
    trajectories: usize,
    steps: usize,
    seed: u64,
) -> Result<Check> {
    let s = &inst.splitting;
    let d = &inst.dense;
    let n = s.n();
    let groups = build_groups(s, l)?;
    let g = groups.group(failed);
    let mut part: Vec<usize> = g.members.clone();
    part.push(failed);
    part.sort_unstable();
    let rest: Vec<usize> = (0..=n).filter(|i| !part.contains(i)).collect();
    let lg = g.members.len();
    let rates = PartitionRates::new(n, vec![part.clone(), rest.clone()], vec![lg, rest.len()])?;
    let (xi, factor) = partition_rate_bound(&rates, d.lambda_max, d.kappa)?;
    let u_star = dense_solve(&d.a, &inst.b)?;
    let mut down = vec![false; n + 1];
    down[failed] = true;
    let mut ratios = Vec::with_capacity(trajectories * steps);
    for t in 0..trajectories {
        let x0 = random_vector(s.dim(), seed, 1000 + t as u64);
        let mut st = IterationState::from_iterate(s, &inst.b, &x0)?;
        let mut rng = stream(seed, t as u64, Purpose::Trajectory);
        let err = |x: &[f64]| -> Vec<f64> { x.iter().zip(&u_star).map(|(a, b)| a - b).collect() };
        for _ in 0..steps {
            let before = d.energy(&err(&st.x));
            let (set, _) = local_comm_cycle(&down, &groups, None, &mut rng)?;
            one_step(&mut st, s, &set, Relaxation::Fixed(xi))?;
            ratios.push(d.energy(&err(&st.x)) / before);
        }
    }
    let (mean, se) = mean_se(&ratios);
    Ok(Check {
        name: format!("single-fault reduction (l = {l})"),
        passed: mean <= factor + 3.0 * se,
        detail: format!("mean ratio {mean:.5} (se {se:.1e}) vs factor {factor:.5}"),
    })
}

/// `r_new,i = (1 - xi omega_i) r_i` for corrected indices without corrected overlapping partners.
pub fn residual_identity(s: &Splitting, b: &[f64], cycles: usize, seed: u64) -> Result<Check> {
    let n = s.n();
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for c in 0..cycles {
        let mut rng = stream(seed, c as u64, Purpose::Test);
        let x0 = random_vector(s.dim(), seed, 5000 + c as u64);
        let mut st = IterationState::from_iterate(s, b, &x0)?;
        let p = rng.random_range(1..=(n + 1).min(4));
        let set = sample_index_set(&SamplerMode::Uniform, n, p, &mut rng)?;
        let xi = rng.random_range(0.1..1.5);
        let before: Vec<Vec<f64>> = set.iter().map(|&i| s.restrict(i, &st.r)).collect::<Result<_>>()?;
        one_step(&mut st, s, &set, Relaxation::Fixed(xi))?;
        for (k, &i) in set.iter().enumerate() {
            if set.iter().any(|&j| j != i && s.overlaps(i, j)) {
                continue;
            }
            tested += 1;
            let after = s.restrict(i, &st.r)?;
            let f = 1.0 - xi * s.weights[i];
            let diff: f64 = after.iter().zip(&before[k]).map(|(a, r)| (a - f * r).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = before[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(diff / norm);
        }
    }
    Ok(Check {
        name: "residual identity".into(),
        passed: worst <= 1e-9 && tested > 0,
        detail: format!("{tested} isolated corrections, max relative deviation {worst:.2e}"),
    })
}

/// The full suite on the standard small instances.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let small = instance(8, 2, 1)?;
    let mut checks = vec![spectrum_vs_oracle(&small, seed)?, one_step_bound_exhaustive(&small, seed)?];
    for p in [1, 3, 5] {
        checks.push(accelerated_bound_monte_carlo(&small, p, 2000, 10, seed)?);
    }
    for l in 1..=3 {
        checks.push(single_fault_reduction(&small, l, 1, 200, 10, seed)?);
    }
    let medium = assemble_poisson_constant(GridSpec::new(16, 4)?, 1.0, 1.0)?;
    let ms = build_splitting(&medium, 1, &WeightSpec::default())?;
    checks.push(residual_identity(&ms, &medium.b, 100, seed)?);
    Ok(checks)
}
