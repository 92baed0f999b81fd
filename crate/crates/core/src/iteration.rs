//! Stochastic one-step Schwarz iteration, its accelerated two-step variant,
//! index-set sampling and the lagged error indicator.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::rng::{stream, Purpose};
use crate::sparse::{dot_unchecked, DenseVector};
use crate::splitting::Splitting;

/// Steps between global residual recomputations.
pub const REFRESH_INTERVAL: usize = 50;
const NEGATIVE_ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerMode {
    Uniform,
    /// Probabilities `q_0..q_n`, positive and summing to one.
    Weighted(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PSchedule {
    Constant(usize),
    /// `p_m` per step; the last entry repeats.
    Sequence(Vec<usize>),
}

impl PSchedule {
    pub fn at(&self, m: usize) -> usize {
        match self {
            PSchedule::Constant(p) => *p,
            PSchedule::Sequence(v) => v.get(m).or(v.last()).copied().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub mode: SamplerMode,
    pub p: PSchedule,
}

/// Draws `I_m` of size `p` from `{0..n}`, returned sorted.
pub fn sample_index_set<R: Rng + ?Sized>(mode: &SamplerMode, n: usize, p: usize, rng: &mut R) -> Result<Vec<usize>> {
    if p == 0 || p > n + 1 {
        return Err(Error::Parameter(format!("p_m = {p} outside 1..={}", n + 1)));
    }
    let mut set = match mode {
        SamplerMode::Uniform => {
            let mut pool: Vec<usize> = (0..=n).collect();
            for k in 0..p {
                let j = rng.random_range(k..=n);
                pool.swap(k, j);
            }
            pool.truncate(p);
            pool
        }
        SamplerMode::Weighted(q) => {
            check_dim(n + 1, q.len())?;
            if q.iter().any(|&v| !(v > 0.0)) || (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Parameter("weights q must be positive and sum to one".into()));
            }
            let mut left: Vec<(usize, f64)> = q.iter().copied().enumerate().collect();
            let mut out = Vec::with_capacity(p);
            for _ in 0..p {
                let total: f64 = left.iter().map(|e| e.1).sum();
                let mut u = rng.random::<f64>() * total;
                let mut pick = left.len() - 1;
                for (k, e) in left.iter().enumerate() {
                    if u < e.1 {
                        pick = k;
                        break;
                    }
                    u -= e.1;
                }
                out.push(left.swap_remove(pick).0);
            }
            out
        }
    };
    set.sort_unstable();
    Ok(set)
}

/// Executed index set of one cycle with its failure count.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSet {
    pub indices: Vec<usize>,
    pub p: usize,
    pub f: usize,
}

/// Supplies `I_m` for each cycle.
pub trait IndexSource {
    fn cycle(&mut self, m: usize) -> Result<CycleSet>;
}

/// Random sampling keyed by `(seed, m)`.
#[derive(Debug, Clone)]
pub struct SampledSource {
    pub config: SamplerConfig,
    pub n: usize,
    pub seed: u64,
}

impl IndexSource for SampledSource {
    fn cycle(&mut self, m: usize) -> Result<CycleSet> {
        let p = self.config.p.at(m);
        let mut rng = stream(self.seed, m as u64, Purpose::IndexSet);
        let indices = sample_index_set(&self.config.mode, self.n, p, &mut rng)?;
        Ok(CycleSet { indices, p, f: self.n + 1 - p })
    }
}

/// The full set `{0..n}` every cycle (deterministic additive Schwarz).
#[derive(Debug, Clone)]
pub struct FullSource {
    pub n: usize,
}

impl IndexSource for FullSource {
    fn cycle(&mut self, _m: usize) -> Result<CycleSet> {
        Ok(CycleSet { indices: (0..=self.n).collect(), p: self.n + 1, f: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relaxation {
    Fixed(f64),
    SteepestDescent,
}

/// Summed correction of one cycle.
#[derive(Debug, Clone)]
pub struct Correction {
    /// `c = sum_{i in I} omega_i R_i d_i`.
    pub c: DenseVector,
    /// `A c`, accumulated from local blocks.
    pub ac: DenseVector,
    /// `(i, omega_i r_i^T d_i)` for each corrected index.
    pub energies: Vec<(usize, f64)>,
}

/// Local solves for `set` against residual `r`, summed in ascending index order.
pub fn compute_correction(s: &Splitting, r: &[f64], set: &[usize]) -> Correction {
    let locals: Vec<(usize, DenseVector, f64)> = set
        .par_iter()
        .map(|&i| {
            let (ri, d) = s.local_solve(i, r);
            let e = s.weights[i] * dot_unchecked(&ri, &d);
            (i, d, e)
        })
        .collect();
    let n = s.dim();
    let mut c = vec![0.0; n];
    let mut ac = vec![0.0; n];
    let mut energies = Vec::with_capacity(locals.len());
    for (i, d, e) in &locals {
        s.add_prolongated(*i, s.weights[*i], d, &mut c);
        s.add_operator_prolongated(*i, s.weights[*i], d, &mut ac);
        energies.push((*i, *e));
    }
    Correction { c, ac, energies }
}

/// `xi = r^T c / c^T A c`; `None` when `c^T A c` vanishes.
fn steepest_xi(r: &[f64], corr: &Correction) -> Option<f64> {
    let den = dot_unchecked(&corr.c, &corr.ac);
    (den > 0.0).then(|| dot_unchecked(r, &corr.c) / den)
}

#[derive(Debug, Clone)]
pub struct IterationState {
    pub m: usize,
    pub x: DenseVector,
    pub r: DenseVector,
    /// Last computed `omega_i r_i^T d_i` per index.
    pub e_values: Vec<f64>,
    pub epsilon: f64,
    b: DenseVector,
}

impl IterationState {
    /// Starts from `x = 0`, `r = b`.
    pub fn new(s: &Splitting, b: &[f64]) -> Result<Self> {
        check_dim(s.dim(), b.len())?;
        Ok(Self {
            m: 0,
            x: vec![0.0; b.len()],
            r: b.to_vec(),
            e_values: vec![0.0; s.index_count()],
            epsilon: 0.0,
            b: b.to_vec(),
        })
    }

    /// Starts from an arbitrary iterate.
    pub fn from_iterate(s: &Splitting, b: &[f64], x: &[f64]) -> Result<Self> {
        let mut st = Self::new(s, b)?;
        check_dim(s.dim(), x.len())?;
        st.x = x.to_vec();
        st.refresh_residual(s);
        Ok(st)
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn refresh_residual(&mut self, s: &Splitting) {
        self.r = self.b.clone();
        s.matrix().spmv_acc(-1.0, &self.x, &mut self.r);
    }

    /// Relative drift `||r - (b - A x)|| / ||b||`.
    pub fn residual_drift(&self, s: &Splitting) -> f64 {
        let mut t = self.b.clone();
        s.matrix().spmv_acc(-1.0, &self.x, &mut t);
        let diff: f64 = t.iter().zip(&self.r).map(|(a, b)| (a - b) * (a - b)).sum();
        diff.sqrt() / dot_unchecked(&self.b, &self.b).sqrt().max(f64::MIN_POSITIVE)
    }

    /// Computes every `e_i` at the current residual.
    pub fn prime(&mut self, s: &Splitting) {
        self.e_values = (0..s.index_count()).into_par_iter().map(|i| s.local_energy(i, &self.r)).collect();
    }
}

/// Outcome of a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub xi: f64,
    /// `I_m` was empty; the state is unchanged.
    pub empty: bool,
    /// Steepest descent met `a(d, d) = 0`.
    pub converged: bool,
}

/// Steepest-descent relaxation for the current state and `set`, with the convergence flag.
pub fn steepest_descent_xi(state: &IterationState, s: &Splitting, set: &[usize]) -> (f64, bool) {
    let corr = compute_correction(s, &state.r, set);
    match steepest_xi(&state.r, &corr) {
        Some(xi) => (xi, false),
        None => (0.0, true),
    }
}

/// One step of `x <- x + xi * sum_{i in I} omega_i R_i A_i^{-1} R_i^T r`.
pub fn one_step(state: &mut IterationState, s: &Splitting, set: &[usize], relaxation: Relaxation) -> Result<StepInfo> {
    if let Some(&bad) = set.iter().find(|&&i| i >= s.index_count()) {
        return Err(Error::Parameter(format!("index {bad} out of range")));
    }
    if set.is_empty() {
        state.m += 1;
        return Ok(StepInfo { xi: 0.0, empty: true, converged: false });
    }
    let corr = compute_correction(s, &state.r, set);
    for &(i, e) in &corr.energies {
        state.e_values[i] = e;
    }
    let (xi, converged) = match relaxation {
        Relaxation::Fixed(xi) => (xi, false),
        Relaxation::SteepestDescent => match steepest_xi(&state.r, &corr) {
            Some(xi) => (xi, false),
            None => (0.0, true),
        },
    };
    if xi != 0.0 {
        state.x.iter_mut().zip(&corr.c).for_each(|(x, c)| *x += xi * c);
        state.r.iter_mut().zip(&corr.ac).for_each(|(r, q)| *r -= xi * q);
    }
    state.m += 1;
    if state.m.is_multiple_of(REFRESH_INTERVAL) {
        state.refresh_residual(s);
    }
    Ok(StepInfo { xi, empty: false, converged })
}

/// `epsilon = (sum_i e_i)^{1/2}` with a fresh coarse term `e_0` and lagged local terms.
pub fn error_indicator(state: &mut IterationState, s: &Splitting) -> Result<f64> {
    state.e_values[0] = s.local_energy(0, &state.r);
    state.epsilon = indicator_from(&state.e_values)?;
    Ok(state.epsilon)
}

fn indicator_from(e: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &v) in e.iter().enumerate() {
        if v < -NEGATIVE_ENERGY_TOL {
            return Err(Error::Consistency(format!("negative local energy e_{i} = {v:e}")));
        }
        sum += v.max(0.0);
    }
    Ok(sum.sqrt())
}

/// Parameters `(alpha_m, beta_m, xi, eta)` of the accelerated iteration.
pub fn accel_params(p: usize, n: usize, upper: f64, lower: f64) -> Result<(f64, f64, f64, f64)> {
    if !(lower > 0.0 && lower <= upper) {
        return Err(Error::Parameter(format!("need 0 < lower <= upper, got {lower}, {upper}")));
    }
    if p == 0 || p > n + 1 {
        return Err(Error::Parameter(format!("p_m = {p} outside 1..={}", n + 1)));
    }
    let sk = (upper / lower).sqrt();
    let np1 = (n + 1) as f64;
    let pf = p as f64;
    let beta = 1.0 - pf / (np1 * sk);
    let alpha = pf / (pf + np1 * sk);
    Ok((alpha, beta, 1.0 / upper, 1.0 / (upper * lower).sqrt()))
}

/// How `p_m` enters the accelerated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PPolicy {
    /// The realized `|I_m|`.
    Exact,
    /// A fixed safe lower bound.
    LowerBound(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelConfig {
    pub upper: f64,
    pub lower: f64,
    /// Overrides `xi = 1/upper` when set.
    pub xi: Option<f64>,
    /// Overrides `eta = (upper * lower)^{-1/2}` when set.
    pub eta: Option<f64>,
    pub p_policy: PPolicy,
}

impl AccelConfig {
    pub fn new(upper: f64, lower: f64) -> Self {
        Self { upper, lower, xi: None, eta: None, p_policy: PPolicy::Exact }
    }
}

#[derive(Debug, Clone)]
pub struct AccelState {
    pub m: usize,
    pub x_u: DenseVector,
    pub x_v: DenseVector,
    pub r_u: DenseVector,
    pub r_v: DenseVector,
    /// Residual at the last extrapolation point `w`.
    pub r_w: DenseVector,
    pub e_values: Vec<f64>,
    pub epsilon: f64,
    b: DenseVector,
}

impl AccelState {
    pub fn new(s: &Splitting, b: &[f64]) -> Result<Self> {
        check_dim(s.dim(), b.len())?;
        let z = vec![0.0; b.len()];
        Ok(Self {
            m: 0,
            x_u: z.clone(),
            x_v: z,
            r_u: b.to_vec(),
            r_v: b.to_vec(),
            r_w: b.to_vec(),
            e_values: vec![0.0; s.index_count()],
            epsilon: 0.0,
            b: b.to_vec(),
        })
    }

    pub fn from_iterates(s: &Splitting, b: &[f64], u: &[f64], v: &[f64]) -> Result<Self> {
        let mut st = Self::new(s, b)?;
        check_dim(s.dim(), u.len())?;
        check_dim(s.dim(), v.len())?;
        st.x_u = u.to_vec();
        st.x_v = v.to_vec();
        st.refresh_residuals(s);
        st.r_w = st.r_u.clone();
        Ok(st)
    }

    pub fn refresh_residuals(&mut self, s: &Splitting) {
        for (x, r) in [(&self.x_u, &mut self.r_u), (&self.x_v, &mut self.r_v)] {
            r.copy_from_slice(&self.b);
            s.matrix().spmv_acc(-1.0, x, r);
        }
    }

    pub fn prime(&mut self, s: &Splitting) {
        self.e_values = (0..s.index_count()).into_par_iter().map(|i| s.local_energy(i, &self.r_w)).collect();
    }
}

/// Explicit parameters of one accelerated step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelStepParams {
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub eta: f64,
}

impl AccelStepParams {
    pub fn from_config(cfg: &AccelConfig, p_realized: usize, n: usize) -> Result<Self> {
        let p = match cfg.p_policy {
            PPolicy::Exact => p_realized,
            PPolicy::LowerBound(p) => p,
        };
        let (alpha, beta, xi, eta) = accel_params(p, n, cfg.upper, cfg.lower)?;
        Ok(Self { alpha, beta, xi: cfg.xi.unwrap_or(xi), eta: cfg.eta.unwrap_or(eta) })
    }
}

/// `w = alpha v + (1 - alpha) u`, `u <- w + xi c`, `v <- beta v + (1 - beta) w + eta c`.
pub fn accel_step(state: &mut AccelState, s: &Splitting, set: &[usize], prm: AccelStepParams) -> Result<StepInfo> {
    if let Some(&bad) = set.iter().find(|&&i| i >= s.index_count()) {
        return Err(Error::Parameter(format!("index {bad} out of range")));
    }
    let AccelStepParams { alpha, beta, xi, eta } = prm;
    let mix =
        |v: &[f64], u: &[f64]| -> DenseVector { v.iter().zip(u).map(|(v, u)| alpha * v + (1.0 - alpha) * u).collect() };
    let x_w = mix(&state.x_v, &state.x_u);
    state.r_w = mix(&state.r_v, &state.r_u);
    if set.is_empty() {
        state.x_v = state.x_v.iter().zip(&x_w).map(|(v, w)| beta * v + (1.0 - beta) * w).collect();
        state.r_v = state.r_v.iter().zip(&state.r_w).map(|(v, w)| beta * v + (1.0 - beta) * w).collect();
        state.x_u = x_w;
        state.r_u = state.r_w.clone();
        state.m += 1;
        return Ok(StepInfo { xi, empty: true, converged: false });
    }
    let corr = compute_correction(s, &state.r_w, set);
    for &(i, e) in &corr.energies {
        state.e_values[i] = e;
    }
    for (k, &w) in x_w.iter().enumerate() {
        let (rw, c, q) = (state.r_w[k], corr.c[k], corr.ac[k]);
        state.x_u[k] = w + xi * c;
        state.r_u[k] = rw - xi * q;
        state.x_v[k] = beta * state.x_v[k] + (1.0 - beta) * w + eta * c;
        state.r_v[k] = beta * state.r_v[k] + (1.0 - beta) * rw - eta * q;
    }
    state.m += 1;
    if state.m.is_multiple_of(REFRESH_INTERVAL) {
        state.refresh_residuals(s);
    }
    Ok(StepInfo { xi, empty: false, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    OneStep(Relaxation),
    Accelerated(AccelConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    /// Stop when `epsilon / epsilon_init <= tolerance`.
    pub tolerance: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum StopReason {
    Converged,
    MaxSteps,
    ZeroResidual,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxSteps => "max-steps",
            StopReason::ZeroResidual => "zero-residual",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub m: usize,
    pub p: usize,
    pub f: usize,
    pub xi: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<StepRecord>,
    pub reason: StopReason,
    /// Steps performed before the stopping test succeeded.
    pub iterations: usize,
    pub empty_cycles: usize,
    pub seed: u64,
    pub config_echo: String,
    pub solution: DenseVector,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        matches!(self.reason, StopReason::Converged | StopReason::ZeroResidual)
    }

    /// CSV with a provenance comment line, header `m,p_m,f_m,xi_m,epsilon`, LF endings.
    pub fn write_csv<W: Write>(&self, mut out: W, config_hash: &str) -> Result<()> {
        writeln!(out, "# config_hash={config_hash} seed={} reason={}", self.seed, self.reason)?;
        writeln!(out, "m,p_m,f_m,xi_m,epsilon")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{:.16e},{:.16e}", r.m, r.p, r.f, r.xi, r.epsilon)?;
        }
        Ok(())
    }

    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, config_hash).expect("write to memory");
        String::from_utf8(buf).expect("ascii csv")
    }
}

/// Runs from `x = 0` until the relative indicator reduction reaches the tolerance.
pub fn run(
    s: &Splitting,
    b: &[f64],
    source: &mut dyn IndexSource,
    method: Method,
    termination: Termination,
    seed: u64,
) -> Result<RunReport> {
    let mut records = Vec::new();
    let mut empty_cycles = 0;
    let n = s.n();
    let mut one = None;
    let mut acc = None;
    match method {
        Method::OneStep(_) => {
            let mut st = IterationState::new(s, b)?;
            st.prime(s);
            one = Some(st);
        }
        Method::Accelerated(_) => {
            let mut st = AccelState::new(s, b)?;
            st.prime(s);
            acc = Some(st);
        }
    }
    let mut eps_init = None;
    let mut reason = StopReason::MaxSteps;
    let mut iterations = termination.max_steps;
    for m in 0..=termination.max_steps {
        let eps = match (&mut one, &mut acc) {
            (Some(st), _) => error_indicator(st, s)?,
            (_, Some(st)) => {
                st.e_values[0] = s.local_energy(0, &st.r_w);
                st.epsilon = indicator_from(&st.e_values)?;
                st.epsilon
            }
            _ => unreachable!(),
        };
        let init = *eps_init.get_or_insert(eps);
        if init == 0.0 {
            records.push(StepRecord { m, p: 0, f: 0, xi: 0.0, epsilon: 0.0 });
            reason = StopReason::ZeroResidual;
            iterations = m;
            break;
        }
        if eps <= termination.tolerance * init {
            records.push(StepRecord { m, p: 0, f: 0, xi: 0.0, epsilon: eps });
            reason = StopReason::Converged;
            iterations = m;
            break;
        }
        if m == termination.max_steps {
            records.push(StepRecord { m, p: 0, f: 0, xi: 0.0, epsilon: eps });
            break;
        }
        let cs = source.cycle(m)?;
        let info = match (&mut one, &mut acc, method) {
            (Some(st), _, Method::OneStep(rel)) => one_step(st, s, &cs.indices, rel)?,
            (_, Some(st), Method::Accelerated(cfg)) => {
                let prm = AccelStepParams::from_config(&cfg, cs.indices.len().max(1), n)?;
                accel_step(st, s, &cs.indices, prm)?
            }
            _ => unreachable!(),
        };
        if info.empty {
            empty_cycles += 1;
        }
        records.push(StepRecord { m, p: cs.p, f: cs.f, xi: info.xi, epsilon: eps });
        if info.converged {
            reason = StopReason::Converged;
            iterations = m + 1;
            break;
        }
    }
    let solution = match (one, acc) {
        (Some(st), _) => st.x,
        (_, Some(st)) => st.x_u,
        _ => unreachable!(),
    };
    Ok(RunReport { records, reason, iterations, empty_cycles, seed, config_echo: String::new(), solution })
}
