//! Fault processes and executed index sets for the simulated networks.
//!
//! In the master-slave network every index, including the coarse index `0`,
//! may be lost; in the local-communication network index `0` lives on a
//! reliable server and failed subdomain solves are mitigated through
//! redundancy groups of neighbors.

use std::fmt::Write as _;

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::iteration::{sample_index_set, CycleSet, IndexSource, SamplerMode};
use crate::rng::{stream, Purpose};
use crate::splitting::Splitting;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
            return Err(Error::Parameter(format!(
                "Weibull parameters must be positive, got k = {shape}, lambda = {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    /// `lambda * Gamma(1 + 1/k)`.
    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// `F(t) = 1 - exp(-(t / lambda)^k)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            1.0 - (-(t / self.scale).powf(self.shape)).exp()
        }
    }

    /// Inverse-CDF transform of a uniform `u` in `(0, 1]`: `lambda * (-ln u)^{1/k}`.
    pub fn transform(&self, u: f64) -> f64 {
        self.scale * (-u.ln()).powf(1.0 / self.shape)
    }
}

pub fn sample_weibull<R: Rng + ?Sized>(params: &WeibullParams, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    params.transform(u)
}

fn whole_cycles(t: f64) -> usize {
    (t.ceil() as usize).max(1)
}

/// Alternating up/down intervals of one node over `0..horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSchedule {
    pub node: usize,
    /// `(start, end, down)` half-open, tiling `0..horizon`.
    pub intervals: Vec<(usize, usize, bool)>,
}

impl NodeSchedule {
    pub fn is_down(&self, m: usize) -> bool {
        let k = self.intervals.partition_point(|iv| iv.1 <= m);
        self.intervals.get(k).is_some_and(|iv| iv.2)
    }

    /// Cycles since the current down interval began, `None` when up.
    pub fn down_age(&self, m: usize) -> Option<usize> {
        let k = self.intervals.partition_point(|iv| iv.1 <= m);
        self.intervals.get(k).filter(|iv| iv.2).map(|iv| m - iv.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedules {
    pub nodes: Vec<NodeSchedule>,
    pub horizon: usize,
    pub realized_rate: f64,
}

impl Schedules {
    pub fn down_count(&self, m: usize) -> usize {
        self.nodes.iter().filter(|s| s.is_down(m)).count()
    }
}

/// Independent alternating renewal processes for nodes `1..=n`, started near stationarity.
pub fn generate_schedules(
    n: usize,
    arrival: WeibullParams,
    repair: WeibullParams,
    horizon: usize,
    seed: u64,
) -> Result<Schedules> {
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least one cycle".into()));
    }
    let (mu_up, mu_down) = (arrival.mean(), repair.mean());
    let warmup = (10.0 * (mu_up + mu_down)).ceil() as usize;
    let p_down = mu_down / (mu_up + mu_down);
    let nodes: Vec<NodeSchedule> = (1..=n)
        .map(|node| {
            let mut rng = stream(seed, node as u64, Purpose::Schedule);
            let mut down = rng.random::<f64>() < p_down;
            let mut t = 0usize;
            let end = warmup + horizon;
            let mut intervals = Vec::new();
            while t < end {
                let len = whole_cycles(sample_weibull(if down { &repair } else { &arrival }, &mut rng));
                let (a, b) = (t.max(warmup), (t + len).min(end));
                if a < b {
                    intervals.push((a - warmup, b - warmup, down));
                }
                t += len;
                down = !down;
            }
            NodeSchedule { node, intervals }
        })
        .collect();
    let down_total: usize = nodes.iter().flat_map(|s| s.intervals.iter()).filter(|iv| iv.2).map(|iv| iv.1 - iv.0).sum();
    let realized_rate = if n == 0 { 0.0 } else { down_total as f64 / (n * horizon) as f64 };
    Ok(Schedules { nodes, horizon, realized_rate })
}

/// Uniform random subset of `{0..n}` of size `n + 1 - f`.
pub fn master_slave_cycle<R: Rng + ?Sized>(n: usize, f: usize, rng: &mut R) -> Result<Vec<usize>> {
    if f > n + 1 {
        return Err(Error::Parameter(format!("f_m = {f} exceeds n + 1 = {}", n + 1)));
    }
    if f == n + 1 {
        return Ok(Vec::new());
    }
    sample_index_set(&SamplerMode::Uniform, n, n + 1 - f, rng)
}

/// `p* = floor((1 - r_f)(n + 1))`.
pub fn constant_rate_p(n: usize, r_f: f64) -> usize {
    (((1.0 - r_f) * (n + 1) as f64) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyGroup {
    pub owner: usize,
    /// `j_1..j_l` ordered by distance.
    pub members: Vec<usize>,
    pub partner: usize,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyGroups {
    pub l: usize,
    /// Groups for owners `1..=n` (`groups[i - 1]`).
    pub groups: Vec<RedundancyGroup>,
    /// Owners whose `l` was clamped to their neighbor count.
    pub clamped: Vec<usize>,
}

impl RedundancyGroups {
    pub fn group(&self, owner: usize) -> &RedundancyGroup {
        &self.groups[owner - 1]
    }
}

/// The `l` nearest graph neighbors by coarse-cell distance, ties by ascending index.
pub fn build_groups(s: &Splitting, l: usize) -> Result<RedundancyGroups> {
    if l == 0 {
        return Err(Error::Parameter("redundancy l must be at least 1".into()));
    }
    let mut clamped = Vec::new();
    let groups = (1..=s.n())
        .map(|i| {
            let (cx, cy) = s.subdomains[i - 1].cell;
            let mut cand: Vec<(usize, usize)> = s.neighbors[i]
                .iter()
                .map(|&j| {
                    let (dx, dy) = s.subdomains[j - 1].cell;
                    (cx.abs_diff(dx).pow(2) + cy.abs_diff(dy).pow(2), j)
                })
                .collect();
            cand.sort_unstable();
            let take = l.min(cand.len());
            if take < l {
                clamped.push(i);
            }
            let members: Vec<usize> = cand[..take].iter().map(|c| c.1).collect();
            let partner = members.iter().copied().min().unwrap_or(i);
            RedundancyGroup { owner: i, members, partner, clamped: take < l }
        })
        .collect();
    Ok(RedundancyGroups { l, groups, clamped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reassignment {
    /// The draw chose the failed node itself; its solve is skipped.
    Skipped { node: usize },
    /// `by` solves the failed node's problem instead of its own.
    Substituted { node: usize, by: usize },
    /// The chosen neighbor was already taken by an earlier request.
    Conflict { node: usize, by: usize },
    /// The chosen neighbor is itself down.
    NeighborDown { node: usize, by: usize },
    /// Every group member is down (or the group is empty).
    GroupDown { node: usize },
}

/// Executed set of one local-communication cycle.
///
/// `down[i]` flags failed nodes (index `0` is never down). `alternate_age[i]`,
/// when given for an `l = 1` group, replaces the random draw by alternating
/// skip (even age) and substitute (odd age).
pub fn local_comm_cycle<R: Rng + ?Sized>(
    down: &[bool],
    groups: &RedundancyGroups,
    alternate_age: Option<&[Option<usize>]>,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<Reassignment>)> {
    let n = groups.groups.len();
    if down.len() != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: down.len() });
    }
    if down[0] {
        return Err(Error::Parameter("the coarse index cannot fail in the local network".into()));
    }
    let mut in_set: Vec<bool> = down.iter().map(|d| !d).collect();
    let mut taken = vec![false; n + 1];
    let mut log = Vec::new();
    for i in (1..=n).filter(|&i| down[i]) {
        let g = groups.group(i);
        let l = g.members.len();
        let draw = rng.random_range(0..=l);
        if l == 0 || g.members.iter().all(|&j| down[j]) {
            log.push(Reassignment::GroupDown { node: i });
            continue;
        }
        let s = match alternate_age.and_then(|a| a[i]) {
            Some(age) if l == 1 => age % 2,
            _ => draw,
        };
        if s == 0 {
            log.push(Reassignment::Skipped { node: i });
            continue;
        }
        let j = g.members[s - 1];
        if down[j] {
            log.push(Reassignment::NeighborDown { node: i, by: j });
        } else if taken[j] {
            log.push(Reassignment::Conflict { node: i, by: j });
        } else {
            taken[j] = true;
            in_set[j] = false;
            in_set[i] = true;
            log.push(Reassignment::Substituted { node: i, by: j });
        }
    }
    Ok(((0..=n).filter(|&i| in_set[i]).collect(), log))
}

/// Partition `{I^s}` of `{0..n}` with executed counts `p^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRates {
    pub parts: Vec<Vec<usize>>,
    pub executed: Vec<usize>,
}

impl PartitionRates {
    pub fn new(n: usize, parts: Vec<Vec<usize>>, executed: Vec<usize>) -> Result<Self> {
        if parts.len() != executed.len() || parts.is_empty() {
            return Err(Error::Parameter("one executed count per nonempty part required".into()));
        }
        let mut seen = vec![false; n + 1];
        for (part, &p) in parts.iter().zip(&executed) {
            if part.is_empty() {
                return Err(Error::Parameter("empty part".into()));
            }
            if p > part.len() {
                return Err(Error::Parameter(format!("p^s = {p} exceeds part size {}", part.len())));
            }
            for &i in part {
                if i > n || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Parameter(format!("index {i} out of range or repeated")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Parameter("parts do not cover 0..=n".into()));
        }
        Ok(Self { parts, executed })
    }

    fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.parts.iter().zip(&self.executed).map(|(i, &p)| p as f64 / i.len() as f64)
    }

    pub fn r_lower(&self) -> f64 {
        self.rates().fold(f64::INFINITY, f64::min)
    }

    pub fn r_upper(&self) -> f64 {
        self.rates().fold(0.0, f64::max)
    }
}

/// `(xi_opt, factor)` with `xi_opt = r_lower / (r_upper * lambda_max)` and
/// `factor = 1 - r_lower^2 / (r_upper * kappa)`.
pub fn partition_rate_bound(rates: &PartitionRates, lambda_max: f64, kappa: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (rates.r_lower(), rates.r_upper());
    if !(hi > 0.0) {
        return Err(Error::Parameter("no part executes any index".into()));
    }
    Ok((lo / (hi * lambda_max), 1.0 - lo * lo / (hi * kappa)))
}

/// `(r_lower, r_upper)` for `S - 2` separated old faults with groups of size `l + 1`
/// and `f_new` new faults among the remaining indices.
pub fn multi_fault_rates(n: usize, l: usize, parts: usize, f_new: usize) -> Result<(f64, f64)> {
    if parts < 2 {
        return Err(Error::Parameter("S must be at least 2".into()));
    }
    let used = (parts - 2) * (l + 1);
    if used >= n || f_new > n - used {
        return Err(Error::Parameter(format!("infeasible geometry: n = {n}, l = {l}, S = {parts}, f' = {f_new}")));
    }
    let rest = (n - f_new - used) as f64 / (n - used) as f64;
    let lower = if parts > 2 { rest.min(l as f64 / (l + 1) as f64) } else { rest };
    Ok((lower, 1.0))
}

/// How failures are generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultProcess {
    None,
    /// `f_m = n + 1 - floor((1 - r_f)(n + 1))` every cycle.
    ConstantRate {
        r_f: f64,
    },
    /// `f_m` uniform on `[f* - df, f* + df]`.
    UniformInterval {
        f_star: usize,
        delta_f: usize,
    },
    Weibull {
        arrival: WeibullParams,
        repair: WeibullParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkModel {
    MasterSlave,
    LocalComm,
}

/// A realized fault trace: per-cycle down-node lists (or failure counts) that
/// together with the seed determine every executed set `I_m`.
#[derive(Debug, Clone)]
pub struct FaultScenario {
    pub model: NetworkModel,
    pub n: usize,
    pub l: usize,
    pub alternate: bool,
    pub seed: u64,
    /// Failure count `f_m` per cycle.
    pub f: Vec<usize>,
    /// Down nodes per cycle (local network only).
    pub down: Vec<Vec<usize>>,
    /// Age of each down interval per cycle, aligned with `down`.
    pub ages: Vec<Vec<usize>>,
    pub target_rate: Option<f64>,
    pub realized_rate: f64,
    groups: Option<RedundancyGroups>,
    pub reassignments: Vec<Vec<Reassignment>>,
}

impl FaultScenario {
    /// Generates `cycles` cycles of faults for `s`.
    pub fn generate(
        s: &Splitting,
        model: NetworkModel,
        process: FaultProcess,
        l: usize,
        alternate: bool,
        cycles: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = s.n();
        let mut f = Vec::with_capacity(cycles);
        let mut down = vec![Vec::new(); cycles];
        let mut ages = vec![Vec::new(); cycles];
        let mut target_rate = None;
        let slots = match model {
            NetworkModel::MasterSlave => n + 1,
            NetworkModel::LocalComm => n,
        };
        match process {
            FaultProcess::None => f.resize(cycles, 0),
            FaultProcess::ConstantRate { r_f } => {
                if !(0.0..1.0).contains(&r_f) {
                    return Err(Error::Parameter(format!("r_f = {r_f} outside [0, 1)")));
                }
                target_rate = Some(r_f);
                let fm = (n + 1) - constant_rate_p(n, r_f);
                f.resize(cycles, fm);
            }
            FaultProcess::UniformInterval { f_star, delta_f } => {
                if delta_f > f_star || f_star + delta_f > slots {
                    return Err(Error::Parameter("uniform interval outside 0..=n".into()));
                }
                target_rate = Some(f_star as f64 / slots as f64);
                for m in 0..cycles {
                    let mut rng = stream(seed, m as u64, Purpose::FaultCount);
                    f.push(rng.random_range(f_star - delta_f..=f_star + delta_f));
                }
            }
            FaultProcess::Weibull { arrival, repair } => {
                let sch = generate_schedules(n, arrival, repair, cycles.max(1), seed)?;
                target_rate = Some(repair.mean() / (arrival.mean() + repair.mean()));
                for (m, (dm, am)) in down.iter_mut().zip(ages.iter_mut()).enumerate() {
                    for ns in &sch.nodes {
                        if let Some(age) = ns.down_age(m) {
                            dm.push(ns.node);
                            am.push(age);
                        }
                    }
                    f.push(dm.len());
                }
            }
        }
        if model == NetworkModel::LocalComm && !matches!(process, FaultProcess::Weibull { .. } | FaultProcess::None) {
            // explicit failure counts become uniformly chosen down nodes among 1..=n
            for m in 0..cycles {
                if f[m] > n {
                    return Err(Error::Parameter("more failures than subdomain nodes".into()));
                }
                let mut rng = stream(seed, m as u64, Purpose::FaultCount);
                let pick = sample_index_set(&SamplerMode::Uniform, n - 1, f[m].max(1), &mut rng)?;
                down[m] = if f[m] == 0 { Vec::new() } else { pick.into_iter().map(|i| i + 1).collect() };
                ages[m] = vec![0; down[m].len()];
            }
        }
        let realized_rate = f.iter().sum::<usize>() as f64 / (slots * cycles.max(1)) as f64;
        let groups = match model {
            NetworkModel::LocalComm => Some(build_groups(s, l)?),
            NetworkModel::MasterSlave => None,
        };
        Ok(Self {
            model,
            n,
            l,
            alternate,
            seed,
            f,
            down,
            ages,
            target_rate,
            realized_rate,
            groups,
            reassignments: vec![Vec::new(); cycles],
        })
    }

    pub fn cycles(&self) -> usize {
        self.f.len()
    }

    pub fn groups(&self) -> Option<&RedundancyGroups> {
        self.groups.as_ref()
    }

    /// Executed set of cycle `m` with its reassignment log.
    pub fn executed(&self, m: usize) -> Result<(Vec<usize>, Vec<Reassignment>)> {
        if m >= self.cycles() {
            return Err(Error::Parameter(format!("cycle {m} beyond trace length {}", self.cycles())));
        }
        match self.model {
            NetworkModel::MasterSlave => {
                let mut rng = stream(self.seed, m as u64, Purpose::MasterSlave);
                Ok((master_slave_cycle(self.n, self.f[m], &mut rng)?, Vec::new()))
            }
            NetworkModel::LocalComm => {
                let groups = self.groups.as_ref().expect("local network has groups");
                let mut flags = vec![false; self.n + 1];
                let mut age = vec![None; self.n + 1];
                for (&i, &a) in self.down[m].iter().zip(&self.ages[m]) {
                    flags[i] = true;
                    age[i] = Some(a);
                }
                let mut rng = stream(self.seed, m as u64, Purpose::LocalComm);
                local_comm_cycle(&flags, groups, self.alternate.then_some(&age[..]), &mut rng)
            }
        }
    }

    /// Structured text: a `key = value` header and one `m | f_m | down:age ...` line per cycle.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let model = match self.model {
            NetworkModel::MasterSlave => "master-slave",
            NetworkModel::LocalComm => "local-communication",
        };
        writeln!(out, "model = {model}").unwrap();
        writeln!(out, "n = {}", self.n).unwrap();
        writeln!(out, "l = {}", self.l).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "alternate = {}", self.alternate).unwrap();
        writeln!(out, "cycles = {}", self.cycles()).unwrap();
        writeln!(out, "realized_rate = {:.16e}", self.realized_rate).unwrap();
        for m in 0..self.cycles() {
            let list: Vec<String> = self.down[m].iter().zip(&self.ages[m]).map(|(i, a)| format!("{i}:{a}")).collect();
            writeln!(out, "{m} | {} | {}", self.f[m], list.join(" ")).unwrap();
        }
        out
    }

    /// Parses [`FaultScenario::to_text`] output; `s` supplies the neighbor graph for groups.
    pub fn from_text(text: &str, s: &Splitting) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(msg.to_string());
        let mut header = std::collections::BTreeMap::new();
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if line.contains('|') {
                rows.push(line);
            } else {
                let (k, v) = line.split_once('=').ok_or_else(|| bad(line))?;
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| bad(&format!("missing {k}")));
        let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(&format!("bad {k}"))) };
        let model = match get("model")?.as_str() {
            "master-slave" => NetworkModel::MasterSlave,
            "local-communication" => NetworkModel::LocalComm,
            other => return Err(bad(&format!("unknown model {other}"))),
        };
        let n = num("n")? as usize;
        if n != s.n() {
            return Err(Error::Dimension { expected: s.n(), got: n });
        }
        let l = num("l")? as usize;
        let alternate = get("alternate")? == "true";
        let realized_rate = get("realized_rate")?.parse().map_err(|_| bad("bad realized_rate"))?;
        let mut f = Vec::new();
        let mut down = Vec::new();
        let mut ages = Vec::new();
        for (m, row) in rows.iter().enumerate() {
            let cols: Vec<&str> = row.split('|').map(str::trim).collect();
            if cols.len() != 3 || cols[0].parse::<usize>().ok() != Some(m) {
                return Err(bad(row));
            }
            f.push(cols[1].parse().map_err(|_| bad(row))?);
            let mut dm = Vec::new();
            let mut am = Vec::new();
            for tok in cols[2].split_whitespace() {
                let (i, a) = tok.split_once(':').ok_or_else(|| bad(tok))?;
                dm.push(i.parse().map_err(|_| bad(tok))?);
                am.push(a.parse().map_err(|_| bad(tok))?);
            }
            down.push(dm);
            ages.push(am);
        }
        if rows.len() as u64 != num("cycles")? {
            return Err(bad("cycle count mismatch"));
        }
        let groups = match model {
            NetworkModel::LocalComm => Some(build_groups(s, l)?),
            NetworkModel::MasterSlave => None,
        };
        Ok(Self {
            model,
            n,
            l,
            alternate,
            seed: num("seed")?,
            reassignments: vec![Vec::new(); f.len()],
            f,
            down,
            ages,
            target_rate: None,
            realized_rate,
            groups,
        })
    }
}

impl IndexSource for FaultScenario {
    fn cycle(&mut self, m: usize) -> Result<CycleSet> {
        let (indices, log) = self.executed(m)?;
        self.reassignments[m] = log;
        let p = indices.len();
        Ok(CycleSet { indices, p, f: self.f[m] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_poisson_constant, GridSpec};
    use crate::splitting::{build_splitting, WeightSpec};

    fn grid_splitting(n1: usize, n0: usize, layers: usize) -> Splitting {
        let p = assemble_poisson_constant(GridSpec::new(n1, n0).unwrap(), 1.0, 1.0).unwrap();
        build_splitting(&p, layers, &WeightSpec::default()).unwrap()
    }

    #[test]
    fn constant_rate_p_star() {
        assert_eq!(constant_rate_p(400, 0.2), 320);
        assert_eq!(constant_rate_p(400, 0.0), 401);
    }

    #[test]
    fn master_slave_edges() {
        let mut rng = stream(0, 0, Purpose::Test);
        assert_eq!(master_slave_cycle(3, 0, &mut rng).unwrap(), vec![0, 1, 2, 3]);
        assert!(master_slave_cycle(3, 4, &mut rng).unwrap().is_empty());
        assert!(master_slave_cycle(3, 5, &mut rng).is_err());
    }

    #[test]
    fn multi_fault_examples() {
        assert_eq!(multi_fault_rates(100, 2, 2, 0).unwrap(), (1.0, 1.0));
        assert!((multi_fault_rates(100, 2, 2, 5).unwrap().0 - 0.95).abs() < 1e-15);
        assert!((multi_fault_rates(100, 2, 4, 1).unwrap().0 - 2.0 / 3.0).abs() < 1e-15);
        assert!(multi_fault_rates(5, 2, 4, 0).is_err());
    }

    #[test]
    fn partition_validation() {
        assert!(PartitionRates::new(2, vec![vec![0], vec![1]], vec![1, 1]).is_err());
        assert!(PartitionRates::new(2, vec![vec![0, 1], vec![1, 2]], vec![1, 1]).is_err());
        assert!(PartitionRates::new(2, vec![vec![0], vec![1, 2]], vec![2, 1]).is_err());
        let r = PartitionRates::new(2, vec![vec![0], vec![1, 2]], vec![1, 1]).unwrap();
        assert_eq!((r.r_lower(), r.r_upper()), (0.5, 1.0));
    }

    #[test]
    fn schedules_tile_horizon() {
        let a = WeibullParams::new(0.5, 18.0).unwrap();
        let r = WeibullParams::new(1.0, 3.0).unwrap();
        let sch = generate_schedules(20, a, r, 50, 9).unwrap();
        for ns in &sch.nodes {
            assert_eq!(ns.intervals.first().unwrap().0, 0);
            assert_eq!(ns.intervals.last().unwrap().1, 50);
            for w in ns.intervals.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn groups_interior_corner_and_single() {
        let s = grid_splitting(24, 4, 1);
        let g8 = build_groups(&s, 8).unwrap();
        assert_eq!(g8.group(6).members.len(), 8);
        assert!(g8.group(1).clamped && g8.group(1).members.len() == 3);
        let g1 = build_groups(&s, 1).unwrap();
        // nearest neighbors of subdomain 6 at distance 1 are 2, 5, 7, 10
        assert_eq!(g1.group(6).members, vec![2]);
        assert_eq!(g1.group(6).partner, 2);
    }

    #[test]
    fn local_cycle_size_is_up_plus_one() {
        let s = grid_splitting(24, 4, 1);
        let g = build_groups(&s, 3).unwrap();
        for seed in 0..50u64 {
            let mut rng = stream(seed, 0, Purpose::Test);
            let mut down = vec![false; 17];
            for i in [3, 6, 7, 12] {
                down[i] = true;
            }
            let (set, _) = local_comm_cycle(&down, &g, None, &mut rng).unwrap();
            assert_eq!(set.len(), 16 - 4 + 1);
            assert_eq!(set[0], 0);
        }
    }

    #[test]
    fn scenario_text_round_trip() {
        let s = grid_splitting(24, 4, 1);
        let proc = FaultProcess::Weibull {
            arrival: WeibullParams::new(0.5, 5.0).unwrap(),
            repair: WeibullParams::new(1.0, 3.0).unwrap(),
        };
        let sc = FaultScenario::generate(&s, NetworkModel::LocalComm, proc, 2, false, 30, 4).unwrap();
        let text = sc.to_text();
        let back = FaultScenario::from_text(&text, &s).unwrap();
        assert_eq!(back.to_text(), text);
        for m in 0..30 {
            assert_eq!(back.executed(m).unwrap(), sc.executed(m).unwrap());
        }
    }
}
