//! Configuration-driven experiments: single runs and the fault tables.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::faults::{FaultProcess, FaultScenario, NetworkModel, WeibullParams};
use crate::fem::{assemble_poisson_constant, FemProblem, GridSpec};
use crate::iteration::{
    run, AccelConfig, FullSource, IndexSource, Method, PPolicy, PSchedule, Relaxation, RunReport, SampledSource,
    SamplerConfig, SamplerMode, Termination,
};
use crate::splitting::{build_splitting, estimate_spectral_bounds, SpectralBounds, Splitting, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n0: usize,
    pub n1: usize,
    pub layers: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n0: 20, n1: 400, layers: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Constant diffusion coefficient `a`.
    pub coefficient: f64,
    /// Constant right-hand side `f`.
    pub rhs: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self { coefficient: 1.0, rhs: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    OneStep,
    Accelerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    /// Fixed relaxation; steepest descent when absent.
    pub xi: Option<f64>,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self { kind: MethodKind::OneStep, xi: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccelSection {
    pub upper: f64,
    pub lower: f64,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    /// Safe lower bound for `p_m`; the realized count when absent.
    pub p_lower: Option<usize>,
}

impl Default for AccelSection {
    fn default() -> Self {
        Self { upper: 3.33, lower: 0.9, xi: None, eta: None, p_lower: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    None,
    MasterSlave,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    None,
    Constant,
    Uniform,
    Weibull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultSection {
    pub network: NetworkKind,
    pub process: ProcessKind,
    pub r_f: f64,
    pub f_star: usize,
    pub delta_f: usize,
    pub k1: f64,
    pub lambda1: f64,
    pub k2: f64,
    pub lambda2: f64,
    /// Redundancy group size.
    pub l: usize,
    pub alternate: bool,
    /// Uniform sampling with constant `p` when no network is simulated.
    pub p: Option<usize>,
}

impl Default for FaultSection {
    fn default() -> Self {
        Self {
            network: NetworkKind::None,
            process: ProcessKind::None,
            r_f: 0.0,
            f_star: 0,
            delta_f: 0,
            k1: 0.5,
            lambda1: 18.0,
            k2: 1.0,
            lambda2: 3.0,
            l: 1,
            alternate: false,
            p: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerminationSection {
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for TerminationSection {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_steps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub iterations: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { iterations: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub weights: WeightSpec,
    pub problem: ProblemConfig,
    pub method: MethodConfig,
    pub accel: AccelSection,
    pub faults: FaultSection,
    pub termination: TerminationSection,
    pub spectrum: SpectrumSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        GridSpec::new(self.grid.n1, self.grid.n0)?;
        if self.grid.layers == 0 || self.grid.layers >= self.grid.n1 / self.grid.n0 {
            return Err(Error::Overlap { layers: self.grid.layers, k: self.grid.n1 / self.grid.n0 });
        }
        if !(self.termination.tolerance > 0.0) {
            return Err(Error::Parameter("termination tolerance must be positive".into()));
        }
        if !(self.problem.coefficient > 0.0) {
            return Err(Error::Ellipticity { value: self.problem.coefficient, x: 0.0, y: 0.0 });
        }
        Ok(())
    }

    /// Hex SHA-256 prefix of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n1, self.grid.n0)
    }

    fn method(&self) -> Method {
        match self.method.kind {
            MethodKind::OneStep => {
                Method::OneStep(self.method.xi.map_or(Relaxation::SteepestDescent, Relaxation::Fixed))
            }
            MethodKind::Accelerated => Method::Accelerated(AccelConfig {
                upper: self.accel.upper,
                lower: self.accel.lower,
                xi: self.accel.xi,
                eta: self.accel.eta,
                p_policy: self.accel.p_lower.map_or(PPolicy::Exact, PPolicy::LowerBound),
            }),
        }
    }

    fn process(&self) -> Result<FaultProcess> {
        let f = &self.faults;
        Ok(match f.process {
            ProcessKind::None => FaultProcess::None,
            ProcessKind::Constant => FaultProcess::ConstantRate { r_f: f.r_f },
            ProcessKind::Uniform => FaultProcess::UniformInterval { f_star: f.f_star, delta_f: f.delta_f },
            ProcessKind::Weibull => FaultProcess::Weibull {
                arrival: WeibullParams::new(f.k1, f.lambda1)?,
                repair: WeibullParams::new(f.k2, f.lambda2)?,
            },
        })
    }
}

/// Assembled problem and splitting for a configuration.
pub struct Prepared {
    pub problem: FemProblem,
    pub splitting: Splitting,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let problem = assemble_poisson_constant(cfg.grid_spec()?, cfg.problem.coefficient, cfg.problem.rhs)?;
    let splitting = build_splitting(&problem, cfg.grid.layers, &cfg.weights)?;
    Ok(Prepared { problem, splitting })
}

/// The fault scenario a configuration implies, if any.
pub fn scenario(prep: &Prepared, cfg: &ExperimentConfig, seed: u64) -> Result<Option<FaultScenario>> {
    let model = match cfg.faults.network {
        NetworkKind::None => return Ok(None),
        NetworkKind::MasterSlave => NetworkModel::MasterSlave,
        NetworkKind::Local => NetworkModel::LocalComm,
    };
    FaultScenario::generate(
        &prep.splitting,
        model,
        cfg.process()?,
        cfg.faults.l,
        cfg.faults.alternate,
        cfg.termination.max_steps + 1,
        seed,
    )
    .map(Some)
}

/// Runs one experiment; `rhs_override` replaces the load vector.
pub fn run_with(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    seed: u64,
    trace: Option<FaultScenario>,
    rhs_override: Option<&[f64]>,
) -> Result<RunReport> {
    let s = &prep.splitting;
    let b = rhs_override.unwrap_or(&prep.problem.b);
    let mut source: Box<dyn IndexSource> = match (trace, cfg.faults.p) {
        (Some(sc), _) => Box::new(sc),
        (None, Some(p)) => Box::new(SampledSource {
            config: SamplerConfig { mode: SamplerMode::Uniform, p: PSchedule::Constant(p) },
            n: s.n(),
            seed,
        }),
        (None, None) => Box::new(FullSource { n: s.n() }),
    };
    let term = Termination { tolerance: cfg.termination.tolerance, max_steps: cfg.termination.max_steps };
    let mut rep = run(s, b, source.as_mut(), cfg.method(), term, seed)?;
    rep.config_echo = cfg.to_toml();
    Ok(rep)
}

pub fn run_config(prep: &Prepared, cfg: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    let trace = scenario(prep, cfg, seed)?;
    run_with(prep, cfg, seed, trace, None)
}

pub fn spectrum(prep: &Prepared, cfg: &ExperimentConfig) -> Result<SpectralBounds> {
    estimate_spectral_bounds(&prep.splitting, cfg.spectrum.iterations, cfg.seed)
}

/// One table cell: iteration counts over the repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub counts: Vec<usize>,
    pub converged: Vec<bool>,
    pub realized_rates: Vec<f64>,
}

impl Cell {
    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<usize>() as f64 / self.counts.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let k = self.counts.len();
        if k < 2 {
            return 0.0;
        }
        (self.counts.iter().map(|&c| (c as f64 - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    }

    fn render(&self, cap: usize) -> String {
        if self.counts.len() == 1 {
            if self.converged[0] {
                self.counts[0].to_string()
            } else {
                format!(">{cap}")
            }
        } else {
            format!("{:.2}+-{:.2}", self.mean(), self.sd())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub row_label: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
    pub cap: usize,
    pub seeds: Vec<u64>,
}

impl Table {
    /// CSV: provenance comment, header, one row per method or scenario.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let mut out = format!("# config_hash={config_hash} seed={}\n", seeds.join(";"));
        out.push_str(&self.row_label);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(label);
            for c in cells {
                out.push(',');
                out.push_str(&c.render(self.cap));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let w0 = self.rows.iter().map(|r| r.0.len()).chain([self.row_label.len()]).max().unwrap_or(0) + 2;
        let mut out = format!("{}\n{:<w0$}", self.title, self.row_label);
        for c in &self.columns {
            out.push_str(&format!("{c:>14}"));
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            out.push_str(&format!("{label:<w0$}"));
            for c in cells {
                out.push_str(&format!("{:>14}", c.render(self.cap)));
            }
            out.push('\n');
        }
        out
    }
}

pub const TABLE1_RATES: [f64; 6] = [0.0, 0.04, 0.08, 0.12, 0.16, 0.2];
pub const TABLE2_SCENARIOS: [(f64, f64); 4] = [(18.0, 3.0), (38.0, 7.0), (70.0, 1.0), (600.0, 20.0)];

fn seeds(seed: u64, repeats: usize) -> Vec<u64> {
    (0..repeats.max(1) as u64).map(|k| seed.wrapping_add(k)).collect()
}

fn cell<F: FnMut(u64) -> Result<(RunReport, f64)>>(seeds: &[u64], mut f: F) -> Result<Cell> {
    let mut c = Cell { counts: Vec::new(), converged: Vec::new(), realized_rates: Vec::new() };
    for &sd in seeds {
        let (rep, rate) = f(sd)?;
        c.counts.push(rep.iterations);
        c.converged.push(rep.converged());
        c.realized_rates.push(rate);
    }
    Ok(c)
}

/// Iteration counts for three methods under constant-rate master-slave faults.
pub fn table1(prep: &Prepared, base: &ExperimentConfig, seed: u64, repeats: usize) -> Result<Table> {
    let seeds = seeds(seed, repeats);
    let methods: [(&str, MethodKind, Option<f64>); 3] = [
        ("one-step steepest descent", MethodKind::OneStep, None),
        ("one-step xi=0.4", MethodKind::OneStep, Some(0.4)),
        ("accelerated xi=0.3 eta=0.577", MethodKind::Accelerated, None),
    ];
    let mut rows = Vec::new();
    for (label, kind, xi) in methods {
        let mut cells = Vec::new();
        for &r_f in &TABLE1_RATES {
            let mut cfg = base.clone();
            cfg.method = MethodConfig { kind, xi };
            cfg.faults.network = NetworkKind::MasterSlave;
            cfg.faults.process = ProcessKind::Constant;
            cfg.faults.r_f = r_f;
            cells.push(cell(&seeds, |sd| {
                let rep = run_config(prep, &cfg, sd)?;
                Ok((rep, r_f))
            })?);
        }
        rows.push((label.to_string(), cells));
    }
    Ok(Table {
        title: format!("Iteration counts to relative indicator reduction {:e}", base.termination.tolerance),
        row_label: "method".into(),
        columns: TABLE1_RATES.iter().map(|r| format!("r_f={r}")).collect(),
        rows,
        cap: base.termination.max_steps,
        seeds,
    })
}

/// Iteration counts against redundancy `l` for Weibull faults on the local network.
pub fn table2(prep: &Prepared, base: &ExperimentConfig, seed: u64, repeats: usize) -> Result<Table> {
    let seeds = seeds(seed, repeats);
    let mut rows = Vec::new();
    let mut cfg0 = base.clone();
    cfg0.method = MethodConfig { kind: MethodKind::OneStep, xi: None };
    cfg0.faults = FaultSection::default();
    let baseline = cell(&seeds, |sd| Ok((run_config(prep, &cfg0, sd)?, 0.0)))?;
    rows.push(("no faults".to_string(), vec![baseline; 8]));
    for (l1, l2) in TABLE2_SCENARIOS {
        let mut cells = Vec::new();
        for l in 1..=8 {
            let mut cfg = cfg0.clone();
            cfg.faults.network = NetworkKind::Local;
            cfg.faults.process = ProcessKind::Weibull;
            cfg.faults.k1 = 0.5;
            cfg.faults.k2 = 1.0;
            cfg.faults.lambda1 = l1;
            cfg.faults.lambda2 = l2;
            cfg.faults.l = l;
            cells.push(cell(&seeds, |sd| {
                let sc = scenario(prep, &cfg, sd)?.expect("local network scenario");
                let rate = sc.realized_rate;
                Ok((run_with(prep, &cfg, sd, Some(sc), None)?, rate))
            })?);
        }
        rows.push((format!("lambda1={l1} lambda2={l2}"), cells));
    }
    Ok(Table {
        title: format!("Iteration counts to relative indicator reduction {:e}", base.termination.tolerance),
        row_label: "scenario".into(),
        columns: (1..=8).map(|l| format!("l={l}")).collect(),
        rows,
        cap: base.termination.max_steps,
        seeds,
    })
}

/// Defaults of the redundancy experiment: tolerance `1e-8`, cap 100.
pub fn table2_defaults(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.termination.tolerance = 1e-8;
    cfg.termination.max_steps = 100;
    cfg
}
