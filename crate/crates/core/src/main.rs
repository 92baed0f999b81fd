use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use schwarz_lab::cost::{comparison_table, CostConstants};
use schwarz_lab::experiment::{self, ExperimentConfig};
use schwarz_lab::verify;
use schwarz_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "schwarz-lab", version, about = "Randomized Schwarz solver laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Independent repetitions per table cell (mean and sd when above one).
    #[arg(long, global = true, default_value_t = 1)]
    repeats: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the spectral bounds of the splitting.
    Spectrum,
    /// Execute a single run and write its CSV trace.
    Run {
        /// Solve with a zero right-hand side.
        #[arg(long)]
        zero_rhs: bool,
        /// Replay a saved fault trace instead of generating one.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Iteration counts under constant-rate master-slave faults.
    Table1,
    /// Iteration counts against redundancy for Weibull faults.
    Table2,
    /// Per-cycle cost of the three network architectures.
    Cost {
        /// Constants file (TOML); defaults when absent.
        constants: Option<PathBuf>,
    },
    /// Run the dense oracle bound checks on a small instance.
    Verify,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_toml(&fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Spectrum => {
            let cfg = load_config(cli)?;
            let prep = experiment::prepare(&cfg)?;
            let b = experiment::spectrum(&prep, &cfg)?;
            let mut text = prep.splitting.summary().to_text();
            text.push_str(&toml::to_string(&b).map_err(|e| Error::Io(e.to_string()))?);
            print!("{text}");
            let path = write(&cli.out, "spectrum.toml", &text)?;
            eprintln!("wrote {}", path.display());
            Ok(true)
        }
        Command::Run { zero_rhs, trace } => {
            let cfg = load_config(cli)?;
            let prep = experiment::prepare(&cfg)?;
            let zeros = vec![0.0; prep.splitting.dim()];
            let sc = match trace {
                Some(p) => {
                    Some(schwarz_lab::faults::FaultScenario::from_text(&fs::read_to_string(p)?, &prep.splitting)?)
                }
                None => experiment::scenario(&prep, &cfg, cfg.seed)?,
            };
            if let Some(sc) = &sc {
                write(&cli.out, "trace.txt", &sc.to_text())?;
            }
            let rep = experiment::run_with(&prep, &cfg, cfg.seed, sc, zero_rhs.then_some(&zeros[..]))?;
            let path = write(&cli.out, "run.csv", &rep.to_csv(&cfg.hash()))?;
            println!("{} after {} iterations ({})", rep.reason, rep.iterations, path.display());
            Ok(rep.converged())
        }
        Command::Table1 => {
            let cfg = load_config(cli)?;
            let prep = experiment::prepare(&cfg)?;
            let t = experiment::table1(&prep, &cfg, cfg.seed, cli.repeats)?;
            print!("{}", t.to_text());
            write(&cli.out, "table1.csv", &t.to_csv(&cfg.hash()))?;
            Ok(true)
        }
        Command::Table2 => {
            let cfg = experiment::table2_defaults(load_config(cli)?);
            let prep = experiment::prepare(&cfg)?;
            let t = experiment::table2(&prep, &cfg, cfg.seed, cli.repeats)?;
            print!("{}", t.to_text());
            write(&cli.out, "table2.csv", &t.to_csv(&cfg.hash()))?;
            Ok(true)
        }
        Command::Cost { constants } => {
            let c: CostConstants = match constants {
                Some(p) => toml::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Parse(e.to_string()))?,
                None => CostConstants::default(),
            };
            print!("{}", comparison_table(&c)?);
            Ok(true)
        }
        Command::Verify => {
            let cfg = load_config(cli)?;
            let checks = verify::run_all(cfg.seed)?;
            let mut ok = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
