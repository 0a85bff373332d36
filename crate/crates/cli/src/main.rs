//! Command-line front end for the experiment harness.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 configuration
//! error, 3 numerical or i/o failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roughhawkes::harness::{self, ExperimentConfig, ExperimentKind, RunError};

#[derive(Parser, Debug)]
#[command(name = "roughhawkes", version, about = "Nearly unstable Hawkes processes and their rough Volterra limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment named in a configuration file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Resolvent and Laplace checks of a kernel.
    ResolventCheck(Named),
    /// Hawkes simulation against deterministic moments.
    HawkesSim(Named),
    /// Rescaled Hawkes convergence to the Volterra limit.
    ScalingConvergence(Named),
    /// Volterra limit simulation and scheme comparison.
    LimitSim(Named),
    /// Fake-stationary noise profile and its validation.
    FakeStationary(Named),
    /// Hölder exponent of simulated limit paths.
    Holder(Named),
    /// Print the default configuration of an experiment as TOML.
    /// Sections of other experiments are omitted; they keep their defaults.
    Defaults {
        #[arg(value_parser = parse_kind)]
        experiment: ExperimentKind,
    },
}

#[derive(Args, Debug)]
struct Named {
    /// Optional configuration; its `experiment` key must match the subcommand.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "ROUGHHAWKES_THREADS")]
    threads: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.paths {
            cfg.n_paths = Some(p);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
    }
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::ALL
        .into_iter()
        .find(|k| k.name() == s || k.name().replace('_', "-") == s)
        .ok_or_else(|| format!("unknown experiment {s}"))
}

fn load(kind: Option<ExperimentKind>, config: Option<&PathBuf>, o: &Overrides) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(kind.expect("subcommand names a kind")),
    };
    if let Some(k) = kind {
        if cfg.experiment != k {
            return Err(harness::ConfigError {
                field: "experiment".into(),
                message: format!("file selects {}, subcommand selects {}", cfg.experiment.name(), k.name()),
            }
            .into());
        }
    }
    o.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<i32, RunError> {
    let cfg = match cmd {
        Command::Defaults { experiment } => {
            let cfg = ExperimentConfig::new(experiment);
            let mut table = toml::Table::try_from(&cfg).map_err(|e| RunError::Numeric(e.to_string()))?;
            table.retain(|k, _| k == "experiment" || k == "seed" || k == experiment.name());
            let text = toml::to_string_pretty(&table).map_err(|e| RunError::Numeric(e.to_string()))?;
            print!("{text}");
            return Ok(harness::EXIT_OK);
        }
        Command::Run { config, overrides } => load(None, Some(&config), &overrides)?,
        Command::ResolventCheck(n) => load(Some(ExperimentKind::ResolventCheck), n.config.as_ref(), &n.overrides)?,
        Command::HawkesSim(n) => load(Some(ExperimentKind::HawkesSim), n.config.as_ref(), &n.overrides)?,
        Command::ScalingConvergence(n) => load(Some(ExperimentKind::ScalingConvergence), n.config.as_ref(), &n.overrides)?,
        Command::LimitSim(n) => load(Some(ExperimentKind::LimitSim), n.config.as_ref(), &n.overrides)?,
        Command::FakeStationary(n) => load(Some(ExperimentKind::FakeStationary), n.config.as_ref(), &n.overrides)?,
        Command::Holder(n) => load(Some(ExperimentKind::Holder), n.config.as_ref(), &n.overrides)?,
    };
    let outcome = harness::run(&cfg)?;
    for c in &outcome.report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} value={} threshold={}", c.name, c.value, c.threshold);
    }
    println!("manifest {}", outcome.manifest_path.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
