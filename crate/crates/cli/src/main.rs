use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flowmech::experiments::{
    metrics, plot_svg, sweep_probability, sweep_users, verify, write_csv, write_json,
    write_metrics_csv, ExperimentConfig, Outcome, SweepKind,
};
use flowmech::flow::bne_solve;
use flowmech::mechanism::{algorithm_converge, apriori_solve, max_efficiency_mechanism};
use flowmech::Error;

#[derive(Parser)]
#[command(name = "flowmech", version, about = "Coordination mechanisms for flow-control games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// SVG line chart of the sweep.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Manager utility of each scheme as the number of users varies.
    SweepN,
    /// Manager utility as the probability of the lowest type varies.
    SweepProb,
    /// Per-type throughput and delay for each scheme.
    Metrics,
    /// Run the property suite; exit 1 on any failed invariant.
    Verify,
    /// Bayesian equilibrium rates and first-order residuals.
    SolveBne,
    /// Emit a direct mechanism as JSON.
    DesignRule {
        #[arg(long, value_enum, default_value_t = MechanismKind::InterventionComplete)]
        scheme: MechanismKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismKind {
    InterventionComplete,
    Algorithm,
    Apriori,
}

enum Failure {
    Config(String),
    Runtime(String),
    Invariant,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.plot.is_some() {
        cfg.plot = cli.plot.clone();
    }
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, bytes: &[u8]) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let mut buf = Vec::new();
    match &cli.command {
        Command::SweepN | Command::SweepProb => {
            let (rows, kind) = match cli.command {
                Command::SweepN => (sweep_users(&cfg)?, SweepKind::Users),
                _ => (sweep_probability(&cfg)?, SweepKind::Probability),
            };
            match cli.format {
                Format::Csv => write_csv(&rows, kind, &mut buf)?,
                Format::Json => write_json(&rows, &mut buf)?,
            }
            if let Some(path) = &cfg.plot {
                fs::write(path, plot_svg(&rows, kind))?;
            }
        }
        Command::Metrics => {
            let rows = metrics(&cfg)?;
            match cli.format {
                Format::Csv => write_metrics_csv(&rows, &mut buf)?,
                Format::Json => write_json(&rows, &mut buf)?,
            }
        }
        Command::Verify => {
            let checks = verify(&cfg)?;
            for c in &checks {
                let tag = match c.outcome {
                    Outcome::Pass => "PASS",
                    Outcome::Fail => "FAIL",
                    Outcome::Info => "INFO",
                };
                writeln!(buf, "{tag} {}: {}", c.name, c.detail)?;
            }
            emit(&cfg, &buf)?;
            if checks.iter().any(|c| c.outcome == Outcome::Fail) {
                return Err(Failure::Invariant);
            }
            return Ok(());
        }
        Command::SolveBne => {
            let sc = cfg.scenario(cfg.n)?;
            let sol = bne_solve(&sc)?;
            match cli.format {
                Format::Csv => {
                    writeln!(buf, "type,rate,foc_residual")?;
                    for (k, t) in sc.types().values().iter().enumerate() {
                        writeln!(buf, "{t},{},{}", sol.rates[k], sol.foc_residuals[k])?;
                    }
                }
                Format::Json => {
                    let doc = serde_json::json!({
                        "n": cfg.n,
                        "types": sc.types().values(),
                        "rates": sol.rates,
                        "foc_residuals": sol.foc_residuals,
                        "condition": sol.condition,
                    });
                    writeln!(buf, "{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?)?;
                }
            }
        }
        Command::DesignRule { scheme } => {
            let sc = cfg.scenario(cfg.n)?;
            let mech = match scheme {
                MechanismKind::InterventionComplete => max_efficiency_mechanism(&sc, cfg.budget())?,
                MechanismKind::Algorithm => {
                    algorithm_converge(&sc, cfg.epsilon(), cfg.variant, cfg.budget())?.0
                }
                MechanismKind::Apriori => apriori_solve(&sc, cfg.budget(), cfg.grid_points)?.0,
            };
            writeln!(buf, "{}", mech.to_json()?)?;
        }
    }
    emit(&cfg, &buf)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: malformed config: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant) => {
            eprintln!("error: invariant check failed");
            ExitCode::from(1)
        }
    }
}
