use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hexwall_sim::config::{config_to_string, default_config, load_config, RobotConfig};
use hexwall_sim::scenario::{bundled, bundled_names, resolve_scenario};
use hexwall_sim::{export_mapping_tables, log, run_scenario, SimError};

#[derive(Parser)]
#[command(name = "hexwall", version, about = "Kinematic simulator for a hexapod curtain-wall installation robot")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled scenario (by name) or a scenario file.
    Run {
        scenario: String,
        /// Robot config; the built-in desk-scale robot when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Export extension-versus-angle tables for every joint.
    Tables {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "tables")]
        out: PathBuf,
    },
    /// Check a robot config against all invariants.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List bundled scenarios.
    ListScenarios,
    /// Print the built-in robot config.
    DefaultConfig,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

enum Failure {
    Validation(String),
    Infeasible(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn config_from(path: &Option<PathBuf>) -> Result<RobotConfig, Failure> {
    match path {
        Some(p) => load_config(p).map_err(|e| Failure::Validation(e.to_string())),
        None => Ok(default_config()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, config, out } => {
            let config = config_from(&config)?;
            let scenario = resolve_scenario(&scenario).map_err(|e| Failure::Validation(e.to_string()))?;
            let output = run_scenario(&config, &scenario).map_err(|e: SimError| {
                if e.is_validation() {
                    Failure::Validation(e.to_string())
                } else {
                    Failure::Infeasible(e.to_string())
                }
            })?;
            fs::create_dir_all(&out).map_err(anyhow::Error::from)?;
            let log_path = out.join(format!("{}.csv", scenario.name));
            fs::write(&log_path, log::to_csv_bytes(&output.rows)).map_err(anyhow::Error::from)?;
            let metrics_path = out.join(format!("{}.metrics.json", scenario.name));
            let json = serde_json::to_string_pretty(&output.metrics).map_err(anyhow::Error::from)?;
            fs::write(&metrics_path, json + "\n").map_err(anyhow::Error::from)?;
            println!("{} rows -> {}", output.rows.len(), log_path.display());
            println!("metrics -> {}", metrics_path.display());
        }
        Command::Tables { config, out } => {
            let config = config_from(&config)?;
            for path in export_mapping_tables(&config, &out).map_err(anyhow::Error::from)? {
                println!("{}", path.display());
            }
        }
        Command::Validate { config } => {
            let config = load_config(&config).map_err(|e| Failure::Validation(e.to_string()))?;
            if let Some(w) = config.fold_arm_envelope_warning() {
                eprintln!("warning: {w}");
            }
            println!("ok");
        }
        Command::ListScenarios => {
            for name in bundled_names() {
                let s = bundled(name).map_err(anyhow::Error::from)?;
                println!("{name:<20} {}", s.description);
            }
        }
        Command::DefaultConfig => {
            print!("{}", config_to_string(&default_config()).map_err(anyhow::Error::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
