//! `teleport` command line: argument parsing, config resolution, output and
//! exit codes (0 success, 1 validation or tolerance failure, 2 I/O error).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{ConfigError, ConfigLayer, RunConfig};
use crate::oracle::OracleError;

#[derive(Debug, Parser)]
#[command(
    name = "teleport",
    version,
    about = "Atomic teleportation through position measurements in a cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bounds of both fidelities on a square grid of atom positions.
    FidelityMap {
        #[command(flatten)]
        shared: SharedArgs,
        /// Half width of the grid, in σ_x.
        #[arg(long)]
        half_width: Option<f64>,
        /// Nodes per axis.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Outcome probabilities, asymptotic and with finite overlaps.
    Table {
        #[command(flatten)]
        shared: SharedArgs,
    },
    /// Seeded Monte Carlo runs of the whole protocol.
    Sample {
        #[command(flatten)]
        shared: SharedArgs,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Certify the analytic wavepackets against grid propagation.
    Verify {
        #[command(flatten)]
        shared: SharedArgs,
        /// Comma-separated ετ values.
        #[arg(long, value_delimiter = ',')]
        tau_list: Option<Vec<f64>>,
        #[arg(long)]
        n_points: Option<usize>,
        /// Half width of the grid, in σ_x.
        #[arg(long)]
        half_width: Option<f64>,
        /// Time step as ε·dt.
        #[arg(long)]
        dt_eps: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Flat JSON config; flags override it, it overrides the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sets both ετ₁ and ετ₂.
    #[arg(long)]
    pub eps_tau: Option<f64>,
    #[arg(long)]
    pub eps_tau1: Option<f64>,
    #[arg(long)]
    pub eps_tau2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SharedArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            theta: self.theta,
            phi: self.phi,
            eps_tau1: self.eps_tau1.or(self.eps_tau),
            eps_tau2: self.eps_tau2.or(self.eps_tau),
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Tolerance(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { path, source } => CliError::Io {
                path: path.display().to_string(),
                source,
            },
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Runs one parsed command; on success returns a note for stderr, if any.
pub fn run(cli: Cli) -> Result<Option<String>, CliError> {
    match cli.command {
        Command::FidelityMap {
            shared,
            half_width,
            points,
        } => {
            let layer = ConfigLayer {
                map_half_width: half_width,
                map_points: points,
                ..shared.layer()
            };
            let cfg = RunConfig::resolve(shared.config.as_deref(), layer)?;
            write_output(shared.out.as_deref(), &commands::fidelity_map(&cfg))?;
            Ok(None)
        }
        Command::Table { shared } => {
            let cfg = RunConfig::resolve(shared.config.as_deref(), shared.layer())?;
            write_output(shared.out.as_deref(), &commands::table(&cfg))?;
            Ok(None)
        }
        Command::Sample { shared, shots } => {
            let layer = ConfigLayer {
                shots,
                ..shared.layer()
            };
            let cfg = RunConfig::resolve(shared.config.as_deref(), layer)?;
            let (text, summary) =
                commands::sample(&cfg).map_err(|e| CliError::Validation(e.to_string()))?;
            write_output(shared.out.as_deref(), &text)?;
            Ok(shared.out.is_some().then(|| summary.to_lines("")))
        }
        Command::Verify {
            shared,
            tau_list,
            n_points,
            half_width,
            dt_eps,
        } => {
            let layer = ConfigLayer {
                tau_list,
                oracle_points: n_points,
                oracle_half_width: half_width,
                oracle_dt_eps: dt_eps,
                ..shared.layer()
            };
            let cfg = RunConfig::resolve(shared.config.as_deref(), layer)?;
            let (report, violation) = commands::verify(&cfg)?;
            write_output(shared.out.as_deref(), &report.to_key_value())?;
            match violation {
                Some(v) => Err(CliError::Tolerance(format!("tolerance violated: {v}"))),
                None => Ok(Some("all tolerances met".into())),
            }
        }
    }
}

/// Parses `args`, runs, reports to stderr and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(note) => {
            if let Some(note) = note {
                eprint!("{note}");
                if !note.ends_with('\n') {
                    eprintln!();
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
