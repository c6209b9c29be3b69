//! Experiment harness for the wave-equation DG solvers: convergence
//! studies, spectral-radius scans, local-time-stepping eigenvalue audits,
//! and time-domain evolution, each driven by a flat key=value config file
//! and writing CSV to stdout.
//!
//! Exit codes: 0 on success, 1 on a configuration problem (bad file,
//! unknown or malformed keys, invalid parameter combinations), 2 on a
//! numerical failure (eigensolver breakdown, non-finite state during
//! evolution). `WAVEDG_THREADS` caps the internal thread pool.

mod config;
mod converge;
mod evolve;
mod ltsaudit;
mod problem;
mod spectrum;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::Config;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(msg.into())
    }
}

impl From<wavedg_core::Error> for Failure {
    fn from(e: wavedg_core::Error) -> Self {
        match e {
            wavedg_core::Error::EigenFailure => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("io error: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "wavedg", about = "Energy-based DG wave equation experiments", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Flat key=value config file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Config overrides, written as --key value or --key=value.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Mesh refinement study: error per resolution plus a fitted rate.
    Converge(RunArgs),
    /// Spectral radii of periodic semi-discrete operators.
    Spectrum(RunArgs),
    /// Eigenvalue audit of the one-step matrix with local time stepping.
    Ltsaudit(RunArgs),
    /// Time evolution reporting energy and error, optionally dumping states.
    Evolve(RunArgs),
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("WAVEDG_THREADS") else {
        return Ok(());
    };
    let k: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("WAVEDG_THREADS: cannot parse {raw:?}")))?;
    if k == 0 {
        return Err(Failure::config("WAVEDG_THREADS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| Failure::config(format!("thread pool setup failed: {e}")))
}

fn dispatch(cmd: &Command) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let run = |args: &RunArgs, keys: &[&str]| -> Result<Config, Failure> {
        let cfg = Config::load(&args.config, &args.overrides)?;
        cfg.check_keys(keys)?;
        Ok(cfg)
    };
    match cmd {
        Command::Converge(a) => converge::run(&run(a, converge::KEYS)?, &mut out),
        Command::Spectrum(a) => spectrum::run(&run(a, spectrum::KEYS)?, &mut out),
        Command::Ltsaudit(a) => ltsaudit::run(&run(a, ltsaudit::KEYS)?, &mut out),
        Command::Evolve(a) => evolve::run(&run(a, evolve::KEYS)?, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = init_threads().and_then(|()| dispatch(&cli.command));
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
