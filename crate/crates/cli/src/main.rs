//! `repstab`: stability analysis of interacting wireless repeaters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Loaded};

#[derive(Parser)]
#[command(name = "repstab", version, about = "Feedback stability of interacting wireless repeaters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the frequency sweeps; results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Gershgorin lower bound on the maximum stable gain
    Bound(Common),
    /// Stability measure over a gain sweep
    Sweep(Common),
    /// Bound and estimated instability transition
    Maxgain(Common),
    /// Coverage extension under stability and power limits
    Coverage(Common),
    /// Two-repeater time-domain echo simulation
    Echo {
        #[command(flatten)]
        common: Common,
        /// Input signals, CSV with columns x1,x2
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Bound(c) | Command::Sweep(c) | Command::Maxgain(c) | Command::Coverage(c) => c,
            Command::Echo { common, .. } => common,
        }
    }
}

fn run(command: &Command) -> Result<String, Failure> {
    let loaded = Loaded::from_path(&command.common().scenario)?;
    match command {
        Command::Bound(_) => commands::bound(&loaded),
        Command::Sweep(_) => commands::sweep(&loaded),
        Command::Maxgain(_) => commands::maxgain(&loaded),
        Command::Coverage(_) => commands::coverage(&loaded),
        Command::Echo { input, .. } => commands::echo(&loaded, input.as_deref()),
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(command: &Command, threads: Option<usize>) -> Result<String, Failure> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Invalid(format!("cannot start {n} threads: {e}")))?
            .install(|| run(command)),
        None => run(command),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(command: &Command, _threads: Option<usize>) -> Result<String, Failure> {
    run(command)
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let result = match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::Invalid(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = cli.command.common();
    if common.threads == Some(0) {
        eprintln!("repstab: --threads must be at least 1");
        return ExitCode::from(1);
    }
    let result = run_with_threads(&cli.command, common.threads)
        .and_then(|text| write_output(&text, common.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("repstab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
