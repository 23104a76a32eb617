//! `fsmforge` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/parse/IO error, 2 unknown state register,
//! 3 incomplete result (state cap, conflict budget or input guard hit).

mod bench;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fsmforge", version, about = "Extract FSM topologies from gate-level netlists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Sat,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteKind {
    /// Random FSMs with sum-of-products next-state logic.
    Random,
    /// Next-state bits that are wide XORs of the inputs.
    Parity,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the fan-in cones of the state registers.
    Cut {
        #[arg(long)]
        netlist: PathBuf,
        /// Comma-separated state registers, bit 0 first.
        #[arg(long, value_delimiter = ',', required = true)]
        state_regs: Vec<String>,
        /// Where to write the cut netlist.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the state-transition topology from a reset state.
    Enum(run::EnumArgs),
    /// Run both engines with and without the cut over a suite and print CSV.
    Bench(bench::BenchArgs),
    /// Write a synthetic FSM netlist, its state spec and its ground truth.
    Generate(run::GenerateArgs),
    /// Dump the CNF of the next-state logic in DIMACS format.
    Cnf {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        state_regs: Vec<String>,
        /// Encode the full netlist instead of the cut.
        #[arg(long)]
        no_cut: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Spec(String),
    Incomplete(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Spec(_) => 2,
            Failure::Incomplete(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Spec(m) | Failure::Incomplete(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap uses 2 for usage errors, which is taken by unknown registers
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Cut { netlist, state_regs, out } => run::cmd_cut(&netlist, state_regs, out.as_deref()),
        Command::Enum(args) => run::cmd_enum(&args),
        Command::Bench(args) => bench::cmd_bench(&args),
        Command::Generate(args) => run::cmd_generate(&args),
        Command::Cnf { netlist, state_regs, no_cut, out } => run::cmd_cnf(&netlist, state_regs, no_cut, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fsmforge: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
