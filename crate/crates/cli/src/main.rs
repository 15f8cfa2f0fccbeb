//! `slac` command-line front end.
//!
//! Exit status: 0 when the run completed without a contradiction, 10 when it
//! found one (or the instance is UNSAT), 2 on any input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod bench;
mod check;
mod input;
mod report;
mod solve;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONTRADICTION: u8 = 10;
pub const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "slac", version, about = "Local consistency checks for finite-domain CSPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ac,
    Lac,
    Sac,
    Slac,
    Pq,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ac => "ac",
            Method::Lac => "lac",
            Method::Sac => "sac",
            Method::Slac => "slac",
            Method::Pq => "pq",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProgramMethod {
    Ac,
    Lac,
}

#[derive(clap::Args, Debug)]
pub struct Inputs {
    /// Template JSON file, or the name of a bundled template.
    #[arg(long)]
    template: String,
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one consistency engine on an instance.
    Check {
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        inputs: Inputs,
        /// Write the contradiction certificate to this file.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Write a JSON run report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, requires = "seed_val")]
        seed_var: Option<String>,
        #[arg(long, requires = "seed_var")]
        seed_val: Option<String>,
        /// Longest cycle tried by `--method pq`.
        #[arg(long, default_value_t = 6)]
        max_cycle_len: usize,
        /// Worker threads for SAC/SLAC. Above 1 switches to frozen sweeps.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Find a solution by SLAC-guided backtracking.
    Solve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the DATALOG program of a template.
    GenDatalog {
        #[arg(long)]
        template: String,
        #[arg(long, value_enum)]
        method: ProgramMethod,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a witness certificate against an instance.
    WitnessVerify {
        #[arg(long)]
        witness: PathBuf,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Time engines over a directory of instances.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        /// Comma-separated engines.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "ac,lac,sac,slac")]
        methods: Vec<Method>,
        /// CSV output path; `-` for standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also time this many random instances per bundled bounded-width template.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let out = match cli.command {
        Command::Check {
            method,
            inputs,
            witness,
            json,
            seed_var,
            seed_val,
            max_cycle_len,
            threads,
        } => check::run(check::CheckArgs {
            argv,
            method,
            inputs,
            witness,
            json,
            seed: seed_var.zip(seed_val),
            max_cycle_len,
            threads,
        }),
        Command::Solve { inputs, json } => solve::run(argv, &inputs, json.as_deref()),
        Command::GenDatalog { template, method, out } => check::gen_datalog(&template, method, out.as_deref()),
        Command::WitnessVerify { witness, inputs, json } => {
            check::witness_verify(argv, &witness, &inputs, json.as_deref())
        }
        Command::Bench {
            suite,
            repeat,
            methods,
            csv,
            random,
            rng_seed,
        } => bench::run(&bench::BenchArgs {
            suite,
            repeat,
            methods,
            csv,
            random,
            rng_seed,
        }),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
