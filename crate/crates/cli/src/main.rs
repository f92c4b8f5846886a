mod args;
mod backends;
mod commands;

use std::process::ExitCode;

use acueval::ErrorClass;
use clap::Parser;

use args::{Cli, Command};

/// Failure of a command, mapped onto a process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(acueval::Error),
}

impl From<acueval::Error> for Failure {
    fn from(e: acueval::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e.class() {
                ErrorClass::Validation => 65,
                ErrorClass::Backend => 69,
                ErrorClass::Io => 74,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Lib(e) => e.fmt(f),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(a) => commands::stats(a),
        Command::Score(a) => commands::score(a),
        Command::Benchmark(a) => commands::benchmark(a),
        Command::AcuQuality(a) => commands::quality(a),
        Command::GenPretrain(a) => commands::gen_pretrain(a),
        Command::CandidateSim(a) => commands::candidate_sim(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acueval: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
