//! Command-line front end for the `slownim` library.
//!
//! Every subcommand writes through an [`Io`] so that sessions can be driven
//! from tests as well as from a terminal.

pub mod args;
mod cache;
mod commands;
pub mod play;

use std::fmt;
use std::io::{BufRead, Write};

use anyhow::Result;

pub use args::Cli;
use args::{CacheCommand, Command, FamiliesCommand};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

/// Streams a command reads from and writes to. Diagnostics and summaries
/// that are not part of a command's data output go to `err`.
pub struct Io<'a> {
    pub input: &'a mut (dyn BufRead + Send),
    pub out: &'a mut (dyn Write + Send),
    pub err: &'a mut (dyn Write + Send),
}

/// How a command finished when it did not fail outright.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => exit::SUCCESS,
            Status::VerificationFailed => exit::VERIFICATION_FAILED,
        }
    }
}

/// Errors raised by the front end itself rather than the library.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Resource(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Exit code for an error returned by [`run`].
pub fn error_code(e: &anyhow::Error) -> i32 {
    if let Some(c) = e.downcast_ref::<CliError>() {
        return match c {
            CliError::Usage(_) => exit::USAGE,
            CliError::Resource(_) => exit::RESOURCE,
        };
    }
    match e.downcast_ref::<slownim::Error>() {
        Some(slownim::Error::Resource { .. }) => exit::RESOURCE,
        Some(
            slownim::Error::InvalidInput(_)
            | slownim::Error::IllegalMove(_)
            | slownim::Error::UnsupportedSpec(_)
            | slownim::Error::OutOfBox { .. }
            | slownim::Error::NotInCatalog(_),
        ) => exit::USAGE,
        _ => exit::VERIFICATION_FAILED,
    }
}

/// Runs a parsed command line, inside a dedicated thread pool when
/// `--threads` is given.
pub fn run(cli: Cli, io: &mut Io<'_>) -> Result<Status> {
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build()?;
            pool.install(|| dispatch(cli, io))
        }
        None => dispatch(cli, io),
    }
}

fn dispatch(cli: Cli, io: &mut Io<'_>) -> Result<Status> {
    let cache = cache::Cache::resolve(cli.cache_dir.clone());
    match cli.command {
        Command::Solve(a) => commands::solve(&a, io),
        Command::Scan(a) => commands::scan(&a, io),
        Command::Table(a) => commands::table(&a, &cache, io),
        Command::Export(a) => commands::export(&a, &cache, io),
        Command::Families(FamiliesCommand::Verify(a)) => commands::families_verify(&a, io),
        Command::Families(FamiliesCommand::Coverage(a)) => commands::families_coverage(&a, io),
        Command::Play(a) => play::run(&a, io),
        Command::Cache(CacheCommand::Info) => cache.info(io),
    }
}
