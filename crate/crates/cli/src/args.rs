use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slownim::{Position, Version};

#[derive(Parser, Debug)]
#[command(name = "slownim", version, about = "Solver and exception explorer for exact slow NIM")]
pub struct Cli {
    /// Worker threads for table builds and scans (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    /// Directory for cached tables.
    #[arg(long, global = true, env = "SLOWNIM_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Remoteness, winner, optimal moves and M-rule verdict for one position.
    Solve(SolveArgs),
    /// Write every exception of a box as JSON lines.
    Scan(ScanArgs),
    /// Build a remoteness table and store it.
    Table(TableArgs),
    /// Dump a remoteness table as JSON lines or CSV.
    Export(ExportArgs),
    /// Check exception families against brute force.
    #[command(subcommand)]
    Families(FamiliesCommand),
    /// Play against the engine.
    Play(PlayArgs),
    /// Inspect the table cache.
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VersionArg {
    Normal,
    Misere,
}

impl From<VersionArg> for Version {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::Normal => Version::Normal,
            VersionArg::Misere => Version::Misere,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveFormat {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Jsonl,
    Csv,
}

fn parse_piles(s: &str) -> Result<Position, String> {
    s.parse::<Position>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Pile sizes, e.g. 1,2,3 (any order).
    #[arg(long, value_parser = parse_piles)]
    pub piles: Position,
    /// Piles reduced per move (default: one less than the pile count).
    #[arg(long)]
    pub k: Option<usize>,
    /// Play version; both when omitted.
    #[arg(long, value_enum)]
    pub version: Option<VersionArg>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: SolveFormat,
}

#[derive(Args, Debug)]
pub struct BoxArgs {
    /// Number of piles.
    #[arg(long)]
    pub n: usize,
    /// Piles reduced per move (default: n - 1).
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest pile size in the box.
    #[arg(long = "max")]
    pub max: u32,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    #[arg(long, value_enum, default_value = "misere")]
    pub version: VersionArg,
    /// Only write minimal exceptions.
    #[arg(long)]
    pub minimal_only: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    #[arg(long, value_enum)]
    pub version: VersionArg,
    /// Output file (default: the cache directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub bounds: BoxArgs,
    #[arg(long, value_enum)]
    pub version: VersionArg,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: ExportFormat,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum FamiliesCommand {
    /// Compare family members and rows with brute-force exceptions.
    Verify(VerifyArgs),
    /// Match every exception of a box against the catalogue.
    Coverage(CoverageArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Family id (default: every family claimed as an exact characterization).
    #[arg(long)]
    pub id: Option<String>,
    /// Verify only this pile count.
    #[arg(long, conflicts_with = "n_max")]
    pub n: Option<usize>,
    /// Verify pile counts 3..=N.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Largest pile size (default: 14, or the largest row entry for tables).
    #[arg(long = "max")]
    pub max: Option<u32>,
    /// Write the JSON reports here (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "max")]
    pub max: u32,
    #[arg(long, value_enum, default_value = "misere")]
    pub version: VersionArg,
    /// Write the JSON report here (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    First,
    Second,
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    #[arg(long, value_parser = parse_piles)]
    pub piles: Position,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "misere")]
    pub version: VersionArg,
    /// Whether you move first or second.
    #[arg(long, value_enum, default_value = "first")]
    pub human: Side,
}

#[derive(Subcommand, Debug)]
pub enum CacheCommand {
    /// List cached tables.
    Info,
}
