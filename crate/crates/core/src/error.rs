use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("unsupported game spec: {0}")]
    UnsupportedSpec(String),

    #[error("position {position} has an entry larger than the box cap {cap}")]
    OutOfBox { position: String, cap: u32 },

    #[error("position {0} has no legal moves")]
    NoMoves(String),

    #[error("box of {positions} positions exceeds the limit of {limit}")]
    Resource { positions: u128, limit: u128 },

    #[error("corrupt table: {0}")]
    CorruptTable(String),

    #[error("position {0} is not an exception")]
    NotAnException(String),

    #[error("position {0} does not belong to any catalogued family")]
    NotInCatalog(String),

    #[error("bad family fixture: {0}")]
    Fixture(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
