//! Exact slow NIM: positions, Smith remoteness in normal and misère play,
//! the strict M-rule, and the catalogue of positions where the M-rule is not
//! optimal in misère play.

pub mod error;
pub mod exceptions;
pub mod families;
pub mod game;
pub mod index;
pub mod mrule;
pub mod position;
pub mod solver;
pub mod table;

pub use error::{Error, Result};
pub use game::{apply_keep, apply_move, is_terminal, successors, GameSpec, MoveChoice, Version};
pub use index::{box_size, enumerate_box, rank, unrank, BoxIndex};
pub use position::{canonicalize, pos, Position};
pub use solver::{MemoOracle, Oracle, SolveRecord, Solver, Winner};
pub use table::{build_table, load_table, save_table, SolveTable, TableSet};
