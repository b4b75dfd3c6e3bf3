use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pile sizes sorted non-decreasingly.
///
/// Permuting piles does not change the game, so every position is kept in
/// this canonical form and equality/hashing operate on the sorted vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Position {
    piles: Vec<u32>,
}

impl Position {
    /// Sorts `raw` into canonical order.
    pub fn new(raw: impl Into<Vec<u32>>) -> Result<Self> {
        let mut piles = raw.into();
        if piles.is_empty() {
            return Err(Error::InvalidInput("a position needs at least one pile".into()));
        }
        piles.sort_unstable();
        Ok(Self { piles })
    }

    /// Wraps an already sorted, non-empty vector.
    pub(crate) fn from_sorted(piles: Vec<u32>) -> Self {
        debug_assert!(!piles.is_empty());
        debug_assert!(piles.windows(2).all(|w| w[0] <= w[1]));
        Self { piles }
    }

    pub fn piles(&self) -> &[u32] {
        &self.piles
    }

    pub fn len(&self) -> usize {
        self.piles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.piles.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.piles.iter().map(|&p| p as u64).sum()
    }

    pub fn largest(&self) -> u32 {
        *self.piles.last().expect("positions are non-empty")
    }

    pub fn smallest(&self) -> u32 {
        self.piles[0]
    }

    pub fn nonzero(&self) -> usize {
        self.piles.iter().filter(|&&p| p > 0).count()
    }

    /// The first `len` piles, which are again canonical.
    pub fn prefix(&self, len: usize) -> Position {
        Position::from_sorted(self.piles[..len].to_vec())
    }

    /// Appends piles that are at least the current largest pile.
    pub fn extended(&self, tail: &[u32]) -> Result<Position> {
        let mut piles = self.piles.clone();
        piles.extend_from_slice(tail);
        if piles.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(format!(
                "extension {:?} of {} is not sorted",
                tail, self
            )));
        }
        Ok(Position::from_sorted(piles))
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.piles
    }
}

/// Sorts raw pile counts into a canonical [`Position`].
///
/// Negative counts are rejected, which is why the input is signed.
pub fn canonicalize(raw: &[i64]) -> Result<Position> {
    let piles = raw
        .iter()
        .map(|&p| {
            u32::try_from(p).map_err(|_| Error::InvalidInput(format!("pile size {p} is out of range")))
        })
        .collect::<Result<Vec<u32>>>()?;
    Position::new(piles)
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.piles.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;

    /// Parses `1,2,3` (whitespace and surrounding parentheses are tolerated).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Err(Error::InvalidInput("empty pile list".into()));
        }
        let raw = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<i64>()
                    .map_err(|_| Error::InvalidInput(format!("'{t}' is not an integer")))
            })
            .collect::<Result<Vec<i64>>>()?;
        canonicalize(&raw)
    }
}

impl TryFrom<Vec<u32>> for Position {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Position::new(v)
    }
}

impl From<Position> for Vec<u32> {
    fn from(p: Position) -> Self {
        p.piles
    }
}

impl AsRef<[u32]> for Position {
    fn as_ref(&self) -> &[u32] {
        &self.piles
    }
}

/// Shorthand used all over the tests: `pos(&[1, 2, 3])`.
pub fn pos(piles: &[u32]) -> Position {
    Position::new(piles.to_vec()).expect("non-empty position")
}
