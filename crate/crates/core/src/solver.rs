//! Smith remoteness and Sprague-Grundy values by memoized search.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{is_terminal, successors, GameSpec, MoveChoice, Version};
use crate::position::Position;

/// Outcome class of a position for the player about to move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Winner {
    /// The player to move wins.
    N,
    /// The player to move loses.
    P,
}

impl Winner {
    pub fn from_remoteness(r: u16) -> Self {
        if r % 2 == 1 {
            Winner::N
        } else {
            Winner::P
        }
    }
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::N => "N",
            Winner::P => "P",
        })
    }
}

/// Remoteness of a position with no legal move.
///
/// Misère terminals get 1 so that odd remoteness means "mover wins" in both
/// versions.
pub fn terminal_remoteness(version: Version) -> u16 {
    match version {
        Version::Normal => 0,
        Version::Misere => 1,
    }
}

/// Smith's rule: hurry to the smallest even successor if one exists,
/// otherwise stall to the largest.
pub fn combine_remoteness(successors: impl IntoIterator<Item = u16>) -> u16 {
    let mut min_even: Option<u16> = None;
    let mut max_all = 0u16;
    for r in successors {
        if r % 2 == 0 {
            min_even = Some(min_even.map_or(r, |m| m.min(r)));
        }
        max_all = max_all.max(r);
    }
    1 + min_even.unwrap_or(max_all)
}

/// Minimum excludant.
pub fn mex(values: impl IntoIterator<Item = u16>) -> u16 {
    let mut seen = 0u128;
    let mut big = Vec::new();
    for v in values {
        if v < 128 {
            seen |= 1 << v;
        } else {
            big.push(v);
        }
    }
    let low = (!seen).trailing_zeros() as u16;
    if low < 128 {
        return low;
    }
    big.sort_unstable();
    let mut m = 128;
    for v in big {
        if v == m {
            m += 1;
        } else if v > m {
            break;
        }
    }
    m
}

/// Source of remoteness values for keep-one games of any pile count.
///
/// `remoteness(x)` is evaluated in the game with `n = x.len()`, `k = n - 1`.
pub trait Oracle: Sync {
    fn version(&self) -> Version;
    fn remoteness(&self, x: &Position) -> Result<u16>;
}

/// Solver for one game, memoizing every position it evaluates.
///
/// The memo is shared: lookups take a read lock, results of one search are
/// published together under a write lock and never overwritten.
pub struct Solver {
    spec: GameSpec,
    memo: RwLock<HashMap<Position, u16>>,
    sg_memo: RwLock<HashMap<Position, u16>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub position: Position,
    pub remoteness: u16,
    pub winner: Winner,
    /// Representative keep indices (largest index of each equal-pile group)
    /// of the optimal moves; only for `k = n - 1`.
    pub optimal_keeps: Option<Vec<usize>>,
    pub sg: Option<u16>,
}

impl Solver {
    pub fn new(spec: GameSpec) -> Self {
        Self { spec, memo: RwLock::new(HashMap::new()), sg_memo: RwLock::new(HashMap::new()) }
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().len()
    }

    pub fn remoteness(&self, x: &Position) -> Result<u16> {
        let base = terminal_remoteness(self.spec.version);
        self.evaluate(&self.memo, x, base, combine_remoteness)
    }

    pub fn winner(&self, x: &Position) -> Result<Winner> {
        Ok(Winner::from_remoteness(self.remoteness(x)?))
    }

    /// Normal-play Sprague-Grundy value.
    pub fn sg_value(&self, x: &Position) -> Result<u16> {
        if self.spec.version != Version::Normal {
            return Err(Error::UnsupportedSpec("Sprague-Grundy values are computed for normal play only".into()));
        }
        self.evaluate(&self.sg_memo, x, 0, mex)
    }

    /// All moves realizing the remoteness recurrence: each leads to a
    /// successor of remoteness `R(x) - 1`.
    pub fn optimal_moves(&self, x: &Position) -> Result<Vec<(MoveChoice, Position)>> {
        let r = self.remoteness(x)?;
        let succ = successors(x, &self.spec)?;
        if succ.is_empty() {
            return Err(Error::NoMoves(x.to_string()));
        }
        let mut out = Vec::new();
        for (mv, y) in succ {
            if self.remoteness(&y)? + 1 == r {
                out.push((mv, y));
            }
        }
        Ok(out)
    }

    pub fn record(&self, x: &Position) -> Result<SolveRecord> {
        let remoteness = self.remoteness(x)?;
        let optimal_keeps = if self.spec.is_keep_one() && !is_terminal(x, &self.spec)? {
            let mut keeps: Vec<usize> = self
                .optimal_moves(x)?
                .iter()
                .filter_map(|(mv, _)| mv.kept_index(self.spec.n))
                .collect();
            keeps.sort_unstable();
            Some(keeps)
        } else if self.spec.is_keep_one() {
            Some(Vec::new())
        } else {
            None
        };
        let sg = match self.spec.version {
            Version::Normal => Some(self.sg_value(x)?),
            Version::Misere => None,
        };
        Ok(SolveRecord { position: x.clone(), remoteness, winner: Winner::from_remoteness(remoteness), optimal_keeps, sg })
    }

    // Depth-first evaluation with an explicit stack; the search depth grows
    // with sum(x) / k and must not depend on the call stack.
    fn evaluate(
        &self,
        memo: &RwLock<HashMap<Position, u16>>,
        x: &Position,
        base: u16,
        combine: fn(std::vec::IntoIter<u16>) -> u16,
    ) -> Result<u16> {
        self.spec.check_len(x)?;
        if let Some(&v) = memo.read().get(x) {
            return Ok(v);
        }
        let mut local: HashMap<Position, u16> = HashMap::new();
        let mut stack: Vec<(Position, Option<Vec<Position>>)> = vec![(x.clone(), None)];
        {
            let shared = memo.read();
            let known = |p: &Position, local: &HashMap<Position, u16>| shared.get(p).or_else(|| local.get(p)).copied();
            while let Some((top, children)) = stack.last_mut() {
                if known(top, &local).is_some() {
                    stack.pop();
                    continue;
                }
                let kids = match children {
                    Some(k) => k,
                    None => {
                        let list: Vec<Position> = successors(top, &self.spec)?.into_iter().map(|(_, y)| y).collect();
                        children.insert(list)
                    }
                };
                let pending: Vec<Position> =
                    kids.iter().filter(|y| known(y, &local).is_none()).cloned().collect();
                if pending.is_empty() {
                    let value = if kids.is_empty() {
                        base
                    } else {
                        let vals: Vec<u16> = kids.iter().map(|y| known(y, &local).expect("child solved")).collect();
                        combine(vals.into_iter())
                    };
                    let top = top.clone();
                    stack.pop();
                    local.insert(top, value);
                } else {
                    stack.extend(pending.into_iter().map(|y| (y, None)));
                }
            }
        }
        let value = local[x];
        let mut shared = memo.write();
        for (p, v) in local {
            shared.entry(p).or_insert(v);
        }
        Ok(value)
    }
}

/// Lazily created solvers for the keep-one game of every pile count.
pub struct MemoOracle {
    version: Version,
    solvers: RwLock<BTreeMap<usize, Arc<Solver>>>,
}

impl MemoOracle {
    pub fn new(version: Version) -> Self {
        Self { version, solvers: RwLock::new(BTreeMap::new()) }
    }

    pub fn solver(&self, n: usize) -> Result<Arc<Solver>> {
        if let Some(s) = self.solvers.read().get(&n) {
            return Ok(s.clone());
        }
        let spec = GameSpec::keep_one(n, self.version)?;
        Ok(self.solvers.write().entry(n).or_insert_with(|| Arc::new(Solver::new(spec))).clone())
    }
}

impl Oracle for MemoOracle {
    fn version(&self) -> Version {
        self.version
    }

    fn remoteness(&self, x: &Position) -> Result<u16> {
        self.solver(x.len())?.remoteness(x)
    }
}
