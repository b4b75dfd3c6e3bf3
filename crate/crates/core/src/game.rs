use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::position::Position;

/// Which side wins when the player to move is stuck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Version {
    /// The stuck player loses.
    Normal,
    /// The stuck player wins.
    Misere,
}

impl Version {
    pub fn as_str(self) -> &'static str {
        match self {
            Version::Normal => "normal",
            Version::Misere => "misere",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Version::Normal => 0,
            Version::Misere => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Version::Normal),
            1 => Some(Version::Misere),
            _ => None,
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Version {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Version::Normal),
            "misere" | "misère" => Ok(Version::Misere),
            other => Err(Error::InvalidInput(format!("unknown play version '{other}'"))),
        }
    }
}

/// `n` piles, each move takes one stone from exactly `k` of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    pub k: usize,
    pub version: Version,
}

impl GameSpec {
    pub fn new(n: usize, k: usize, version: Version) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::UnsupportedSpec(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        Ok(Self { n, k, version })
    }

    /// The `k = n - 1` game.
    pub fn keep_one(n: usize, version: Version) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedSpec(format!("k = n - 1 needs n >= 2, got n={n}")));
        }
        Self::new(n, n - 1, version)
    }

    pub fn is_keep_one(&self) -> bool {
        self.k + 1 == self.n
    }

    pub(crate) fn check_len(&self, x: &Position) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "position {x} has {} piles, the game has {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    pub(crate) fn require_keep_one(&self) -> Result<()> {
        if !self.is_keep_one() {
            return Err(Error::UnsupportedSpec(format!(
                "keep-one moves need k = n - 1, got n={}, k={}",
                self.n, self.k
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, k={}, {}", self.n, self.k, self.version)
    }
}

/// The set of pile indices reduced by a move, in ascending order.
///
/// Indices refer to the canonical (sorted) position the move is applied to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveChoice {
    pub reduced: Vec<usize>,
}

impl MoveChoice {
    /// The move reducing every pile of an `n`-pile position except `kept`.
    pub fn keep(n: usize, kept: usize) -> Self {
        Self { reduced: (0..n).filter(|&i| i != kept).collect() }
    }

    /// The single index left untouched when exactly one pile is skipped.
    pub fn kept_index(&self, n: usize) -> Option<usize> {
        if self.reduced.len() + 1 != n {
            return None;
        }
        (0..n).find(|i| self.reduced.binary_search(i).is_err())
    }
}

/// True iff fewer than `k` piles are non-empty.
pub fn is_terminal(x: &Position, spec: &GameSpec) -> Result<bool> {
    spec.check_len(x)?;
    Ok(x.nonzero() < spec.k)
}

/// Successor of a sorted pile vector when every pile except `kept` loses a stone.
/// The caller guarantees legality.
pub(crate) fn keep_successor(piles: &[u32], kept: usize) -> Vec<u32> {
    let mut next: Vec<u32> = piles
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == kept { p } else { p - 1 })
        .collect();
    next.sort_unstable();
    next
}

/// Representative keep indices for a sorted pile vector: the largest index of
/// every group of equal piles, restricted to legal moves. Ascending order.
pub(crate) fn legal_keeps(piles: &[u32]) -> Vec<usize> {
    let zeros = piles.iter().take_while(|&&p| p == 0).count();
    match zeros {
        0 => (0..piles.len())
            .filter(|&i| i + 1 == piles.len() || piles[i] != piles[i + 1])
            .collect(),
        // the only legal move keeps the empty pile
        1 => vec![0],
        _ => Vec::new(),
    }
}

/// Every distinct successor of `x`, each with one representative move.
///
/// Moves whose results coincide up to permutation are merged; the kept
/// representative is the lexicographically smallest reduced-index set.
/// Results are ordered by that representative.
pub fn successors(x: &Position, spec: &GameSpec) -> Result<Vec<(MoveChoice, Position)>> {
    spec.check_len(x)?;
    let piles = x.piles();
    let n = spec.n;
    if spec.is_keep_one() {
        // a larger kept index gives a lexicographically smaller reduced set
        return Ok(legal_keeps(piles)
            .into_iter()
            .rev()
            .map(|kept| (MoveChoice::keep(n, kept), Position::from_sorted(keep_successor(piles, kept))))
            .collect());
    }
    let mut out: Vec<(MoveChoice, Position)> = Vec::new();
    for reduced in (0..n).combinations(spec.k) {
        if reduced.iter().any(|&i| piles[i] == 0) {
            continue;
        }
        let mut next = piles.to_vec();
        for &i in &reduced {
            next[i] -= 1;
        }
        next.sort_unstable();
        let next = Position::from_sorted(next);
        if out.iter().all(|(_, y)| *y != next) {
            out.push((MoveChoice { reduced }, next));
        }
    }
    Ok(out)
}

/// Keeps pile `kept` and takes one stone from every other pile.
pub fn apply_keep(x: &Position, kept: usize, spec: &GameSpec) -> Result<Position> {
    spec.require_keep_one()?;
    spec.check_len(x)?;
    if kept >= x.len() {
        return Err(Error::IllegalMove(format!("pile index {kept} is out of range for {x}")));
    }
    if let Some(i) = (0..x.len()).find(|&i| i != kept && x.piles()[i] == 0) {
        return Err(Error::IllegalMove(format!("keeping pile {kept} of {x} reduces empty pile {i}")));
    }
    Ok(Position::from_sorted(keep_successor(x.piles(), kept)))
}

/// Applies an arbitrary reduced-index set.
pub fn apply_move(x: &Position, mv: &MoveChoice, spec: &GameSpec) -> Result<Position> {
    spec.check_len(x)?;
    let mut idx = mv.reduced.clone();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != spec.k || mv.reduced.len() != spec.k {
        return Err(Error::IllegalMove(format!(
            "a move must reduce exactly {} distinct piles",
            spec.k
        )));
    }
    let mut next = x.piles().to_vec();
    for i in idx {
        match next.get_mut(i) {
            Some(p) if *p > 0 => *p -= 1,
            Some(_) => return Err(Error::IllegalMove(format!("pile {i} of {x} is empty"))),
            None => return Err(Error::IllegalMove(format!("pile index {i} is out of range for {x}"))),
        }
    }
    Position::new(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::pos;

    fn spec(n: usize, k: usize) -> GameSpec {
        GameSpec::new(n, k, Version::Normal).unwrap()
    }

    fn succ_set(x: &[u32], k: usize) -> Vec<Position> {
        let mut v: Vec<Position> = successors(&pos(x), &spec(x.len(), k))
            .unwrap()
            .into_iter()
            .map(|(_, y)| y)
            .collect();
        v.sort();
        v
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::new(3, 0, Version::Normal).is_err());
        assert!(GameSpec::new(3, 4, Version::Normal).is_err());
        assert!(GameSpec::keep_one(1, Version::Misere).is_err());
        assert_eq!(GameSpec::keep_one(4, Version::Misere).unwrap().k, 3);
    }

    #[test]
    fn terminal_detection() {
        assert!(is_terminal(&pos(&[0, 0, 2]), &spec(3, 2)).unwrap());
        assert!(!is_terminal(&pos(&[0, 1, 1]), &spec(3, 2)).unwrap());
        assert!(!is_terminal(&pos(&[1, 1, 1, 1]), &spec(4, 3)).unwrap());
        assert!(is_terminal(&pos(&[1, 1]), &spec(3, 2)).is_err());
    }

    #[test]
    fn successor_examples() {
        assert_eq!(succ_set(&[1, 2, 3], 2), vec![pos(&[0, 1, 3]), pos(&[0, 2, 2]), pos(&[1, 1, 2])]);
        assert_eq!(succ_set(&[0, 1, 3], 2), vec![pos(&[0, 0, 2])]);
        assert_eq!(succ_set(&[1, 1, 2], 2), vec![pos(&[0, 0, 2]), pos(&[0, 1, 1])]);
    }

    #[test]
    fn keep_one_fast_path_matches_general_enumeration() {
        for x in [&[1u32, 1, 2][..], &[0, 2, 2], &[2, 2, 2, 3], &[0, 0, 4], &[3, 3, 3, 3]] {
            let s = spec(x.len(), x.len() - 1);
            let fast = successors(&pos(x), &s).unwrap();
            let mut slow: Vec<(MoveChoice, Position)> = Vec::new();
            for reduced in (0..s.n).combinations(s.k) {
                let mv = MoveChoice { reduced };
                if let Ok(y) = apply_move(&pos(x), &mv, &s) {
                    if slow.iter().all(|(_, z)| *z != y) {
                        slow.push((mv, y));
                    }
                }
            }
            assert_eq!(fast, slow, "{x:?}");
        }
    }

    #[test]
    fn representative_move_keeps_largest_index() {
        let moves = successors(&pos(&[2, 2, 2, 3]), &spec(4, 3)).unwrap();
        let kept: Vec<usize> = moves.iter().map(|(m, _)| m.kept_index(4).unwrap()).collect();
        assert_eq!(kept, vec![3, 2]);
    }

    #[test]
    fn apply_keep_examples() {
        let s = spec(3, 2);
        assert_eq!(apply_keep(&pos(&[1, 2, 3]), 0, &s).unwrap(), pos(&[1, 1, 2]));
        assert_eq!(apply_keep(&pos(&[0, 2, 2]), 0, &s).unwrap(), pos(&[0, 1, 1]));
        assert!(matches!(apply_keep(&pos(&[0, 1, 3]), 1, &s), Err(Error::IllegalMove(_))));
        assert!(matches!(apply_keep(&pos(&[1, 2, 3]), 0, &spec(3, 1)), Err(Error::UnsupportedSpec(_))));
    }

    #[test]
    fn apply_move_validates() {
        let s = spec(4, 2);
        let x = pos(&[0, 1, 2, 3]);
        assert_eq!(apply_move(&x, &MoveChoice { reduced: vec![1, 3] }, &s).unwrap(), pos(&[0, 0, 2, 2]));
        assert!(apply_move(&x, &MoveChoice { reduced: vec![0, 3] }, &s).is_err());
        assert!(apply_move(&x, &MoveChoice { reduced: vec![3, 3] }, &s).is_err());
        assert!(apply_move(&x, &MoveChoice { reduced: vec![1, 2, 3] }, &s).is_err());
    }

    #[test]
    fn kept_index_round_trip() {
        for kept in 0..5 {
            assert_eq!(MoveChoice::keep(5, kept).kept_index(5), Some(kept));
        }
        assert_eq!(MoveChoice { reduced: vec![0] }.kept_index(4), None);
    }
}
