//! The strict M-rule for the keep-one game.
//!
//! (e) if some pile is even (an empty pile counts), keep a smallest even pile;
//! (o) if every pile is odd, keep a largest pile. Ties keep the largest index,
//! so the reduced vector stays sorted without a permutation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::position::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Every pile odd: keep a largest one.
    #[serde(rename = "o")]
    AllOdd,
    /// Keep a smallest even pile.
    #[serde(rename = "e")]
    SmallestEven,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MRuleOutcome {
    pub kept_index: usize,
    pub successor: Position,
    pub rule: Rule,
}

/// `l` rounded up to the next even number.
pub fn round_up_even(l: u32) -> u32 {
    l + (l & 1)
}

/// `m` rounded up to the next odd number.
pub fn round_up_odd(m: u32) -> u32 {
    m | 1
}

/// Index kept by the strict M-rule, or `None` when no keep-one move exists.
pub fn m_keep(piles: &[u32]) -> Option<usize> {
    let n = piles.len();
    if n < 2 || piles.iter().take_while(|&&p| p == 0).count() >= 2 {
        return None;
    }
    let smallest_even = piles.iter().copied().filter(|p| p % 2 == 0).min();
    Some(match smallest_even {
        Some(v) => piles.iter().rposition(|&p| p == v).expect("value present"),
        None => n - 1,
    })
}

/// One strict M-move.
pub fn m_move(x: &Position) -> Result<MRuleOutcome> {
    if x.len() < 2 {
        return Err(Error::UnsupportedSpec("the M-rule needs at least two piles".into()));
    }
    let kept = m_keep(x.piles()).ok_or_else(|| Error::NoMoves(x.to_string()))?;
    let rule = if x.piles().iter().all(|p| p % 2 == 1) { Rule::AllOdd } else { Rule::SmallestEven };
    let next: Vec<u32> = x
        .piles()
        .iter()
        .enumerate()
        .map(|(i, &p)| if i == kept { p } else { p - 1 })
        .collect();
    Ok(MRuleOutcome { kept_index: kept, successor: Position::from_sorted(next), rule })
}

/// The M-sequence from `x` to a terminal position and its number of moves.
pub fn m_sequence(x: &Position) -> Result<(Vec<Position>, usize)> {
    if x.len() < 2 {
        return Err(Error::UnsupportedSpec("the M-rule needs at least two piles".into()));
    }
    let mut seq = vec![x.clone()];
    loop {
        let cur = seq.last().expect("non-empty");
        match m_keep(cur.piles()) {
            None => break,
            Some(_) => {
                let next = m_move(cur)?.successor;
                seq.push(next);
            }
        }
    }
    let moves = seq.len() - 1;
    Ok((seq, moves))
}

/// `M(x)`: the length of the M-sequence, without materializing it.
pub fn m_count(x: &Position) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::UnsupportedSpec("the M-rule needs at least two piles".into()));
    }
    let mut piles = x.piles().to_vec();
    let mut moves = 0;
    while let Some(kept) = m_keep(&piles) {
        for (i, p) in piles.iter_mut().enumerate() {
            if i != kept {
                *p -= 1;
            }
        }
        moves += 1;
    }
    Ok(moves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{apply_keep, GameSpec, Version};
    use crate::index::enumerate_box;
    use crate::position::pos;

    #[test]
    fn round_up_examples() {
        assert_eq!(round_up_even(3), 4);
        assert_eq!(round_up_even(4), 4);
        assert_eq!(round_up_even(0), 0);
        assert_eq!(round_up_odd(6), 7);
        assert_eq!(round_up_odd(7), 7);
        for l in 0..100 {
            assert_eq!(round_up_odd(l + 1), round_up_even(l) + 1);
        }
    }

    #[test]
    fn m_move_examples() {
        let o = m_move(&pos(&[3, 5, 7])).unwrap();
        assert_eq!((o.kept_index, o.successor.clone(), o.rule), (2, pos(&[2, 4, 7]), Rule::AllOdd));
        let e = m_move(&pos(&[0, 2, 2])).unwrap();
        assert_eq!((e.kept_index, e.successor.clone(), e.rule), (0, pos(&[0, 1, 1]), Rule::SmallestEven));
        let t = m_move(&pos(&[2, 2, 3])).unwrap();
        assert_eq!((t.kept_index, t.successor.clone(), t.rule), (1, pos(&[1, 2, 2]), Rule::SmallestEven));
        assert!(matches!(m_move(&pos(&[0, 0, 5])), Err(Error::NoMoves(_))));
        assert!(m_move(&pos(&[4])).is_err());
    }

    #[test]
    fn m_sequence_examples() {
        assert_eq!(m_sequence(&pos(&[0, 0, 5])).unwrap(), (vec![pos(&[0, 0, 5])], 0));
        assert_eq!(m_sequence(&pos(&[1, 1, 1])).unwrap(), (vec![pos(&[1, 1, 1]), pos(&[0, 0, 1])], 1));
        let (seq, m) = m_sequence(&pos(&[1, 2, 3])).unwrap();
        assert_eq!(seq, vec![pos(&[1, 2, 3]), pos(&[0, 2, 2]), pos(&[0, 1, 1]), pos(&[0, 0, 0])]);
        assert_eq!(m, 3);
        assert_eq!(m_count(&pos(&[1, 2, 3])).unwrap(), 3);
    }

    #[test]
    fn strict_move_preserves_order_and_agrees_with_apply_keep() {
        for n in 2..=5 {
            let spec = GameSpec::keep_one(n, Version::Normal).unwrap();
            for x in enumerate_box(n, 7) {
                let Some(kept) = m_keep(x.piles()) else { continue };
                let raw: Vec<u32> =
                    x.piles().iter().enumerate().map(|(i, &p)| if i == kept { p } else { p - 1 }).collect();
                assert!(raw.windows(2).all(|w| w[0] <= w[1]), "{x}");
                assert_eq!(m_move(&x).unwrap().successor, apply_keep(&x, kept, &spec).unwrap());
            }
        }
    }

    #[test]
    fn rule_o_only_at_the_start_and_never_produces_all_odd() {
        for n in 2..=5 {
            for x in enumerate_box(n, 8) {
                if m_keep(x.piles()).is_none() {
                    continue;
                }
                let succ = m_move(&x).unwrap().successor;
                assert!(succ.piles().iter().any(|p| p % 2 == 0), "{x} -> {succ}");
                let (seq, _) = m_sequence(&x).unwrap();
                for later in seq.iter().skip(1) {
                    if m_keep(later.piles()).is_some() {
                        assert_eq!(m_move(later).unwrap().rule, Rule::SmallestEven);
                    }
                }
            }
        }
    }
}
