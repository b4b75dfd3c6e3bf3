//! Dense colexicographic ranking of canonical positions inside a box.
//!
//! A sorted vector `x` maps to the strictly increasing combination
//! `c_i = x_i + i`, whose colex rank is `sum C(c_i, i + 1)`. The rank does not
//! depend on the cap, so a table built for a large box answers queries for
//! every smaller one.

use crate::error::{Error, Result};
use crate::position::Position;

/// Number of canonical positions with `n` piles and entries at most `cap`,
/// i.e. `C(cap + n, n)`.
pub fn box_size(n: usize, cap: u32) -> u128 {
    binomial(cap as u128 + n as u128, n as u128)
}

fn binomial(m: u128, k: u128) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (m - k + i) / i;
    }
    acc
}

/// Precomputed binomials for one `(n, cap)` box.
#[derive(Clone, Debug)]
pub struct BoxIndex {
    n: usize,
    cap: u32,
    // binom[j][m] = C(m, j + 1) for m in 0..=cap + n
    binom: Vec<Vec<u64>>,
    len: usize,
}

impl BoxIndex {
    pub fn new(n: usize, cap: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a box needs at least one pile".into()));
        }
        let size = box_size(n, cap);
        let len = usize::try_from(size).map_err(|_| Error::Resource { positions: size, limit: usize::MAX as u128 })?;
        let top = cap as usize + n;
        let binom = (0..n)
            .map(|j| (0..=top).map(|m| binomial(m as u128, j as u128 + 1) as u64).collect())
            .collect();
        Ok(Self { n, cap, binom, len })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Rank of a sorted pile slice; the caller guarantees it fits the box.
    #[inline]
    pub(crate) fn rank_slice(&self, piles: &[u32]) -> usize {
        let mut r = 0u64;
        for (i, &p) in piles.iter().enumerate() {
            r += self.binom[i][p as usize + i];
        }
        r as usize
    }

    pub fn rank(&self, x: &Position) -> Result<usize> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!("position {x} does not have {} piles", self.n)));
        }
        if x.largest() > self.cap {
            return Err(Error::OutOfBox { position: x.to_string(), cap: self.cap });
        }
        Ok(self.rank_slice(x.piles()))
    }

    pub(crate) fn unrank_into(&self, mut r: u64, out: &mut [u32]) {
        for i in (0..self.n).rev() {
            let row = &self.binom[i];
            // largest c with C(c, i + 1) <= r; the row is non-decreasing
            let c = row.partition_point(|&v| v <= r) - 1;
            r -= row[c];
            out[i] = (c - i) as u32;
        }
    }

    pub fn unrank(&self, r: usize) -> Result<Position> {
        if r >= self.len {
            return Err(Error::InvalidInput(format!("rank {r} is outside a box of {} positions", self.len)));
        }
        let mut piles = vec![0; self.n];
        self.unrank_into(r as u64, &mut piles);
        Ok(Position::from_sorted(piles))
    }
}

/// Rank of `x` among all canonical positions with its pile count, in the
/// order produced by [`enumerate_box`].
pub fn rank(x: &Position, cap: u32) -> Result<usize> {
    BoxIndex::new(x.len(), cap)?.rank(x)
}

/// Inverse of [`rank`].
pub fn unrank(n: usize, cap: u32, r: usize) -> Result<Position> {
    BoxIndex::new(n, cap)?.unrank(r)
}

/// Every canonical position with `n` piles and entries at most `cap`, in
/// colexicographic order.
pub fn enumerate_box(n: usize, cap: u32) -> BoxIter {
    BoxIter { cur: if n == 0 { None } else { Some(vec![0; n]) }, cap }
}

pub struct BoxIter {
    cur: Option<Vec<u32>>,
    cap: u32,
}

impl BoxIter {
    fn advance(cur: &mut [u32], cap: u32) -> bool {
        let n = cur.len();
        for i in 0..n {
            let limit = if i + 1 < n { cur[i + 1] } else { cap };
            if cur[i] < limit {
                cur[i] += 1;
                cur[..i].fill(0);
                return true;
            }
        }
        false
    }
}

impl Iterator for BoxIter {
    type Item = Position;

    fn next(&mut self) -> Option<Position> {
        let cur = self.cur.as_mut()?;
        let out = Position::from_sorted(cur.clone());
        if !Self::advance(cur, self.cap) {
            self.cur = None;
        }
        Some(out)
    }
}
