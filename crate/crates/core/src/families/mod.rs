//! Catalogue of misère exception families.
//!
//! Families are data: the embedded fixture `data/families.toml` lists
//! parametric patterns and transcribed tables, and one generic interpreter
//! generates and matches members for all of them.

mod expr;
mod fixture;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mrule::round_up_even;
use crate::position::Position;

pub use expr::Expr;
pub use fixture::parse_catalog;
pub use verify::{
    coverage_report, coverage_with, verify_family, verify_family_with, BoxScan, CoverageReport, FamilyReport,
    RemotenessMismatch, RowFailure,
};

const EMBEDDED: &str = include_str!("../../data/families.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Parametric,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LenCmp {
    Eq,
    Ge,
}

/// Where a family lives: constraints on the smallest pile and on the length
/// of the minimal exceptional core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub parity: Option<Parity>,
    pub x1_min: Option<u32>,
    pub x1_eq: Option<u32>,
    /// `(modulus, residue)`.
    pub congruence: Option<(u32, u32)>,
    pub core_len: Option<(Expr, LenCmp)>,
}

impl Region {
    pub fn admits_x1(&self, x1: u32) -> bool {
        let parity_ok = match self.parity {
            Some(Parity::Even) => x1.is_multiple_of(2),
            Some(Parity::Odd) => x1 % 2 == 1,
            None => true,
        };
        parity_ok
            && self.x1_min.is_none_or(|m| x1 >= m)
            && self.x1_eq.is_none_or(|e| x1 == e)
            && self.congruence.is_none_or(|(m, r)| x1 % m == r)
    }

    pub fn contains(&self, x1: u32, core_len: usize) -> bool {
        if !self.admits_x1(x1) {
            return false;
        }
        match &self.core_len {
            None => true,
            Some((e, cmp)) => match e.eval(x1 as i64, 0) {
                Ok(want) => match cmp {
                    LenCmp::Eq => core_len as i64 == want,
                    LenCmp::Ge => core_len as i64 >= want,
                },
                Err(_) => false,
            },
        }
    }
}

/// A core: fixed leading piles followed by one last pile that is either
/// exactly `last` or, when `open`, any value at least `last`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CoreShape {
    pub fixed: Vec<u32>,
    pub last: u32,
    pub open: bool,
}

impl CoreShape {
    pub fn len(&self) -> usize {
        self.fixed.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether `piles` starts with an instance of this core.
    pub fn matches(&self, piles: &[u32]) -> bool {
        let k = self.fixed.len();
        piles.len() > k
            && piles[..k] == self.fixed[..]
            && if self.open { piles[k] >= self.last } else { piles[k] == self.last }
    }

    pub fn smallest(&self) -> Position {
        let mut v = self.fixed.clone();
        v.push(self.last);
        Position::from_sorted(v)
    }

    /// Instances with every entry at most `cap`.
    pub fn instances(&self, cap: u32) -> Vec<Position> {
        let hi = if self.open { cap } else { self.last.min(cap) };
        (self.last..=hi)
            .map(|y| {
                let mut v = self.fixed.clone();
                v.push(y);
                Position::from_sorted(v)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub count: Expr,
    pub value: Expr,
}

/// One parametric sub-pattern: `x1` runs over an arithmetic progression and
/// `i` over `0, 1, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub name: String,
    pub x1_start: u32,
    pub x1_step: u32,
    pub x1_end: Option<u32>,
    pub uses_i: bool,
    pub segments: Vec<Segment>,
    pub open: Expr,
}

impl Pattern {
    pub fn admits_x1(&self, x1: u32) -> bool {
        x1 >= self.x1_start
            && (x1 - self.x1_start).is_multiple_of(self.x1_step)
            && self.x1_end.is_none_or(|e| x1 <= e)
    }

    /// The core for parameters `(x1, i)`, or `None` where the pattern is not
    /// defined (a negative repeat count or entry).
    pub fn instantiate(&self, x1: u32, i: u32) -> Result<Option<CoreShape>> {
        let (x1v, iv) = (x1 as i64, i as i64);
        let mut fixed = Vec::new();
        for seg in &self.segments {
            let count = seg.count.eval(x1v, iv)?;
            let value = seg.value.eval(x1v, iv)?;
            if count < 0 || value < 0 {
                return Ok(None);
            }
            fixed.extend(std::iter::repeat_n(value as u32, count as usize));
        }
        let last = self.open.eval(x1v, iv)?;
        if last < 0 {
            return Ok(None);
        }
        let last = last as u32;
        if fixed.first() != Some(&x1) {
            return Err(Error::Fixture(format!("pattern {} does not start with x1 at x1 = {x1}, i = {i}", self.name)));
        }
        if !fixed.windows(2).all(|w| w[0] <= w[1]) || fixed.last().is_some_and(|&l| l > last) {
            return Err(Error::Fixture(format!("pattern {} is unsorted at x1 = {x1}, i = {i}", self.name)));
        }
        Ok(Some(CoreShape { fixed, last, open: true }))
    }

    /// Cores whose entries can all be at most `max_entry`.
    pub fn shapes(&self, max_entry: u32) -> Result<Vec<CoreShape>> {
        let mut out = Vec::new();
        let mut x1 = self.x1_start;
        while x1 <= max_entry && self.x1_end.is_none_or(|e| x1 <= e) {
            for i in 0..=max_entry {
                let Some(shape) = self.instantiate(x1, i)? else { break };
                if shape.last > max_entry {
                    break;
                }
                out.push(shape);
                if !self.uses_i {
                    break;
                }
            }
            x1 += self.x1_step;
        }
        Ok(out)
    }

    /// Length of the core of this pattern that `piles` starts with.
    pub fn match_len(&self, piles: &[u32]) -> Result<Option<usize>> {
        let Some(&x1) = piles.first() else { return Ok(None) };
        if !self.admits_x1(x1) {
            return Ok(None);
        }
        let top = piles.iter().copied().max().unwrap_or(0);
        let i_max = if self.uses_i { top } else { 0 };
        for i in 0..=i_max {
            let Some(shape) = self.instantiate(x1, i)? else { return Ok(None) };
            if shape.fixed.iter().any(|&v| v > top) {
                break;
            }
            if shape.matches(piles) {
                return Ok(Some(shape.len()));
            }
        }
        Ok(None)
    }
}

/// A transcribed row: the printed text plus its parsed reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub x1: u32,
    pub raw: String,
    /// Set when the reading comes from a manual override of `raw`.
    pub cleaned: bool,
    pub shape: CoreShape,
    pub printed_r: Option<u16>,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub id: String,
    pub kind: FamilyKind,
    pub heading: String,
    pub applicability: String,
    pub iff: bool,
    pub iff_group: Option<String>,
    pub region: Region,
    pub patterns: Vec<Pattern>,
    pub rows: Vec<Row>,
}

impl Family {
    /// Cores with every entry at most `max_entry`: pattern instances for
    /// parametric families, rows for tables.
    pub fn shapes(&self, max_entry: u32) -> Vec<CoreShape> {
        match self.kind {
            FamilyKind::Parametric => {
                let mut all: Vec<CoreShape> = self
                    .patterns
                    .iter()
                    .flat_map(|p| p.shapes(max_entry).expect("catalog patterns are validated on load"))
                    .collect();
                all.sort();
                all.dedup();
                all
            }
            FamilyKind::Table => self
                .rows
                .iter()
                .filter(|r| r.shape.last <= max_entry)
                .map(|r| r.shape.clone())
                .collect(),
        }
    }

    /// Length of the shortest core of this family that `x` starts with.
    pub fn match_len(&self, x: &Position) -> Option<usize> {
        let piles = x.piles();
        match self.kind {
            FamilyKind::Parametric => self
                .patterns
                .iter()
                .filter_map(|p| p.match_len(piles).expect("catalog patterns are validated on load"))
                .min(),
            FamilyKind::Table => self.rows.iter().filter(|r| r.shape.matches(piles)).map(|r| r.shape.len()).min(),
        }
    }

    pub fn matches(&self, x: &Position) -> bool {
        self.match_len(x).is_some()
    }

    /// Members with exactly `n` piles and entries at most `cap`, each mapped
    /// to the length of its core. Cores shorter than `n` are extended by
    /// every sorted tail.
    pub fn members_of_length(&self, n: usize, cap: u32) -> BTreeMap<Position, usize> {
        let mut out: BTreeMap<Position, usize> = BTreeMap::new();
        for shape in self.shapes(cap) {
            let c = shape.len();
            if c > n {
                continue;
            }
            for core in shape.instances(cap) {
                let lo = core.largest();
                for tail in (lo..=cap).combinations_with_replacement(n - c) {
                    let x = core.extended(&tail).expect("tails start at the core maximum");
                    out.entry(x).and_modify(|l| *l = (*l).min(c)).or_insert(c);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_entry: u32,
    pub max_extensions: usize,
}

/// Every member with entries at most `max_entry` and up to `max_extensions`
/// piles appended after its core, in position order.
pub fn generate_members(f: &Family, bounds: Bounds) -> Vec<Position> {
    let mut out = BTreeSet::new();
    for shape in f.shapes(bounds.max_entry) {
        for core in shape.instances(bounds.max_entry) {
            for extra in 0..=bounds.max_extensions {
                for tail in (core.largest()..=bounds.max_entry).combinations_with_replacement(extra) {
                    out.insert(core.extended(&tail).expect("tails start at the core maximum"));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// The embedded catalogue.
pub fn catalog() -> &'static [Family] {
    static CATALOG: OnceLock<Vec<Family>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_catalog(EMBEDDED).expect("embedded family fixture is valid"))
}

pub fn family(id: &str) -> Result<&'static Family> {
    catalog()
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::NotInCatalog(format!("unknown family id {id}")))
}

/// Ids of every family `x` belongs to, in catalogue order.
pub fn membership(x: &Position) -> Vec<&'static str> {
    catalog().iter().filter(|f| f.matches(x)).map(|f| f.id.as_str()).collect()
}

/// Length of the shortest catalogue core that `x` starts with.
pub fn core_len(x: &Position) -> Result<usize> {
    catalog()
        .iter()
        .filter_map(|f| f.match_len(x))
        .min()
        .ok_or_else(|| Error::NotInCatalog(x.to_string()))
}

/// Remoteness of a core `c` (or any position starting with it) as predicted
/// from its second-largest entry.
pub fn remoteness_of_core(core: &[u32]) -> u16 {
    (round_up_even(core[core.len() - 2]) + 1) as u16
}

/// Predicted remoteness of the catalogue core that `x` starts with.
pub fn predicted_remoteness(x: &Position) -> Result<u16> {
    let c = core_len(x)?;
    Ok(remoteness_of_core(&x.piles()[..c]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KeepPrediction {
    pub optimal: usize,
    pub m: usize,
}

/// Which of the two largest core piles the optimal move and the M-move keep.
pub fn predicted_keep(x: &Position) -> Result<KeepPrediction> {
    let c = core_len(x)?;
    let (second, last) = (c - 2, c - 1);
    Ok(if x.piles()[second].is_multiple_of(2) {
        KeepPrediction { optimal: last, m: second }
    } else {
        KeepPrediction { optimal: second, m: last }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::pos;

    fn by_len(members: Vec<Position>, n: usize) -> Vec<Position> {
        members.into_iter().filter(|x| x.len() == n).collect()
    }

    #[test]
    fn catalogue_lists_every_family() {
        let ids: Vec<&str> = catalog().iter().map(|f| f.id.as_str()).collect();
        for id in [
            "F_EVEN", "F_ONE", "F_N4", "F_HP2", "F_HP1", "F_H0A", "F_H0B", "T_N5_1", "T_N5_2", "T_N5_3", "T_N5_4",
            "T_N6_1", "T_N6_2", "T_N6_3", "T_N6_4", "T_N6_5", "T_M1_1", "T_M1_2", "T_M2_1", "T_M2_2", "T_M2_3",
            "T_M2_4", "T_M3_1",
        ] {
            assert!(ids.contains(&id), "{id}");
        }
        assert_eq!(ids.len(), 23);
        let parametric = catalog().iter().filter(|f| f.kind == FamilyKind::Parametric).count();
        assert_eq!(parametric, 7);
    }

    #[test]
    fn even_family_members() {
        let f = family("F_EVEN").unwrap();
        let got = by_len(generate_members(f, Bounds { max_entry: 5, max_extensions: 0 }), 4);
        assert_eq!(got, vec![pos(&[2, 2, 2, 3]), pos(&[2, 2, 2, 4]), pos(&[2, 2, 2, 5])]);
        assert!(f.region.admits_x1(4) && !f.region.admits_x1(3));
    }

    #[test]
    fn four_pile_family_smallest_member() {
        let f = family("F_N4").unwrap();
        let got = generate_members(f, Bounds { max_entry: 7, max_extensions: 0 });
        assert_eq!(got, vec![pos(&[5, 5, 6, 7])]);
    }

    #[test]
    fn hp2_smallest_member() {
        let f = family("F_HP2").unwrap();
        let got = by_len(generate_members(f, Bounds { max_entry: 4, max_extensions: 0 }), 4);
        assert_eq!(got, vec![pos(&[3, 3, 3, 4])]);
    }

    #[test]
    fn congruence_regions() {
        let f = family("T_N6_2").unwrap();
        assert!(f.region.admits_x1(11) && f.region.admits_x1(15) && !f.region.admits_x1(13));
        let f = family("T_N6_5").unwrap();
        assert!(f.region.admits_x1(13) && f.region.admits_x1(19) && !f.region.admits_x1(15));
    }

    #[test]
    fn membership_examples() {
        assert!(membership(&pos(&[7, 7, 8, 8, 9])).contains(&"F_HP1"));
        assert!(membership(&pos(&[9, 9, 14, 15])).contains(&"T_M1_1"));
        assert!(membership(&pos(&[1, 1, 1])).is_empty());
        assert_eq!(membership(&pos(&[1, 2, 3, 3])), vec!["F_ONE"]);
        assert!(membership(&pos(&[2, 2, 2, 2])).is_empty());
    }

    #[test]
    fn remoteness_predictions() {
        for (x, r) in [
            (vec![2, 2, 2, 3], 3),
            (vec![5, 5, 7, 8], 9),
            (vec![3, 3, 3, 4], 5),
            (vec![11, 11, 18, 19], 19),
            (vec![1, 3, 4], 5),
            (vec![1, 2, 3, 9], 3),
        ] {
            assert_eq!(predicted_remoteness(&pos(&x)).unwrap(), r, "{x:?}");
        }
        assert!(matches!(predicted_remoteness(&pos(&[1, 1, 1])), Err(Error::NotInCatalog(_))));
    }

    #[test]
    fn keep_predictions() {
        assert_eq!(predicted_keep(&pos(&[2, 2, 2, 3])).unwrap().optimal, 3);
        assert_eq!(predicted_keep(&pos(&[1, 3, 4])).unwrap(), KeepPrediction { optimal: 1, m: 2 });
        assert_eq!(predicted_keep(&pos(&[5, 5, 7, 8])).unwrap().optimal, 2);
        assert!(predicted_keep(&pos(&[0, 0, 0])).is_err());
    }

    #[test]
    fn members_of_length_extend_short_cores() {
        let f = family("F_ONE").unwrap();
        let m = f.members_of_length(4, 4);
        assert_eq!(m.get(&pos(&[1, 1, 2, 2])), Some(&3));
        assert!(m.keys().all(|x| x.len() == 4 && f.matches(x)));
    }

    #[test]
    fn rows_keep_their_raw_text() {
        let f = family("T_N6_2").unwrap();
        let row = f.rows.iter().find(|r| r.cleaned).unwrap();
        assert!(row.raw.contains("16, 16+"));
        assert_eq!(row.shape.smallest(), pos(&[11, 13, 13, 15, 15, 16]));
    }
}
