//! Positions where the strict M-move is not remoteness-optimal.
//!
//! All functions work on keep-one games of any pile count and take the
//! remoteness values from an [`Oracle`]; pile counts of prefixes and
//! extensions must be answerable by it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::membership;
use crate::game::{keep_successor, legal_keeps, GameSpec, Version};
use crate::mrule::{m_keep, m_move, round_up_even};
use crate::position::Position;
use crate::solver::Oracle;
use crate::table::TableSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionRecord {
    #[serde(rename = "piles")]
    pub position: Position,
    pub version: Version,
    #[serde(rename = "R")]
    pub r: u16,
    #[serde(rename = "Rprime")]
    pub r_prime: u16,
    pub delta: i32,
    /// Representative keep indices of the optimal moves (largest index of
    /// each equal-pile group).
    #[serde(rename = "optimalKeeps")]
    pub optimal_keeps: Vec<usize>,
    #[serde(rename = "mKeep")]
    pub m_keep: usize,
    pub minimal: bool,
    #[serde(rename = "families")]
    pub family_ids: Vec<String>,
}

/// `R(x)`, `R(x')` and the kept index for the strict M-move `x -> x'`.
pub fn m_delta(x: &Position, oracle: &dyn Oracle) -> Result<(u16, u16, usize)> {
    let mv = m_move(x)?;
    Ok((oracle.remoteness(x)?, oracle.remoteness(&mv.successor)?, mv.kept_index))
}

pub fn is_exception(x: &Position, oracle: &dyn Oracle) -> Result<bool> {
    let (r, r_prime, _) = m_delta(x, oracle)?;
    Ok(r as i32 - r_prime as i32 != 1)
}

// Like is_exception, but positions without moves simply are not exceptions.
pub(crate) fn exceptional(x: &Position, oracle: &dyn Oracle) -> Result<bool> {
    if x.len() < 2 || m_keep(x.piles()).is_none() {
        return Ok(false);
    }
    is_exception(x, oracle)
}

/// Every legal keep index `i` (no merging of equal piles) whose move reaches
/// remoteness `R(x) - 1`.
pub fn optimal_keep_indices(x: &Position, oracle: &dyn Oracle) -> Result<Vec<usize>> {
    let r = oracle.remoteness(x)?;
    let mut out = Vec::new();
    for i in 0..x.len() {
        if (0..x.len()).any(|j| j != i && x.piles()[j] == 0) {
            continue;
        }
        let y = Position::from_sorted(keep_successor(x.piles(), i));
        if oracle.remoteness(&y)? + 1 == r {
            out.push(i);
        }
    }
    Ok(out)
}

/// Optimal keeps reported with the largest index of each equal-pile group.
pub fn optimal_keeps(x: &Position, oracle: &dyn Oracle) -> Result<Vec<usize>> {
    let r = oracle.remoteness(x)?;
    let mut out = Vec::new();
    for kept in legal_keeps(x.piles()) {
        let y = Position::from_sorted(keep_successor(x.piles(), kept));
        if oracle.remoteness(&y)? + 1 == r {
            out.push(kept);
        }
    }
    Ok(out)
}

/// Shortest exceptional prefix of `x` (at least three piles), with its last
/// pile then lowered as far as the position stays exceptional.
pub fn minimal_core(x: &Position, oracle: &dyn Oracle) -> Result<Position> {
    if !exceptional(x, oracle)? {
        return Err(Error::NotAnException(x.to_string()));
    }
    let mut core = x.clone();
    for len in 3..x.len() {
        let prefix = x.prefix(len);
        if exceptional(&prefix, oracle)? {
            core = prefix;
            break;
        }
    }
    loop {
        let p = core.piles();
        let n = p.len();
        if n < 2 || p[n - 1] == p[n - 2] {
            break;
        }
        let mut lowered = p.to_vec();
        lowered[n - 1] -= 1;
        let lowered = Position::from_sorted(lowered);
        if !exceptional(&lowered, oracle)? {
            break;
        }
        core = lowered;
    }
    Ok(core)
}

pub fn is_minimal(x: &Position, oracle: &dyn Oracle) -> Result<bool> {
    Ok(minimal_core(x, oracle)? == *x)
}

/// Full diagnostics for an exception; `family_ids` is left empty.
pub fn diagnose(x: &Position, oracle: &dyn Oracle) -> Result<ExceptionRecord> {
    let (r, r_prime, kept) = m_delta(x, oracle)?;
    let delta = r as i32 - r_prime as i32;
    if delta == 1 {
        return Err(Error::NotAnException(x.to_string()));
    }
    Ok(ExceptionRecord {
        position: x.clone(),
        version: oracle.version(),
        r,
        r_prime,
        delta,
        optimal_keeps: optimal_keeps(x, oracle)?,
        m_keep: kept,
        minimal: is_minimal(x, oracle)?,
        family_ids: Vec::new(),
    })
}

/// All exceptions with `tables`' play version, `n` piles and entries at most
/// `cap`, in rank order. `tables` must cover pile counts `3..=n` up to `cap`.
pub fn scan_with(tables: &TableSet, n: usize, cap: u32) -> Result<Vec<ExceptionRecord>> {
    if cap > tables.cap() {
        return Err(Error::InvalidInput(format!("scan cap {cap} exceeds the table cap {}", tables.cap())));
    }
    let table = tables
        .table(n)
        .ok_or_else(|| Error::InvalidInput(format!("no table for {n} piles")))?;
    let index = crate::index::BoxIndex::new(n, cap)?;
    let found: Vec<Option<ExceptionRecord>> = (0..index.len())
        .into_par_iter()
        .map_init(
            || vec![0u32; n],
            |piles, r| -> Result<Option<ExceptionRecord>> {
                index.unrank_into(r as u64, piles);
                let Some(kept) = m_keep(piles) else { return Ok(None) };
                let rx = table.remoteness_slice(piles);
                let next: Vec<u32> =
                    piles.iter().enumerate().map(|(i, &p)| if i == kept { p } else { p - 1 }).collect();
                if rx as i32 - table.remoteness_slice(&next) as i32 == 1 {
                    return Ok(None);
                }
                let mut rec = diagnose(&Position::from_sorted(piles.clone()), tables)?;
                rec.family_ids = membership(&rec.position).into_iter().map(str::to_owned).collect();
                Ok(Some(rec))
            },
        )
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Builds the tables a scan needs and runs it.
pub fn scan_box(spec: GameSpec, cap: u32) -> Result<Vec<ExceptionRecord>> {
    spec.require_keep_one()?;
    let tables = TableSet::build(spec.version, cap, 2..=spec.n)?;
    scan_with(&tables, spec.n, cap)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub description: &'static str,
    pub passed: usize,
    pub violations: Vec<Position>,
}

impl PropertyResult {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub checked: usize,
    pub properties: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(PropertyResult::ok)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

type Check = fn(&ExceptionRecord) -> bool;

const PROPERTIES: [(&str, &str, Check); 7] = [
    ("defining", "R - R' != 1", |rec| rec.delta != 1),
    ("a", "x_n - x_{n-1} = 1", |rec| {
        let p = rec.position.piles();
        p.len() >= 2 && p[p.len() - 1] == p[p.len() - 2] + 1
    }),
    ("b", "R = round_up_even(x_{n-1}) + 1", |rec| {
        let p = rec.position.piles();
        p.len() >= 2 && rec.r as u32 == round_up_even(p[p.len() - 2]) + 1
    }),
    ("c", "R is odd", |rec| rec.r % 2 == 1),
    ("d", "delta in {0, 2}; 0 iff x_{n-1} even", |rec| {
        let p = rec.position.piles();
        let even = p.len() >= 2 && p[p.len() - 2] % 2 == 0;
        (rec.delta == 0 && even) || (rec.delta == 2 && !even)
    }),
    ("e", "optimal keeps x_n if x_{n-1} even, else x_{n-1}; the M-move keeps the other", |rec| {
        let n = rec.position.len();
        if n < 2 {
            return false;
        }
        let even = rec.position.piles()[n - 2] % 2 == 0;
        let (best, m) = if even { (n - 1, n - 2) } else { (n - 2, n - 1) };
        rec.optimal_keeps == [best] && rec.m_keep == m
    }),
    ("f", "optimal moves and the M-move are disjoint", |rec| !rec.optimal_keeps.contains(&rec.m_keep)),
];

/// Audits records (intended: minimal exceptions) against the general
/// properties observed for misère exceptions.
pub fn check_properties(records: &[ExceptionRecord]) -> PropertyReport {
    let properties = PROPERTIES
        .iter()
        .map(|&(name, description, check)| {
            let violations: Vec<Position> =
                records.iter().filter(|r| !check(r)).map(|r| r.position.clone()).collect();
            PropertyResult { name, description, passed: records.len() - violations.len(), violations }
        })
        .collect();
    PropertyReport { checked: records.len(), properties }
}

/// Extensions of `core` by `1..=extensions` appended piles, each at least the
/// previous last pile and at most `cap`, that are not exceptions or whose
/// optimal keep indices among the first `core.len()` piles differ from the
/// core's.
pub fn extension_violations(core: &Position, oracle: &dyn Oracle, extensions: usize, cap: u32) -> Result<Vec<Position>> {
    let n = core.len();
    let core_keeps = optimal_keep_indices(core, oracle)?;
    let mut bad = Vec::new();
    let mut frontier = vec![core.clone()];
    for _ in 0..extensions {
        let mut next = Vec::new();
        for x in &frontier {
            for extra in x.largest()..=cap {
                let y = x.extended(&[extra])?;
                let ok = exceptional(&y, oracle)? && {
                    let keeps: Vec<usize> = optimal_keep_indices(&y, oracle)?.into_iter().filter(|&i| i < n).collect();
                    keeps == core_keeps
                };
                if !ok {
                    bad.push(y.clone());
                }
                next.push(y);
            }
        }
        frontier = next;
    }
    Ok(bad)
}

pub fn verify_monotone_extension(core: &Position, oracle: &dyn Oracle, extensions: usize, cap: u32) -> Result<bool> {
    Ok(extension_violations(core, oracle, extensions, cap)?.is_empty())
}
