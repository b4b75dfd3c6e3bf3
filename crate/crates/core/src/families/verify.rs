//! Checking families against brute-force remoteness tables.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{catalog, remoteness_of_core, Family, FamilyKind};
use crate::error::{Error, Result};
use crate::exceptions::{exceptional, minimal_core, scan_with, ExceptionRecord};
use crate::game::Version;
use crate::position::Position;
use crate::solver::Oracle;
use crate::table::TableSet;

/// All exceptions of one box together with the lengths of their minimal
/// cores, shared by the checks of several families.
pub struct BoxScan {
    pub n: usize,
    pub cap: u32,
    pub version: Version,
    pub records: Vec<ExceptionRecord>,
    pub core_lens: Vec<usize>,
}

impl BoxScan {
    pub fn run(tables: &TableSet, n: usize, cap: u32) -> Result<Self> {
        let records = scan_with(tables, n, cap)?;
        let core_lens = records
            .par_iter()
            .map(|r| minimal_core(&r.position, tables).map(|c| c.len()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, cap, version: tables.version(), records, core_lens })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RemotenessMismatch {
    pub position: Position,
    pub core: Position,
    pub predicted: u16,
    pub actual: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RowFailure {
    pub raw: String,
    pub position: Position,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyReport {
    pub family_id: String,
    pub version: Version,
    pub n: usize,
    pub cap: u32,
    pub iff_claimed: bool,
    /// Members with `n` piles in the box; equals `true_positives` plus the
    /// number of false positives.
    pub generated: usize,
    pub true_positives: usize,
    pub false_positives: Vec<Position>,
    /// Oracle exceptions in the family's region that no family of its
    /// iff group generates. Only filled for iff-claimed families.
    pub misses: Vec<Position>,
    pub remoteness_mismatches: Vec<RemotenessMismatch>,
    /// Row instances with `n` piles that were compared to the oracle.
    pub rows_checked: usize,
    pub row_failures: Vec<RowFailure>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.false_positives.is_empty()
            && self.misses.is_empty()
            && self.remoteness_mismatches.is_empty()
            && self.row_failures.is_empty()
    }
}

fn iff_partners(f: &Family) -> Vec<&'static Family> {
    catalog()
        .iter()
        .filter(|g| g.id == f.id || (f.iff_group.is_some() && g.iff_group == f.iff_group))
        .collect()
}

/// Checks the members of `f` with `n` piles and entries at most `cap`
/// against `tables`, which must cover pile counts `2..=n`. Misses of
/// iff-claimed families are collected from `scan`, a scan of the same box;
/// without it they are not computed.
pub fn verify_family_with(
    f: &Family,
    tables: &TableSet,
    n: usize,
    cap: u32,
    scan: Option<&BoxScan>,
) -> Result<FamilyReport> {
    if cap > tables.cap() || tables.table(n).is_none() {
        return Err(Error::InvalidInput(format!("tables do not cover {n} piles up to {cap}")));
    }
    if let Some(s) = scan {
        if (s.n, s.cap) != (n, cap) {
            return Err(Error::InvalidInput("scan box differs from the verification box".into()));
        }
    }
    let members = f.members_of_length(n, cap);
    let checked: Vec<(bool, Option<RemotenessMismatch>)> = members
        .par_iter()
        .map(|(x, &c)| -> Result<_> {
            if !exceptional(x, tables)? {
                return Ok((false, None));
            }
            let core = x.prefix(c);
            let predicted = remoteness_of_core(core.piles());
            let actual = tables.remoteness(&core)?;
            let mismatch = (predicted != actual).then(|| RemotenessMismatch {
                position: x.clone(),
                core,
                predicted,
                actual,
            });
            Ok((true, mismatch))
        })
        .collect::<Result<_>>()?;

    let mut report = FamilyReport {
        family_id: f.id.clone(),
        version: tables.version(),
        n,
        cap,
        iff_claimed: f.iff,
        generated: members.len(),
        true_positives: 0,
        false_positives: Vec::new(),
        misses: Vec::new(),
        remoteness_mismatches: Vec::new(),
        rows_checked: 0,
        row_failures: Vec::new(),
    };
    for ((x, _), (hit, mismatch)) in members.iter().zip(checked) {
        if hit {
            report.true_positives += 1;
        } else {
            report.false_positives.push(x.clone());
        }
        report.remoteness_mismatches.extend(mismatch);
    }

    if let Some(scan) = scan.filter(|_| f.iff) {
        let partners = iff_partners(f);
        for (rec, &c) in scan.records.iter().zip(&scan.core_lens) {
            let x = &rec.position;
            if f.region.contains(x.smallest(), c) && !partners.iter().any(|g| g.matches(x)) {
                report.misses.push(x.clone());
            }
        }
    }

    check_rows(f, tables, n, cap, &mut report)?;
    Ok(report)
}

fn check_rows(f: &Family, tables: &TableSet, n: usize, cap: u32, report: &mut FamilyReport) -> Result<()> {
    for row in f.rows.iter().filter(|r| r.shape.len() == n) {
        for x in row.shape.instances(cap) {
            report.rows_checked += 1;
            let fail = |reason: String| RowFailure { raw: row.raw.clone(), position: x.clone(), reason };
            if f.kind == FamilyKind::Parametric && !f.matches(&x) {
                report.row_failures.push(fail("not generated by the family pattern".into()));
                continue;
            }
            if !exceptional(&x, tables)? {
                report.row_failures.push(fail("not an exception".into()));
                continue;
            }
            let actual = tables.remoteness(&x)?;
            if let Some(printed) = row.printed_r {
                if printed != actual {
                    report.row_failures.push(fail(format!("printed remoteness {printed}, computed {actual}")));
                }
            }
            let predicted = remoteness_of_core(x.piles());
            if predicted != actual {
                report.row_failures.push(fail(format!("predicted remoteness {predicted}, computed {actual}")));
            }
        }
    }
    Ok(())
}

/// Builds misère tables for `2..=n` piles up to `cap` and checks `f`,
/// scanning the box for misses when `f` is iff-claimed.
pub fn verify_family(f: &Family, n: usize, cap: u32) -> Result<FamilyReport> {
    let tables = TableSet::build(Version::Misere, cap, 2..=n)?;
    let scan = if f.iff { Some(BoxScan::run(&tables, n, cap)?) } else { None };
    verify_family_with(f, &tables, n, cap, scan.as_ref())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageReport {
    pub version: Version,
    pub n: usize,
    pub cap: u32,
    pub exceptions: usize,
    pub minimal: usize,
    pub covered: usize,
    /// Number of found exceptions matched by each family.
    pub matched: BTreeMap<String, usize>,
    pub uncovered: Vec<Position>,
    pub uncovered_minimal: Vec<Position>,
    /// Families matched by no exception of this box.
    pub never_instantiated: Vec<String>,
    /// Checks of the iff-claimed families; empty for normal play, where the
    /// catalogue does not apply.
    pub iff_reports: Vec<FamilyReport>,
}

impl CoverageReport {
    /// The acceptance bar: no false positives and no remoteness mismatches
    /// in iff-claimed families. Coverage gaps do not count.
    pub fn iff_clean(&self) -> bool {
        self.iff_reports.iter().all(|r| r.false_positives.is_empty() && r.remoteness_mismatches.is_empty())
    }
}

pub fn coverage_with(tables: &TableSet, scan: &BoxScan) -> Result<CoverageReport> {
    let mut matched: BTreeMap<String, usize> = catalog().iter().map(|f| (f.id.clone(), 0)).collect();
    let mut report = CoverageReport {
        version: scan.version,
        n: scan.n,
        cap: scan.cap,
        exceptions: scan.records.len(),
        minimal: scan.records.iter().filter(|r| r.minimal).count(),
        covered: 0,
        matched: BTreeMap::new(),
        uncovered: Vec::new(),
        uncovered_minimal: Vec::new(),
        never_instantiated: Vec::new(),
        iff_reports: Vec::new(),
    };
    for rec in &scan.records {
        if rec.family_ids.is_empty() {
            report.uncovered.push(rec.position.clone());
            if rec.minimal {
                report.uncovered_minimal.push(rec.position.clone());
            }
        } else {
            report.covered += 1;
        }
        for id in &rec.family_ids {
            *matched.get_mut(id).ok_or_else(|| Error::NotInCatalog(id.clone()))? += 1;
        }
    }
    report.never_instantiated = matched.iter().filter(|(_, &c)| c == 0).map(|(id, _)| id.clone()).collect();
    report.matched = matched;
    if scan.version == Version::Misere {
        report.iff_reports = catalog()
            .par_iter()
            .filter(|f| f.iff)
            .map(|f| verify_family_with(f, tables, scan.n, scan.cap, Some(scan)))
            .collect::<Result<_>>()?;
    }
    Ok(report)
}

/// Scans the box of `n` piles up to `cap` and reports how the catalogue
/// covers the exceptions found.
pub fn coverage_report(version: Version, n: usize, cap: u32) -> Result<CoverageReport> {
    let tables = TableSet::build(version, cap, 2..=n)?;
    let scan = BoxScan::run(&tables, n, cap)?;
    coverage_with(&tables, &scan)
}
