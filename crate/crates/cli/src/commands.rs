use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use slownim::exceptions::{diagnose, is_exception, scan_with};
use slownim::families::{self, coverage_with, verify_family_with, BoxScan, Family, FamilyKind, FamilyReport};
use slownim::mrule::m_move;
use slownim::table::{build_table, write_csv, write_jsonl, DEFAULT_POSITION_LIMIT};
use slownim::{box_size, is_terminal, GameSpec, MemoOracle, Position, Solver, TableSet, Version, Winner};

use crate::args::{BoxArgs, CoverageArgs, ExportArgs, ExportFormat, ScanArgs, SolveArgs, SolveFormat, TableArgs, VerifyArgs};
use crate::cache::Cache;
use crate::{CliError, Io, Status};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    CliError::Usage(msg.into()).into()
}

/// The pile-count spec, with `k` defaulting to `n - 1`.
fn spec_of(n: usize, k: Option<usize>, version: Version) -> Result<GameSpec> {
    if n < 2 {
        return Err(usage(format!("need at least 2 piles, got {n}")));
    }
    GameSpec::new(n, k.unwrap_or(n - 1), version).map_err(|e| usage(e.to_string()))
}

fn keep_one_spec(n: usize, k: Option<usize>, version: Version) -> Result<GameSpec> {
    let spec = spec_of(n, k, version)?;
    if !spec.is_keep_one() {
        return Err(usage("the M-rule and exceptions are defined only for k = n - 1"));
    }
    Ok(spec)
}

/// Rejects boxes above the position budget, suggesting the largest cap that fits.
fn check_budget(n: usize, cap: u32) -> Result<()> {
    let size = box_size(n, cap);
    if size <= DEFAULT_POSITION_LIMIT {
        return Ok(());
    }
    let mut fit = cap;
    while fit > 0 && box_size(n, fit) > DEFAULT_POSITION_LIMIT {
        fit -= 1;
    }
    Err(CliError::Resource(format!(
        "{n} piles up to {cap} is {size} positions, above the limit of {DEFAULT_POSITION_LIMIT}; try --max {fit}"
    ))
    .into())
}

/// Runs `body` against the named file, or against standard output.
fn with_output(path: Option<&Path>, io: &mut Io<'_>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            body(&mut *io.out)?;
            io.out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SolveReport {
    piles: Position,
    version: Version,
    n: usize,
    k: usize,
    remoteness: u16,
    winner: Winner,
    terminal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal_keeps: Option<Vec<usize>>,
    optimal_moves: Vec<OptimalMove>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sg: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_move: Option<MReport>,
}

#[derive(Serialize)]
struct OptimalMove {
    reduced: Vec<usize>,
    successor: Position,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MReport {
    m_keep: usize,
    successor: Position,
    #[serde(rename = "Rprime")]
    r_prime: u16,
    delta: i32,
    exception: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimal: Option<bool>,
    families: Vec<String>,
}

fn solve_one(x: &Position, spec: GameSpec) -> Result<SolveReport> {
    let solver = Solver::new(spec);
    let record = solver.record(x)?;
    let terminal = is_terminal(x, &spec)?;
    let optimal_moves = if terminal {
        Vec::new()
    } else {
        solver
            .optimal_moves(x)?
            .into_iter()
            .map(|(mv, successor)| OptimalMove { reduced: mv.reduced, successor })
            .collect()
    };
    let m_move = if spec.is_keep_one() && !terminal {
        let oracle = MemoOracle::new(spec.version);
        let mv = m_move(x)?;
        let r_prime = solver.remoteness(&mv.successor)?;
        let delta = record.remoteness as i32 - r_prime as i32;
        let exception = is_exception(x, &oracle)?;
        let (minimal, families) = if exception {
            let rec = diagnose(x, &oracle)?;
            let fams = match spec.version {
                Version::Misere => families::membership(x).into_iter().map(str::to_owned).collect(),
                Version::Normal => Vec::new(),
            };
            (Some(rec.minimal), fams)
        } else {
            (None, Vec::new())
        };
        Some(MReport { m_keep: mv.kept_index, successor: mv.successor, r_prime, delta, exception, minimal, families })
    } else {
        None
    };
    Ok(SolveReport {
        piles: x.clone(),
        version: spec.version,
        n: spec.n,
        k: spec.k,
        remoteness: record.remoteness,
        winner: record.winner,
        terminal,
        optimal_keeps: record.optimal_keeps,
        optimal_moves,
        sg: record.sg,
        m_move,
    })
}

fn render_solve(r: &SolveReport, w: &mut dyn Write) -> Result<()> {
    write!(w, "{}: R={} winner={}", r.version.as_str(), r.remoteness, r.winner)?;
    if let Some(sg) = r.sg {
        write!(w, " sg={sg}")?;
    }
    if r.terminal {
        writeln!(w, " (no moves)")?;
        if r.n == r.k + 1 {
            writeln!(w, "  exception=false")?;
        }
        return Ok(());
    }
    writeln!(w)?;
    match &r.optimal_keeps {
        Some(keeps) => writeln!(w, "  optimal keeps: {keeps:?}")?,
        None => {
            let moves: Vec<String> =
                r.optimal_moves.iter().map(|m| format!("reduce {:?} -> {}", m.reduced, m.successor)).collect();
            writeln!(w, "  optimal moves: {}", moves.join("; "))?;
        }
    }
    if let Some(m) = &r.m_move {
        writeln!(w, "  M-move: keep {} -> {} (R'={}, delta={})", m.m_keep, m.successor, m.r_prime, m.delta)?;
        write!(w, "  exception={}", m.exception)?;
        if let Some(minimal) = m.minimal {
            write!(w, " minimal={minimal}")?;
        }
        if !m.families.is_empty() {
            write!(w, " families={}", m.families.join(","))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn solve(a: &SolveArgs, io: &mut Io<'_>) -> Result<Status> {
    let x = &a.piles;
    let versions = match a.version {
        Some(v) => vec![v.into()],
        None => vec![Version::Normal, Version::Misere],
    };
    let specs = versions.into_iter().map(|v| spec_of(x.len(), a.k, v)).collect::<Result<Vec<_>>>()?;
    let reports = specs.into_iter().map(|s| solve_one(x, s)).collect::<Result<Vec<_>>>()?;
    if a.format == SolveFormat::Text {
        let k = reports[0].k;
        writeln!(io.out, "piles {x} (n={}, k={k})", x.len())?;
    }
    for r in &reports {
        match a.format {
            SolveFormat::Text => render_solve(r, io.out)?,
            SolveFormat::Jsonl => writeln!(io.out, "{}", serde_json::to_string(r)?)?,
        }
    }
    Ok(Status::Success)
}

pub fn scan(a: &ScanArgs, io: &mut Io<'_>) -> Result<Status> {
    let BoxArgs { n, k, max } = a.bounds;
    let spec = keep_one_spec(n, k, a.version.into())?;
    check_budget(n, max)?;
    let tables = TableSet::build(spec.version, max, 2..=n)?;
    let records = scan_with(&tables, n, max)?;
    let minimal = records.iter().filter(|r| r.minimal).count();
    let covered = records.iter().filter(|r| !r.family_ids.is_empty()).count();
    with_output(a.out.as_deref(), io, |w| {
        for r in records.iter().filter(|r| r.minimal || !a.minimal_only) {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    })?;
    let summary = format!(
        "scanned {} positions (n={n}, max={max}, {}): {} exceptions, {minimal} minimal, {covered} matched by a family, {} unmatched",
        box_size(n, max),
        spec.version.as_str(),
        records.len(),
        records.len() - covered
    );
    let sink: &mut dyn Write = if a.out.is_some() { &mut *io.out } else { &mut *io.err };
    writeln!(sink, "{summary}")?;
    Ok(Status::Success)
}

pub fn table(a: &TableArgs, cache: &Cache, io: &mut Io<'_>) -> Result<Status> {
    let BoxArgs { n, k, max } = a.bounds;
    let spec = spec_of(n, k, a.version.into())?;
    check_budget(n, max)?;
    let t = build_table(spec, max)?;
    let path = match &a.out {
        Some(p) => {
            slownim::table::save_table_file(&t, p).with_context(|| format!("writing {}", p.display()))?;
            p.clone()
        }
        None => cache.store(&t)?,
    };
    let p_count = t.values().iter().filter(|&&r| r % 2 == 0).count();
    let max_r = t.values().iter().copied().max().unwrap_or(0);
    writeln!(
        io.out,
        "wrote {}: n={n} k={} version={} max={max} positions={} P-positions={p_count} max-remoteness={max_r}",
        path.display(),
        spec.k,
        spec.version.as_str(),
        t.len()
    )?;
    Ok(Status::Success)
}

pub fn export(a: &ExportArgs, cache: &Cache, io: &mut Io<'_>) -> Result<Status> {
    let BoxArgs { n, k, max } = a.bounds;
    let spec = spec_of(n, k, a.version.into())?;
    check_budget(n, max)?;
    let t = match cache.load(&spec, max)? {
        Some(t) => t,
        None => build_table(spec, max)?,
    };
    with_output(a.out.as_deref(), io, |w| {
        match a.format {
            ExportFormat::Jsonl => write_jsonl(&t, w)?,
            ExportFormat::Csv => write_csv(&t, w)?,
        }
        Ok(())
    })?;
    Ok(Status::Success)
}

/// Pile counts and cap a family is verified on when the user gives none.
fn default_box(f: &Family, a: &VerifyArgs) -> (Vec<usize>, u32) {
    let cap = a.max.unwrap_or(match f.kind {
        FamilyKind::Table => f.rows.iter().map(|r| r.shape.last).max().unwrap_or(14),
        FamilyKind::Parametric => 14,
    });
    let ns: Vec<usize> = match (a.n, a.n_max) {
        (Some(n), _) => vec![n],
        (None, Some(m)) => (3..=m).collect(),
        (None, None) => match f.kind {
            FamilyKind::Table => f.rows.iter().map(|r| r.shape.len()).collect::<BTreeSet<_>>().into_iter().collect(),
            FamilyKind::Parametric => (3..=6).collect(),
        },
    };
    (ns, cap)
}

fn summarize(r: &FamilyReport) -> String {
    format!(
        "{} n={} max={}: generated {}, true positives {}, false positives {}, misses {}, remoteness mismatches {}, rows {} checked / {} failed",
        r.family_id,
        r.n,
        r.cap,
        r.generated,
        r.true_positives,
        r.false_positives.len(),
        if r.iff_claimed { r.misses.len().to_string() } else { "n/a".into() },
        r.remoteness_mismatches.len(),
        r.rows_checked,
        r.row_failures.len()
    )
}

pub fn families_verify(a: &VerifyArgs, io: &mut Io<'_>) -> Result<Status> {
    let selected: Vec<&Family> = match &a.id {
        Some(id) => vec![families::family(id).map_err(|_| usage(format!("unknown family id {id}")))?],
        None => families::catalog().iter().filter(|f| f.iff).collect(),
    };
    let mut plan = Vec::new();
    for f in &selected {
        let (ns, cap) = default_box(f, a);
        for &n in &ns {
            if n < 3 {
                return Err(usage(format!("families need at least 3 piles, got {n}")));
            }
            check_budget(n, cap)?;
        }
        plan.push((*f, ns, cap));
    }

    let mut reports = Vec::new();
    for (f, ns, cap) in plan {
        let Some(&n_hi) = ns.iter().max() else { continue };
        let tables = TableSet::build(Version::Misere, cap, 2..=n_hi)?;
        for n in ns {
            let scan = if f.iff { Some(BoxScan::run(&tables, n, cap)?) } else { None };
            reports.push(verify_family_with(f, &tables, n, cap, scan.as_ref())?);
        }
    }

    with_output(a.out.as_deref(), io, |w| {
        for r in &reports {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    })?;
    let mut failed = false;
    for r in &reports {
        writeln!(io.err, "{}", summarize(r))?;
        for fail in &r.row_failures {
            writeln!(io.err, "  row {} at {}: {}", fail.raw, fail.position, fail.reason)?;
        }
        if r.iff_claimed && (!r.false_positives.is_empty() || !r.remoteness_mismatches.is_empty()) {
            failed = true;
        }
        if r.iff_claimed && !r.misses.is_empty() {
            writeln!(io.err, "  warning: {} exceptions in the region are not generated", r.misses.len())?;
        }
    }
    Ok(if failed { Status::VerificationFailed } else { Status::Success })
}

pub fn families_coverage(a: &CoverageArgs, io: &mut Io<'_>) -> Result<Status> {
    let spec = keep_one_spec(a.n, None, a.version.into())?;
    if a.n < 3 {
        return Err(usage("coverage needs at least 3 piles"));
    }
    check_budget(a.n, a.max)?;
    let tables = TableSet::build(spec.version, a.max, 2..=a.n)?;
    let scan = BoxScan::run(&tables, a.n, a.max)?;
    let report = coverage_with(&tables, &scan)?;
    with_output(a.out.as_deref(), io, |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?;
        Ok(())
    })?;
    writeln!(
        io.err,
        "{} exceptions ({} minimal) for n={} max={} {}: {} matched, {} unmatched",
        report.exceptions,
        report.minimal,
        report.n,
        report.cap,
        report.version.as_str(),
        report.covered,
        report.uncovered.len()
    )?;
    if report.uncovered.is_empty() {
        writeln!(io.err, "uncovered: none")?;
    } else {
        let list: Vec<String> = report.uncovered_minimal.iter().map(|p| format!("({p})")).collect();
        writeln!(io.err, "warning: uncovered minimal exceptions: {}", list.join(" "))?;
    }
    for r in &report.iff_reports {
        writeln!(io.err, "{}", summarize(r))?;
    }
    Ok(if report.iff_clean() { Status::Success } else { Status::VerificationFailed })
}
