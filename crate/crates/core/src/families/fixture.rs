//! Loading the TOML family fixture.

use std::collections::HashSet;

use serde::Deserialize;

use super::{CoreShape, Expr, Family, FamilyKind, LenCmp, Parity, Pattern, Region, Row, Segment};
use crate::error::{Error, Result};

const FORMAT: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEntry {
    format: u32,
    family: Vec<FamilyEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyEntry {
    id: String,
    kind: KindEntry,
    heading: String,
    applicability: String,
    iff: bool,
    #[serde(default)]
    iff_group: Option<String>,
    region: RegionEntry,
    #[serde(default)]
    pattern: Vec<PatternEntry>,
    #[serde(default)]
    rows: Vec<RowEntry>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum KindEntry {
    Parametric,
    Table,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionEntry {
    #[serde(default)]
    parity: Option<String>,
    #[serde(default)]
    x1_min: Option<u32>,
    #[serde(default)]
    x1_eq: Option<u32>,
    #[serde(default)]
    modulus: Option<u32>,
    #[serde(default)]
    residue: Option<u32>,
    #[serde(default)]
    core_len: Option<String>,
    #[serde(default)]
    core_len_cmp: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternEntry {
    name: String,
    x1: DomainEntry,
    #[serde(default)]
    uses_i: bool,
    segments: Vec<SegmentEntry>,
    open: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainEntry {
    start: u32,
    step: u32,
    #[serde(default)]
    end: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentEntry {
    count: String,
    value: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowEntry {
    x1: u32,
    raw: String,
    #[serde(default)]
    cleaned: Option<String>,
    #[serde(default)]
    r: Option<u16>,
}

fn bad(id: &str, what: impl std::fmt::Display) -> Error {
    Error::Fixture(format!("family {id}: {what}"))
}

/// Parses a family fixture document.
pub fn parse_catalog(src: &str) -> Result<Vec<Family>> {
    let file: FileEntry = toml::from_str(src).map_err(|e| Error::Fixture(e.to_string()))?;
    if file.format != FORMAT {
        return Err(Error::Fixture(format!("unsupported fixture format {}", file.format)));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(file.family.len());
    for entry in file.family {
        if !seen.insert(entry.id.clone()) {
            return Err(bad(&entry.id, "duplicate id"));
        }
        out.push(build_family(entry)?);
    }
    Ok(out)
}

fn build_family(e: FamilyEntry) -> Result<Family> {
    let id = e.id;
    let kind = match e.kind {
        KindEntry::Parametric => FamilyKind::Parametric,
        KindEntry::Table => FamilyKind::Table,
    };
    match kind {
        FamilyKind::Parametric if e.pattern.is_empty() => return Err(bad(&id, "parametric family without patterns")),
        FamilyKind::Table if e.rows.is_empty() => return Err(bad(&id, "table family without rows")),
        FamilyKind::Table if !e.pattern.is_empty() => return Err(bad(&id, "table family with patterns")),
        _ => {}
    }
    let region = build_region(&id, e.region)?;
    let patterns = e.pattern.into_iter().map(|p| build_pattern(&id, p)).collect::<Result<Vec<_>>>()?;
    let rows = e.rows.into_iter().map(|r| build_row(&id, r)).collect::<Result<Vec<_>>>()?;
    let family = Family {
        id,
        kind,
        heading: e.heading,
        applicability: e.applicability,
        iff: e.iff,
        iff_group: e.iff_group,
        region,
        patterns,
        rows,
    };
    for row in &family.rows {
        if !family.region.admits_x1(row.x1) {
            return Err(bad(&family.id, format!("row {} lies outside the family's x1 range", row.raw)));
        }
        if kind == FamilyKind::Parametric && !family.matches(&row.shape.smallest()) {
            return Err(bad(&family.id, format!("row {} does not fit the family pattern", row.raw)));
        }
    }
    Ok(family)
}

fn build_region(id: &str, r: RegionEntry) -> Result<Region> {
    let parity = match r.parity.as_deref() {
        None => None,
        Some("even") => Some(Parity::Even),
        Some("odd") => Some(Parity::Odd),
        Some(other) => return Err(bad(id, format!("unknown parity {other}"))),
    };
    let congruence = match (r.modulus, r.residue) {
        (None, None) => None,
        (Some(m), Some(res)) if m > 0 && res < m => Some((m, res)),
        _ => return Err(bad(id, "modulus and residue must be given together with residue < modulus")),
    };
    let cmp = match r.core_len_cmp.as_deref() {
        None | Some("eq") => LenCmp::Eq,
        Some("ge") => LenCmp::Ge,
        Some(other) => return Err(bad(id, format!("unknown comparison {other}"))),
    };
    let core_len = r.core_len.as_deref().map(Expr::parse).transpose()?.map(|e| (e, cmp));
    if core_len.as_ref().is_some_and(|(e, _)| e.uses_i()) {
        return Err(bad(id, "core length may only depend on x1"));
    }
    Ok(Region { parity, x1_min: r.x1_min, x1_eq: r.x1_eq, congruence, core_len })
}

fn build_pattern(id: &str, p: PatternEntry) -> Result<Pattern> {
    if p.x1.step == 0 {
        return Err(bad(id, format!("pattern {} has step 0", p.name)));
    }
    let segments = p
        .segments
        .iter()
        .map(|s| Ok(Segment { count: Expr::parse(&s.count)?, value: Expr::parse(&s.value)? }))
        .collect::<Result<Vec<_>>>()?;
    let open = Expr::parse(&p.open)?;
    let mentions_i = open.uses_i() || segments.iter().any(|s| s.count.uses_i() || s.value.uses_i());
    if mentions_i != p.uses_i {
        return Err(bad(id, format!("pattern {}: uses_i does not agree with its expressions", p.name)));
    }
    let pattern = Pattern {
        name: p.name,
        x1_start: p.x1.start,
        x1_step: p.x1.step,
        x1_end: p.x1.end,
        uses_i: p.uses_i,
        segments,
        open,
    };
    // Evaluate a few instances so that broken expressions fail at load time.
    pattern.shapes(pattern.x1_start + 12 * pattern.x1_step)?;
    Ok(pattern)
}

/// Reads a printed row such as `(5,\;5,\;\;6,\;\;7+)`. Thin-space macros
/// and whitespace are ignored; any other markup must be resolved through an
/// explicit override.
pub(crate) fn parse_row_text(text: &str) -> Option<CoreShape> {
    let plain: String = text.replace("\\,", "").replace("\\;", "").chars().filter(|c| !c.is_whitespace()).collect();
    let inner = plain.strip_prefix('(')?.strip_suffix(')')?;
    let mut entries: Vec<&str> = inner.split(',').collect();
    let last = entries.pop()?;
    let (last, open) = match last.strip_suffix('+') {
        Some(v) => (v, true),
        None => (last, false),
    };
    let fixed = entries.iter().map(|v| v.parse::<u32>().ok()).collect::<Option<Vec<_>>>()?;
    let last = last.parse::<u32>().ok()?;
    if fixed.is_empty() || !fixed.windows(2).all(|w| w[0] <= w[1]) || fixed.last().is_some_and(|&l| l > last) {
        return None;
    }
    Some(CoreShape { fixed, last, open })
}

fn build_row(id: &str, r: RowEntry) -> Result<Row> {
    let (shape, cleaned) = match &r.cleaned {
        Some(text) => {
            let shape = parse_row_text(text).ok_or_else(|| bad(id, format!("unreadable override {text}")))?;
            (shape, true)
        }
        None => {
            let shape = parse_row_text(&r.raw)
                .ok_or_else(|| bad(id, format!("row {} needs a cleaned override", r.raw)))?;
            (shape, false)
        }
    };
    if shape.fixed[0] != r.x1 {
        return Err(bad(id, format!("row {} is listed under x1 = {}", r.raw, r.x1)));
    }
    if r.r.is_some_and(|v| v % 2 == 0) {
        return Err(bad(id, format!("row {} carries an even remoteness", r.raw)));
    }
    Ok(Row { x1: r.x1, raw: r.raw, cleaned, shape, printed_r: r.r })
}
