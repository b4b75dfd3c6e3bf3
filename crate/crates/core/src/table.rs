//! Dense remoteness tables built by retrograde analysis, and their file formats.
//!
//! Every move lowers the pile sum by exactly `k`, so the positions of one sum
//! level depend only on the level `k` below. Levels are processed in
//! increasing order; within a level positions are solved in parallel.

use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{keep_successor, legal_keeps, successors, GameSpec, Version};
use crate::index::{box_size, BoxIndex};
use crate::position::Position;
use crate::solver::{combine_remoteness, mex, terminal_remoteness, Oracle, SolveRecord, Winner};

/// Largest box `build_table` accepts by default.
pub const DEFAULT_POSITION_LIMIT: u128 = 60_000_000;

pub const MAGIC: &[u8; 8] = b"SLOWNIM1";
const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 8 + 2 + 2 + 2 + 1 + 1 + 4 + 8;

#[derive(Clone, Debug)]
pub struct SolveTable {
    spec: GameSpec,
    index: BoxIndex,
    values: Vec<u16>,
}

impl PartialEq for SolveTable {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.cap() == other.cap() && self.values == other.values
    }
}

impl SolveTable {
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn cap(&self) -> u32 {
        self.index.cap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self) -> &BoxIndex {
        &self.index
    }

    /// Remoteness values by rank.
    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn remoteness(&self, x: &Position) -> Result<u16> {
        Ok(self.values[self.index.rank(x)?])
    }

    pub(crate) fn remoteness_slice(&self, piles: &[u32]) -> u16 {
        self.values[self.index.rank_slice(piles)]
    }

    pub fn position(&self, rank: usize) -> Result<Position> {
        self.index.unrank(rank)
    }

    /// Record for `x`; optimal keeps are read from the table itself.
    pub fn record(&self, x: &Position) -> Result<SolveRecord> {
        let remoteness = self.remoteness(x)?;
        let optimal_keeps = if self.spec.is_keep_one() {
            let mut keeps = Vec::new();
            for kept in legal_keeps(x.piles()) {
                if self.remoteness_slice(&keep_successor(x.piles(), kept)) + 1 == remoteness {
                    keeps.push(kept);
                }
            }
            Some(keeps)
        } else {
            None
        };
        Ok(SolveRecord { position: x.clone(), remoteness, winner: Winner::from_remoteness(remoteness), optimal_keeps, sg: None })
    }

    /// Positions of the box with their remoteness, in rank order.
    pub fn iter(&self) -> impl Iterator<Item = (Position, u16)> + '_ {
        crate::index::enumerate_box(self.spec.n, self.cap()).zip(self.values.iter().copied())
    }
}

/// Solves every position of the `(spec.n, cap)` box.
pub fn build_table(spec: GameSpec, cap: u32) -> Result<SolveTable> {
    build_table_with_limit(spec, cap, DEFAULT_POSITION_LIMIT)
}

pub fn build_table_with_limit(spec: GameSpec, cap: u32, limit: u128) -> Result<SolveTable> {
    let base = terminal_remoteness(spec.version);
    let (index, values) = retrograde(spec, cap, limit, base, combine_remoteness)?;
    Ok(SolveTable { spec, index, values })
}

/// Normal-play Sprague-Grundy values for every position of the box, by rank.
pub fn build_sg_table(spec: GameSpec, cap: u32) -> Result<Vec<u16>> {
    if spec.version != Version::Normal {
        return Err(Error::UnsupportedSpec("Sprague-Grundy values are computed for normal play only".into()));
    }
    Ok(retrograde(spec, cap, DEFAULT_POSITION_LIMIT, 0, mex)?.1)
}

fn retrograde(
    spec: GameSpec,
    cap: u32,
    limit: u128,
    base: u16,
    combine: fn(std::vec::IntoIter<u16>) -> u16,
) -> Result<(BoxIndex, Vec<u16>)> {
    let size = box_size(spec.n, cap);
    if size > limit {
        return Err(Error::Resource { positions: size, limit });
    }
    let index = BoxIndex::new(spec.n, cap)?;
    let n = spec.n;

    let levels = sum_levels(&index);
    let mut values = vec![0u16; index.len()];
    for level in levels {
        let solved: Vec<u16> = level
            .par_iter()
            .map_init(
                || (vec![0u32; n], Vec::with_capacity(n + 1)),
                |(piles, vals), &r| {
                    index.unrank_into(r as u64, piles);
                    vals.clear();
                    if spec.is_keep_one() {
                        for kept in legal_keeps(piles) {
                            vals.push(values[index.rank_slice(&keep_successor(piles, kept))]);
                        }
                    } else {
                        let x = Position::from_sorted(piles.clone());
                        for (_, y) in successors(&x, &spec).expect("length matches") {
                            vals.push(values[index.rank_slice(y.piles())]);
                        }
                    }
                    if vals.is_empty() {
                        base
                    } else {
                        combine(std::mem::take(vals).into_iter())
                    }
                },
            )
            .collect();
        for (&r, v) in level.iter().zip(solved) {
            values[r as usize] = v;
        }
    }
    Ok((index, values))
}

// Ranks grouped by pile sum, each group in rank order.
fn sum_levels(index: &BoxIndex) -> Vec<Vec<u32>> {
    let n = index.n();
    let mut levels: Vec<Vec<u32>> = vec![Vec::new(); n * index.cap() as usize + 1];
    let mut piles = vec![0u32; n];
    for r in 0..index.len() {
        if r > 0 {
            // colex successor of the previous vector
            for i in 0..n {
                let limit = if i + 1 < n { piles[i + 1] } else { index.cap() };
                if piles[i] < limit {
                    piles[i] += 1;
                    piles[..i].fill(0);
                    break;
                }
            }
        }
        let s: u32 = piles.iter().sum();
        levels[s as usize].push(r as u32);
    }
    levels
}

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Writes the binary table format: magic, header, values by rank, checksum.
pub fn save_table(t: &SolveTable, dest: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 2 * t.len() + 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(t.spec.n as u16).to_le_bytes());
    buf.extend_from_slice(&(t.spec.k as u16).to_le_bytes());
    buf.push(t.spec.version.tag());
    buf.push(0);
    buf.extend_from_slice(&t.cap().to_le_bytes());
    buf.extend_from_slice(&(t.len() as u64).to_le_bytes());
    for v in &t.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let sum = checksum(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    let mut dest = dest;
    dest.write_all(&buf)?;
    dest.flush()?;
    Ok(())
}

pub fn save_table_file(t: &SolveTable, path: impl AsRef<Path>) -> Result<()> {
    save_table(t, BufWriter::new(std::fs::File::create(path)?))
}

/// Header fields of a table file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TableHeader {
    pub format: u16,
    pub spec: GameSpec,
    pub cap: u32,
    pub count: u64,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptTable(msg.into())
}

pub fn read_header(bytes: &[u8]) -> Result<TableHeader> {
    if bytes.len() < HEADER_LEN {
        return Err(corrupt("file is shorter than the header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let format = u16_at(8);
    if format != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {format}")));
    }
    let n = u16_at(10) as usize;
    let k = u16_at(12) as usize;
    let version = Version::from_tag(bytes[14]).ok_or_else(|| corrupt("unknown play version tag"))?;
    let spec = GameSpec::new(n, k, version).map_err(|e| corrupt(e.to_string()))?;
    let cap = u32::from_le_bytes(bytes[16..20].try_into().expect("4 bytes"));
    let count = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    if box_size(n, cap) != count as u128 {
        return Err(corrupt(format!("count {count} does not match the (n={n}, cap={cap}) box")));
    }
    Ok(TableHeader { format, spec, cap, count })
}

pub fn load_table(mut src: impl Read) -> Result<SolveTable> {
    let mut bytes = Vec::new();
    src.read_to_end(&mut bytes)?;
    let header = read_header(&bytes)?;
    let expected = HEADER_LEN as u64 + 2 * header.count + 8;
    if bytes.len() as u64 != expected {
        return Err(corrupt(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let body_end = bytes.len() - 8;
    let stored = u64::from_le_bytes(bytes[body_end..].try_into().expect("8 bytes"));
    if checksum(&bytes[..body_end]) != stored {
        return Err(corrupt("checksum mismatch"));
    }
    let values = bytes[HEADER_LEN..body_end]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let index = BoxIndex::new(header.spec.n, header.cap)?;
    Ok(SolveTable { spec: header.spec, index, values })
}

/// Loads a table and insists that it was built for `spec` and `cap`.
pub fn load_table_for(src: impl Read, spec: GameSpec, cap: u32) -> Result<SolveTable> {
    let t = load_table(src)?;
    if t.spec != spec || t.cap() != cap {
        return Err(corrupt(format!(
            "table is for ({}, cap={}), expected ({spec}, cap={cap})",
            t.spec,
            t.cap()
        )));
    }
    Ok(t)
}

pub fn load_table_file(path: impl AsRef<Path>) -> Result<SolveTable> {
    load_table(io::BufReader::new(std::fs::File::open(path)?))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    piles: &'a [u32],
    remoteness: u16,
    winner: Winner,
}

/// One JSON object per line: `{"piles":[..],"remoteness":R,"winner":"N|P"}`.
pub fn write_jsonl(t: &SolveTable, out: impl Write) -> Result<()> {
    let mut out = BufWriter::new(out);
    for (x, r) in t.iter() {
        let row = JsonRow { piles: x.piles(), remoteness: r, winner: Winner::from_remoteness(r) };
        serde_json::to_writer(&mut out, &row).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// CSV with one column per pile followed by remoteness and winner.
pub fn write_csv(t: &SolveTable, out: impl Write) -> Result<()> {
    let mut out = BufWriter::new(out);
    let cols: Vec<String> = (1..=t.spec.n).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},remoteness,winner", cols.join(","))?;
    for (x, r) in t.iter() {
        writeln!(out, "{},{},{}", x, r, Winner::from_remoteness(r))?;
    }
    out.flush()?;
    Ok(())
}

/// Dense tables of one play version for a range of pile counts, all with the
/// same cap, answering remoteness queries in the keep-one game.
pub struct TableSet {
    version: Version,
    cap: u32,
    tables: Vec<Option<SolveTable>>,
}

impl TableSet {
    pub fn build(version: Version, cap: u32, pile_counts: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut tables: Vec<Option<SolveTable>> = Vec::new();
        for n in pile_counts {
            let spec = GameSpec::keep_one(n, version)?;
            if tables.len() <= n {
                tables.resize_with(n + 1, || None);
            }
            tables[n] = Some(build_table(spec, cap)?);
        }
        Ok(Self { version, cap, tables })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn table(&self, n: usize) -> Option<&SolveTable> {
        self.tables.get(n).and_then(|t| t.as_ref())
    }

    pub fn pile_counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.iter().enumerate().filter(|(_, t)| t.is_some()).map(|(n, _)| n)
    }
}

impl Oracle for TableSet {
    fn version(&self) -> Version {
        self.version
    }

    fn remoteness(&self, x: &Position) -> Result<u16> {
        match self.table(x.len()) {
            Some(t) => t.remoteness(x),
            None => Err(Error::InvalidInput(format!("no table for {} piles", x.len()))),
        }
    }
}

impl Oracle for SolveTable {
    fn version(&self) -> Version {
        self.spec.version
    }

    fn remoteness(&self, x: &Position) -> Result<u16> {
        SolveTable::remoteness(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::pos;
    use crate::solver::Solver;

    fn spec(n: usize, k: usize, v: Version) -> GameSpec {
        GameSpec::new(n, k, v).unwrap()
    }

    #[test]
    fn small_table() {
        let t = build_table(spec(3, 2, Version::Misere), 3).unwrap();
        assert_eq!(t.len(), 20);
        assert_eq!(t.remoteness(&pos(&[1, 2, 3])).unwrap(), 3);
    }

    #[test]
    fn table_matches_memo_solver_for_general_k() {
        for (n, k) in [(3, 1), (4, 2), (4, 3), (3, 3)] {
            for v in [Version::Normal, Version::Misere] {
                let t = build_table(spec(n, k, v), 6).unwrap();
                let s = Solver::new(spec(n, k, v));
                for (x, r) in t.iter() {
                    assert_eq!(r, s.remoteness(&x).unwrap(), "{x} n={n} k={k} {v}");
                }
            }
        }
    }

    #[test]
    fn sg_table_matches_memo_solver() {
        let sp = spec(4, 2, Version::Normal);
        let sg = build_sg_table(sp, 5).unwrap();
        let s = Solver::new(sp);
        for (r, x) in crate::index::enumerate_box(4, 5).enumerate() {
            assert_eq!(sg[r], s.sg_value(&x).unwrap());
        }
        assert!(build_sg_table(spec(3, 2, Version::Misere), 3).is_err());
    }

    #[test]
    fn oversized_box_is_a_resource_error() {
        let err = build_table_with_limit(spec(6, 5, Version::Misere), 40, 1_000).unwrap_err();
        match err {
            Error::Resource { positions, limit } => {
                assert_eq!(positions, box_size(6, 40));
                assert_eq!(limit, 1_000);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn save_load_round_trip() {
        let t = build_table(spec(3, 2, Version::Normal), 5).unwrap();
        let mut bytes = Vec::new();
        save_table(&t, &mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = load_table(&bytes[..]).unwrap();
        assert_eq!(back, t);
        assert_eq!(load_table_for(&bytes[..], spec(3, 2, Version::Normal), 5).unwrap(), t);
    }

    #[test]
    fn load_rejects_other_spec_truncation_and_bit_flips() {
        let t = build_table(spec(3, 2, Version::Normal), 5).unwrap();
        let mut bytes = Vec::new();
        save_table(&t, &mut bytes).unwrap();

        let other = load_table_for(&bytes[..], spec(3, 2, Version::Misere), 5);
        assert!(matches!(other, Err(Error::CorruptTable(_))));
        let other_cap = load_table_for(&bytes[..], spec(3, 2, Version::Normal), 6);
        assert!(matches!(other_cap, Err(Error::CorruptTable(_))));

        let truncated = load_table(&bytes[..bytes.len() - 3]);
        assert!(matches!(truncated, Err(Error::CorruptTable(_))));
        assert!(matches!(load_table(&bytes[..10]), Err(Error::CorruptTable(_))));

        let mut flipped = bytes.clone();
        flipped[HEADER_LEN + 4] ^= 1;
        assert!(matches!(load_table(&flipped[..]), Err(Error::CorruptTable(_))));

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(load_table(&bad_magic[..]), Err(Error::CorruptTable(_))));
    }

    #[test]
    fn jsonl_and_csv_exports() {
        let t = build_table(spec(3, 2, Version::Misere), 1).unwrap();
        let mut out = Vec::new();
        write_jsonl(&t, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"piles":[0,0,0],"remoteness":1,"winner":"N"}"#);
        assert_eq!(text.lines().count(), 4);

        let mut csv = Vec::new();
        write_csv(&t, &mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "x1,x2,x3,remoteness,winner");
        assert_eq!(csv.lines().last().unwrap(), "1,1,1,2,P");
    }

    #[test]
    fn record_from_table() {
        let t = build_table(spec(4, 3, Version::Misere), 4).unwrap();
        let rec = t.record(&pos(&[2, 2, 2, 3])).unwrap();
        assert_eq!(rec.remoteness, 3);
        assert_eq!(rec.optimal_keeps, Some(vec![3]));
    }
}
