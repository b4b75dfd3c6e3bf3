//! Every transcribed row, instantiated up to one past its smallest member,
//! must be a misère exception whose remoteness matches both the printed value
//! and the prediction from its second-largest pile.

use std::collections::BTreeMap;

use slownim::exceptions::is_exception;
use slownim::families::{catalog, remoteness_of_core, Row};
use slownim::{Oracle, TableSet, Version};

#[test]
fn every_row_is_a_confirmed_exception() {
    let mut by_len: BTreeMap<usize, Vec<(&str, &Row)>> = BTreeMap::new();
    for f in catalog() {
        for row in &f.rows {
            by_len.entry(row.shape.len()).or_default().push((&f.id, row));
        }
    }
    let mut failures = Vec::new();
    let mut checked = 0;
    for (len, rows) in &by_len {
        let cap = rows.iter().map(|(_, r)| r.shape.last).max().unwrap() + 1;
        let tables = TableSet::build(Version::Misere, cap, 2..=*len).unwrap();
        for (id, row) in rows {
            let upto = if row.shape.open { row.shape.last + 1 } else { row.shape.last };
            for x in row.shape.instances(upto) {
                checked += 1;
                if !is_exception(&x, &tables).unwrap() {
                    failures.push(format!("{id} {x}: not an exception"));
                    continue;
                }
                let r = tables.remoteness(&x).unwrap();
                if row.printed_r.is_some_and(|p| p != r) {
                    failures.push(format!("{id} {x}: printed {:?}, computed {r}", row.printed_r));
                }
                if remoteness_of_core(x.piles()) != r {
                    failures.push(format!("{id} {x}: predicted {}, computed {r}", remoteness_of_core(x.piles())));
                }
            }
        }
    }
    assert!(checked > 600, "only {checked} row instances");
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn cleaned_rows_are_flagged_and_keep_raw_text() {
    let cleaned: Vec<&Row> = catalog().iter().flat_map(|f| &f.rows).filter(|r| r.cleaned).collect();
    assert_eq!(cleaned.len(), 12);
    for row in cleaned {
        assert!(row.raw.starts_with('('));
    }
}
