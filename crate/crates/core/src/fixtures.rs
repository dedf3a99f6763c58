//! Published accuracy tables and dataset sizes shipped with the crate.
//!
//! `table5` holds mean accuracies of NB, WNB, CFW, ATFNB and CFW-beta on 50
//! UCI datasets; `table9` the same columns on 15 Flavia leaf groups.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::eval::{load_meta, AccuracyTable, DatasetMeta};

pub const TABLE5_CSV: &str = include_str!("../fixtures/table5.csv");
pub const TABLE9_CSV: &str = include_str!("../fixtures/table9.csv");
pub const UCI_META_CSV: &str = include_str!("../fixtures/uci_meta.csv");
pub const FLAVIA_META_CSV: &str = include_str!("../fixtures/flavia_meta.csv");

pub fn table5() -> Result<AccuracyTable> {
    AccuracyTable::from_csv(TABLE5_CSV.as_bytes())
}

pub fn table9() -> Result<AccuracyTable> {
    AccuracyTable::from_csv(TABLE9_CSV.as_bytes())
}

pub fn uci_meta() -> Result<BTreeMap<String, DatasetMeta>> {
    load_meta(UCI_META_CSV.as_bytes())
}

pub fn flavia_meta() -> Result<BTreeMap<String, DatasetMeta>> {
    load_meta(FLAVIA_META_CSV.as_bytes())
}

/// Resolves a fixture by name (`table5`, `table9`) or returns `None`.
pub fn builtin_table(name: &str) -> Option<Result<AccuracyTable>> {
    match name.trim_end_matches(".csv").to_ascii_lowercase().as_str() {
        "table5" => Some(table5()),
        "table9" => Some(table9()),
        _ => None,
    }
}

pub fn builtin_meta(name: &str) -> Option<Result<BTreeMap<String, DatasetMeta>>> {
    match name.trim_end_matches(".csv").to_ascii_lowercase().as_str() {
        "uci_meta" | "table2" => Some(uci_meta()),
        "flavia_meta" => Some(flavia_meta()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse_completely() {
        let t5 = table5().unwrap();
        assert_eq!(t5.datasets.len(), 50);
        assert_eq!(t5.algorithms, vec!["NB", "WNB", "CFW", "ATFNB", "CFW-beta"]);
        assert!(t5
            .values
            .iter()
            .flatten()
            .all(|v| v.is_some_and(|x| (0.0..=1.0).contains(&x))));
        assert_eq!(table9().unwrap().datasets.len(), 15);
        let meta = uci_meta().unwrap();
        assert_eq!(meta.len(), 50);
        for d in &t5.datasets {
            assert!(meta.contains_key(&d.to_ascii_lowercase()), "{d}");
        }
        assert_eq!(flavia_meta().unwrap().len(), 15);
    }
}
