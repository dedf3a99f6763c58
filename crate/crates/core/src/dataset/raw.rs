use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Symbol(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Parses a trimmed text cell for a column of the given kind.
    ///
    /// A numeric column cell that does not parse is kept as a symbol so the
    /// caller can report it; [`RawDataset::new`] rejects such rows.
    pub fn parse(text: &str, kind: ColumnKind, opts: &CsvOptions) -> Cell {
        let text = text.trim();
        if opts.is_missing(text) {
            return Cell::Missing;
        }
        match kind {
            ColumnKind::Numeric => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Cell::Number(v),
                _ => Cell::Symbol(text.to_string()),
            },
            ColumnKind::Categorical => Cell::Symbol(text.to_string()),
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Number(v) => v.to_string(),
            Cell::Symbol(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassColumn {
    Index(usize),
    Name(String),
    Last,
}

impl FromStr for ClassColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("last") {
            return Ok(ClassColumn::Last);
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ClassColumn::Index(i),
            Err(_) => ClassColumn::Name(s.to_string()),
        })
    }
}

impl ClassColumn {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            ClassColumn::Last if !headers.is_empty() => Ok(headers.len() - 1),
            ClassColumn::Last => Err(Error::UnknownClassColumn("last".into())),
            ClassColumn::Index(i) if *i < headers.len() => Ok(*i),
            ClassColumn::Index(i) => Err(Error::UnknownClassColumn(i.to_string())),
            ClassColumn::Name(n) => headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::UnknownClassColumn(n.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub missing_markers: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            missing_markers: vec![String::new(), "?".to_string()],
        }
    }
}

impl CsvOptions {
    pub fn with_missing_marker(mut self, marker: &str) -> Self {
        if !self.missing_markers.iter().any(|m| m == marker) {
            self.missing_markers.push(marker.to_string());
        }
        self
    }

    pub fn is_missing(&self, text: &str) -> bool {
        self.missing_markers.iter().any(|m| m == text)
    }
}

/// Reads a delimited file into a header and trimmed string rows.
pub fn read_table<R: Read>(
    reader: R,
    opts: &CsvOptions,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                got: record.len(),
                expected: headers.len(),
            });
        }
        rows.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok((headers, rows))
}

pub fn read_table_path(path: &Path, opts: &CsvOptions) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_table(file, opts)
}

/// Tabular data before discretization: mixed numeric and categorical cells
/// with a designated class column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
    class_column: usize,
}

impl RawDataset {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<Cell>>, class_column: usize) -> Result<Self> {
        let raw = Self::new_unchecked(columns, rows, class_column)?;
        if raw.class_labels().len() < 2 {
            return Err(Error::TooFewClasses);
        }
        Ok(raw)
    }

    /// Like [`RawDataset::new`] but without the two-class requirement, so
    /// row subsets (split partitions) can hold a single class.
    fn new_unchecked(
        columns: Vec<Column>,
        rows: Vec<Vec<Cell>>,
        class_column: usize,
    ) -> Result<Self> {
        if class_column >= columns.len() {
            return Err(Error::UnknownClassColumn(class_column.to_string()));
        }
        if columns.len() < 2 {
            return Err(Error::NoAttributes);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    got: row.len(),
                    expected: columns.len(),
                });
            }
            match &row[class_column] {
                Cell::Missing => return Err(Error::MissingClassValue(i + 1)),
                Cell::Number(_) => {
                    return Err(Error::OutOfRange(format!(
                        "class cell at row {} must be a symbol",
                        i + 1
                    )))
                }
                Cell::Symbol(_) => {}
            }
            for (col, cell) in columns.iter().zip(row) {
                if col.kind == ColumnKind::Numeric {
                    if let Cell::Symbol(s) = cell {
                        return Err(Error::OutOfRange(format!(
                            "non-numeric value `{s}` in numeric column `{}`",
                            col.name
                        )));
                    }
                }
            }
        }
        Ok(Self {
            columns,
            rows,
            class_column,
        })
    }

    /// Builds a dataset from string cells, inferring each column's kind.
    pub fn from_strings(
        headers: Vec<String>,
        rows: Vec<Vec<String>>,
        class: &ClassColumn,
        opts: &CsvOptions,
    ) -> Result<Self> {
        let class_column = class.resolve(&headers)?;
        let columns: Vec<Column> = headers
            .into_iter()
            .enumerate()
            .map(|(j, name)| {
                let numeric = j != class_column
                    && rows
                        .iter()
                        .map(|r| r[j].as_str())
                        .filter(|c| !opts.is_missing(c))
                        .all(|c| c.parse::<f64>().is_ok_and(f64::is_finite));
                let kind = if numeric {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                };
                Column { name, kind }
            })
            .collect();
        let cells = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&columns)
                    .map(|(c, col)| Cell::parse(c, col.kind, opts))
                    .collect()
            })
            .collect();
        Self::new(columns, cells, class_column)
    }

    pub fn from_reader<R: Read>(reader: R, class: &ClassColumn, opts: &CsvOptions) -> Result<Self> {
        let (headers, rows) = read_table(reader, opts)?;
        Self::from_strings(headers, rows, class, opts)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn class_column(&self) -> usize {
        self.class_column
    }

    pub fn class_name(&self) -> &str {
        &self.columns[self.class_column].name
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Indices of the non-class columns, in file order.
    pub fn attribute_columns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(move |&j| j != self.class_column)
    }

    pub fn label(&self, row: usize) -> &str {
        match &self.rows[row][self.class_column] {
            Cell::Symbol(s) => s,
            _ => unreachable!("class cells are validated symbols"),
        }
    }

    /// Distinct class labels in canonical (sorted) order.
    pub fn class_labels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = (0..self.rows.len()).map(|i| self.label(i)).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_missing)
    }

    /// Row subset with the same columns.
    pub fn select(&self, rows: &[usize]) -> RawDataset {
        RawDataset {
            columns: self.columns.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            class_column: self.class_column,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }
}

pub fn load_csv(path: &Path, class: &ClassColumn, opts: &CsvOptions) -> Result<RawDataset> {
    let (headers, rows) = read_table_path(path, opts)?;
    RawDataset::from_strings(headers, rows, class, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FillValue {
    Number(f64),
    Symbol(String),
}

/// Replacement values for missing attribute cells, fitted on one dataset and
/// applicable to others with the same columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    /// One entry per non-class column, in file order.
    pub fills: Vec<(String, FillValue)>,
}

impl Imputer {
    /// Column mean for numeric attributes, mode for categorical ones.
    pub fn fit(raw: &RawDataset) -> Result<Self> {
        let mut fills = Vec::new();
        for j in raw.attribute_columns() {
            let col = &raw.columns[j];
            let fill = match col.kind {
                ColumnKind::Numeric => {
                    let (sum, n) = raw
                        .rows
                        .iter()
                        .filter_map(|r| match r[j] {
                            Cell::Number(v) => Some(v),
                            _ => None,
                        })
                        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    if n == 0 {
                        return Err(Error::AllMissing(col.name.clone()));
                    }
                    FillValue::Number(sum / n as f64)
                }
                ColumnKind::Categorical => {
                    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                    for r in &raw.rows {
                        if let Cell::Symbol(s) = &r[j] {
                            *counts.entry(s).or_default() += 1;
                        }
                    }
                    // ties go to the smallest symbol: BTreeMap iterates sorted
                    // and max_by_key keeps the last maximum, so reverse first
                    let mode = counts
                        .iter()
                        .rev()
                        .max_by_key(|(_, &c)| c)
                        .map(|(s, _)| s.to_string())
                        .ok_or_else(|| Error::AllMissing(col.name.clone()))?;
                    FillValue::Symbol(mode)
                }
            };
            fills.push((col.name.clone(), fill));
        }
        Ok(Self { fills })
    }

    pub fn apply(&self, raw: &RawDataset) -> Result<RawDataset> {
        let attrs: Vec<usize> = raw.attribute_columns().collect();
        if attrs.len() != self.fills.len() {
            return Err(Error::ArityMismatch {
                got: attrs.len(),
                expected: self.fills.len(),
            });
        }
        let mut out = raw.clone();
        for row in &mut out.rows {
            let mut attr_cells: Vec<Cell> = attrs.iter().map(|&j| row[j].clone()).collect();
            self.apply_row(&mut attr_cells);
            for (&j, cell) in attrs.iter().zip(attr_cells) {
                row[j] = cell;
            }
        }
        Ok(out)
    }

    /// Fills missing cells of an attribute-only row (class column removed).
    pub fn apply_row(&self, cells: &mut [Cell]) {
        for (cell, (_, fill)) in cells.iter_mut().zip(&self.fills) {
            if cell.is_missing() {
                *cell = match fill {
                    FillValue::Number(v) => Cell::Number(*v),
                    FillValue::Symbol(s) => Cell::Symbol(s.clone()),
                };
            }
        }
    }
}

/// Mean imputation for numeric columns, mode imputation for categorical ones.
pub fn impute_missing(raw: &RawDataset) -> Result<RawDataset> {
    Imputer::fit(raw)?.apply(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RawDataset> {
        RawDataset::from_reader(text.as_bytes(), &ClassColumn::Last, &CsvOptions::default())
    }

    #[test]
    fn loads_four_rows_with_last_class_column() {
        let raw = parse("a,b,label\n1,x,p\n2,y,q\n3,x,p\n4,y,q\n").unwrap();
        assert_eq!(raw.n_rows(), 4);
        assert_eq!(raw.class_column(), 2);
        assert_eq!(raw.columns()[0].kind, ColumnKind::Numeric);
        assert_eq!(raw.columns()[1].kind, ColumnKind::Categorical);
        assert_eq!(raw.class_labels(), vec!["p", "q"]);
    }

    #[test]
    fn question_mark_is_missing() {
        let raw = parse("a,label\n1,p\n?,q\n3,p\n").unwrap();
        assert_eq!(raw.rows()[1][0], Cell::Missing);
        assert_eq!(raw.columns()[0].kind, ColumnKind::Numeric);
    }

    #[test]
    fn custom_marker() {
        let opts = CsvOptions::default().with_missing_marker("NA");
        let raw =
            RawDataset::from_reader("a,label\nNA,p\n2,q\n".as_bytes(), &ClassColumn::Last, &opts)
                .unwrap();
        assert!(raw.rows()[0][0].is_missing());
    }

    #[test]
    fn single_class_is_rejected() {
        let err = parse("a,label\n1,p\n2,p\n").unwrap_err();
        assert!(matches!(err, Error::TooFewClasses));
        assert_eq!(err.to_string(), "fewer than 2 classes");
    }

    #[test]
    fn ragged_and_missing_class_errors() {
        assert!(matches!(
            parse("a,label\n1,p,9\n2,q\n"),
            Err(Error::RaggedRow { .. })
        ));
        assert!(matches!(
            parse("a,label\n1,\n2,q\n3,p\n"),
            Err(Error::MissingClassValue(1))
        ));
        let err = RawDataset::from_reader(
            "a,label\n1,p\n2,q\n".as_bytes(),
            &ClassColumn::Name("nope".into()),
            &CsvOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownClassColumn(_)));
    }

    #[test]
    fn unreadable_file() {
        let err = load_csv(
            Path::new("/definitely/not/here.csv"),
            &ClassColumn::Last,
            &CsvOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn class_column_parsing() {
        assert_eq!("last".parse::<ClassColumn>().unwrap(), ClassColumn::Last);
        assert_eq!("2".parse::<ClassColumn>().unwrap(), ClassColumn::Index(2));
        assert_eq!(
            "label".parse::<ClassColumn>().unwrap(),
            ClassColumn::Name("label".into())
        );
    }

    #[test]
    fn numeric_mean_imputation() {
        let raw = parse("a,label\n1,p\n?,q\n3,p\n").unwrap();
        let out = impute_missing(&raw).unwrap();
        let col: Vec<Cell> = out.rows().iter().map(|r| r[0].clone()).collect();
        assert_eq!(
            col,
            vec![Cell::Number(1.0), Cell::Number(2.0), Cell::Number(3.0)]
        );
    }

    #[test]
    fn categorical_mode_imputation() {
        let raw = parse("a,label\na,p\na,q\n?,p\nb,q\n").unwrap();
        let out = impute_missing(&raw).unwrap();
        let col: Vec<Cell> = out.rows().iter().map(|r| r[0].clone()).collect();
        let sym = |s: &str| Cell::Symbol(s.into());
        assert_eq!(col, vec![sym("a"), sym("a"), sym("a"), sym("b")]);
    }

    #[test]
    fn mode_tie_prefers_smallest_symbol() {
        let raw = parse("a,label\nz,p\nb,q\n?,p\n").unwrap();
        let out = impute_missing(&raw).unwrap();
        assert_eq!(out.rows()[2][0], Cell::Symbol("b".into()));
    }

    #[test]
    fn imputation_without_missing_is_identity() {
        let raw = parse("a,b,label\n1,x,p\n2,y,q\n").unwrap();
        assert_eq!(impute_missing(&raw).unwrap(), raw);
    }

    #[test]
    fn imputation_is_idempotent() {
        let raw = parse("a,b,label\n1,x,p\n?,?,q\n4,y,q\n?,y,p\n").unwrap();
        let once = impute_missing(&raw).unwrap();
        assert!(!once.has_missing());
        assert_eq!(impute_missing(&once).unwrap(), once);
    }

    #[test]
    fn all_missing_column_errors() {
        let raw = parse("a,label\n?,p\n?,q\n").unwrap();
        assert!(matches!(impute_missing(&raw), Err(Error::AllMissing(_))));
    }
}
