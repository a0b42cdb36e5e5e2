//! Data tables: `dm x s` grids of outcome probabilities.
//!
//! Rows come in `m` consecutive blocks of `d`, one block per measurement
//! (measurement 0 first); columns are preparations. A table is *valid* when
//! every entry lies in `[0, 1]`, every block of every column sums to exactly
//! one, and rows that share a projector label are identical.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rational::Rational;

/// Tables with more entries than this are refused by generators.
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataTable {
    d: usize,
    m: usize,
    s: usize,
    entries: RatMatrix,
    row_labels: Option<Vec<String>>,
    prep_labels: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Entry outside `[0, 1]`.
    Range,
    /// A measurement block of a column does not sum to one.
    ColumnSum,
    /// Two rows share a projector label but differ.
    LabelRowMismatch,
    /// `M * P` differs from the table at this entry.
    ProductMismatch,
}

/// Which matrix a violation was found in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table,
    Measurement,
    Preparation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub target: Target,
    /// Measurement block, when the violation is tied to one.
    pub block: Option<usize>,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }
}

impl DataTable {
    /// Wraps a `dm x s` matrix. Only the shape is checked here; use
    /// [`DataTable::validate`] for the probabilistic invariants.
    pub fn new(d: usize, m: usize, s: usize, entries: RatMatrix) -> Result<Self> {
        if d < 2 {
            return Err(Error::structural(format!("d must be at least 2, got {d}")));
        }
        if m < 1 {
            return Err(Error::structural("m must be at least 1"));
        }
        if entries.rows() != d * m || entries.cols() != s {
            return Err(Error::structural(format!(
                "declared d={d}, m={m}, s={s} needs a {}x{s} grid, got {}x{}",
                d * m,
                entries.rows(),
                entries.cols()
            )));
        }
        Ok(DataTable {
            d,
            m,
            s,
            entries,
            row_labels: None,
            prep_labels: None,
        })
    }

    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.d * self.m {
            return Err(Error::structural(format!(
                "row_labels has {} entries, expected {}",
                labels.len(),
                self.d * self.m
            )));
        }
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn with_prep_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.s {
            return Err(Error::structural(format!(
                "prep_labels has {} entries, expected {}",
                labels.len(),
                self.s
            )));
        }
        self.prep_labels = Some(labels);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of rows, `d * m`.
    pub fn rows(&self) -> usize {
        self.d * self.m
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.entries
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn prep_labels(&self) -> Option<&[String]> {
        self.prep_labels.as_deref()
    }

    /// `D^{(x)}_{i,k}` with zero-based indices.
    pub fn entry(&self, x: usize, i: usize, k: usize) -> &Rational {
        self.entries.get(x * self.d + i, k)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let (d, m, s) = (self.d, self.m, self.s);
        for r in 0..d * m {
            for k in 0..s {
                if !self.entries.get(r, k).in_unit_interval() {
                    violations.push(Violation {
                        kind: ViolationKind::Range,
                        target: Target::Table,
                        block: Some(r / d),
                        row: Some(r),
                        column: Some(k),
                    });
                }
            }
        }
        for x in 0..m {
            for k in 0..s {
                let sum: Rational = (0..d).map(|i| self.entry(x, i, k)).sum();
                if !sum.is_one() {
                    violations.push(Violation {
                        kind: ViolationKind::ColumnSum,
                        target: Target::Table,
                        block: Some(x),
                        row: None,
                        column: Some(k),
                    });
                }
            }
        }
        if let Some(labels) = &self.row_labels {
            let mut first_row: HashMap<&str, usize> = HashMap::new();
            for (r, label) in labels.iter().enumerate() {
                match first_row.get(label.as_str()) {
                    Some(&r0) if self.entries.row(r0) != self.entries.row(r) => {
                        violations.push(Violation {
                            kind: ViolationKind::LabelRowMismatch,
                            target: Target::Table,
                            block: Some(r / d),
                            row: Some(r),
                            column: None,
                        });
                    }
                    Some(_) => {}
                    None => {
                        first_row.insert(label, r);
                    }
                }
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Returns `Err(InvalidTable)` unless the table validates.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.valid {
            Ok(())
        } else {
            let first = &report.violations[0];
            Err(Error::InvalidTable(format!(
                "{} violation(s), first: {:?} at block {:?}, row {:?}, column {:?}",
                report.violations.len(),
                first.kind,
                first.block,
                first.row,
                first.column
            )))
        }
    }

    /// Exact rank of the stacked `dm x s` matrix over the rationals.
    pub fn rank(&self) -> usize {
        self.entries.rank()
    }

    /// Lower bound on the ontic-state count from fully deterministic columns.
    ///
    /// Every column whose entries are all 0 or 1 fixes one outcome per
    /// measurement; distinct outcome patterns need distinct ontic states.
    /// Returns 1 if no column is deterministic (and `s >= 1`), 0 if `s == 0`.
    pub fn pattern_lower_bound(&self) -> usize {
        if self.s == 0 {
            return 0;
        }
        let mut patterns: HashSet<Vec<usize>> = HashSet::new();
        for k in 0..self.s {
            if !(0..self.rows()).all(|r| self.entries.get(r, k).is_binary()) {
                continue;
            }
            let pattern: Option<Vec<usize>> = (0..self.m)
                .map(|x| (0..self.d).find(|&i| self.entry(x, i, k).is_one()))
                .collect();
            if let Some(p) = pattern {
                patterns.insert(p);
            }
        }
        patterns.len().max(1)
    }

    /// Groups of row indices that represent the same projector: rows sharing
    /// a label when labels are present, otherwise exactly equal rows. Only
    /// groups with two or more rows are returned, ordered by first row.
    pub fn duplicate_row_groups(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        match &self.row_labels {
            Some(labels) => {
                let mut index: HashMap<&str, usize> = HashMap::new();
                for (r, label) in labels.iter().enumerate() {
                    let g = *index.entry(label.as_str()).or_insert_with(|| {
                        groups.push(Vec::new());
                        groups.len() - 1
                    });
                    groups[g].push(r);
                }
            }
            None => {
                let mut index: HashMap<&[Rational], usize> = HashMap::new();
                for r in 0..self.rows() {
                    let g = *index.entry(self.entries.row(r)).or_insert_with(|| {
                        groups.push(Vec::new());
                        groups.len() - 1
                    });
                    groups[g].push(r);
                }
            }
        }
        groups.retain(|g| g.len() > 1);
        groups
    }
}

/// The `d = 2`, `s = 2^m` table whose first-outcome rows enumerate every
/// `m`-bit string, columns in lexicographic order (measurement 0 is the most
/// significant bit).
pub fn binary_worst_case_table(m: usize) -> Result<DataTable> {
    if m == 0 {
        return Err(Error::structural("m must be at least 1"));
    }
    let s = 1usize
        .checked_shl(m as u32)
        .filter(|&s| s.checked_mul(2 * m).is_some_and(|n| n <= MAX_TABLE_ENTRIES))
        .ok_or_else(|| {
            Error::Resource(format!(
                "binary worst-case table for m={m} exceeds {MAX_TABLE_ENTRIES} entries"
            ))
        })?;
    let mut entries = RatMatrix::zeros(2 * m, s);
    for k in 0..s {
        for x in 0..m {
            let bit = (k >> (m - 1 - x)) & 1;
            entries.set(2 * x, k, Rational::from_integer(bit as i64));
            entries.set(2 * x + 1, k, Rational::from_integer(1 - bit as i64));
        }
    }
    let labels = (0..s).map(|k| format!("{k:0m$b}")).collect();
    DataTable::new(2, m, s, entries)?.with_prep_labels(labels)
}

/// Seeded random valid table. Each block of each column is a random
/// composition `n_i / q` with `q` drawn from `1..=denominator_bound`.
pub fn random_table(
    d: usize,
    m: usize,
    s: usize,
    seed: u64,
    denominator_bound: u64,
) -> Result<DataTable> {
    if denominator_bound == 0 {
        return Err(Error::structural("denominator bound must be at least 1"));
    }
    if d.saturating_mul(m).saturating_mul(s) > MAX_TABLE_ENTRIES {
        return Err(Error::Resource(format!(
            "random table with d={d}, m={m}, s={s} exceeds {MAX_TABLE_ENTRIES} entries"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = RatMatrix::zeros(d * m, s);
    for k in 0..s {
        for x in 0..m {
            let q = rng.gen_range(1..=denominator_bound);
            let mut cuts: Vec<u64> = (0..d.saturating_sub(1))
                .map(|_| rng.gen_range(0..=q))
                .collect();
            cuts.sort_unstable();
            let mut prev = 0;
            for i in 0..d {
                let next = if i + 1 < d { cuts[i] } else { q };
                entries.set(x * d + i, k, Rational::new((next - prev) as i64, q as i64));
                prev = next;
            }
        }
    }
    DataTable::new(d, m, s, entries)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    d: usize,
    m: usize,
    s: usize,
    entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prep_labels: Option<Vec<String>>,
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::parse(
        format!("line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

pub(crate) fn parse_grid(
    name: &str,
    grid: Vec<Vec<String>>,
    rows: usize,
    cols: usize,
) -> Result<RatMatrix> {
    if grid.len() != rows {
        return Err(Error::parse(
            name,
            format!("expected {rows} rows, found {}", grid.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (r, row) in grid.into_iter().enumerate() {
        if row.len() != cols {
            return Err(Error::parse(
                format!("{name}[{r}]"),
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
        for (c, tok) in row.into_iter().enumerate() {
            let v = tok
                .parse::<Rational>()
                .map_err(|e| Error::parse(format!("{name}[{r}][{c}]"), e.to_string()))?;
            data.push(v);
        }
    }
    RatMatrix::from_vec(rows, cols, data)
}

pub(crate) fn grid_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(ToString::to_string).collect())
        .collect()
}

/// Reads a table from its JSON document.
pub fn parse_table(bytes: &[u8]) -> Result<DataTable> {
    let doc: TableDoc = serde_json::from_slice(bytes).map_err(json_error)?;
    if doc.d < 2 || doc.m < 1 {
        return Err(Error::parse(
            "d/m",
            format!("need d >= 2 and m >= 1, got d={} m={}", doc.d, doc.m),
        ));
    }
    let entries = parse_grid("entries", doc.entries, doc.d * doc.m, doc.s)?;
    let mut table = DataTable::new(doc.d, doc.m, doc.s, entries)?;
    if let Some(labels) = doc.row_labels {
        table = table
            .with_row_labels(labels)
            .map_err(|e| Error::parse("row_labels", e.to_string()))?;
    }
    if let Some(labels) = doc.prep_labels {
        table = table
            .with_prep_labels(labels)
            .map_err(|e| Error::parse("prep_labels", e.to_string()))?;
    }
    Ok(table)
}

/// Writes a table as pretty-printed JSON with rationals in lowest terms.
pub fn serialize_table(table: &DataTable) -> String {
    let doc = TableDoc {
        d: table.d,
        m: table.m,
        s: table.s,
        entries: grid_strings(&table.entries),
        row_labels: table.row_labels.clone(),
        prep_labels: table.prep_labels.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("table document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model2_example() -> DataTable {
        let m = RatMatrix::from_ints(&[&[0, 4], &[2, 2], &[4, 0], &[2, 3], &[2, 3], &[2, 0]], 6);
        DataTable::new(3, 2, 2, m).unwrap()
    }

    #[test]
    fn model2_example_is_valid() {
        assert!(model2_example().validate().valid);
    }

    #[test]
    fn column_sum_violation() {
        let m = RatMatrix::from_ints(&[&[5], &[4]], 10);
        let t = DataTable::new(2, 1, 1, m).unwrap();
        let rep = t.validate();
        assert!(!rep.valid);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ViolationKind::ColumnSum);
        assert_eq!(rep.violations[0].column, Some(0));
    }

    #[test]
    fn range_violation() {
        let m = RatMatrix::from_ints(&[&[-1], &[5]], 4);
        let t = DataTable::new(2, 1, 1, m).unwrap();
        let rep = t.validate();
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::Range && v.row == Some(0)));
        assert!(!rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::ColumnSum));
    }

    #[test]
    fn label_mismatch_detected() {
        let m = RatMatrix::from_ints(&[&[1], &[0], &[0], &[1]], 1);
        let t = DataTable::new(2, 2, 1, m)
            .unwrap()
            .with_row_labels(vec!["a".into(), "b".into(), "a".into(), "c".into()])
            .unwrap();
        let rep = t.validate();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].kind, ViolationKind::LabelRowMismatch);
        assert_eq!(rep.violations[0].row, Some(2));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let m = RatMatrix::zeros(5, 2);
        assert!(matches!(
            DataTable::new(3, 2, 2, m),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            DataTable::new(1, 2, 2, RatMatrix::zeros(2, 2)),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn identity_table_rank() {
        for d in 2..6 {
            let t = DataTable::new(d, 1, d, RatMatrix::identity(d)).unwrap();
            assert_eq!(t.rank(), d);
        }
    }

    #[test]
    fn pattern_bounds() {
        assert_eq!(model2_example().pattern_lower_bound(), 1);
        let m = RatMatrix::from_ints(&[&[1, 1], &[0, 0], &[0, 0], &[1, 1]], 1);
        let t = DataTable::new(2, 2, 2, m).unwrap();
        assert_eq!(t.pattern_lower_bound(), 1);
        let empty = DataTable::new(2, 1, 0, RatMatrix::zeros(2, 0)).unwrap();
        assert_eq!(empty.pattern_lower_bound(), 0);
    }

    #[test]
    fn binary_tables() {
        let t1 = binary_worst_case_table(1).unwrap();
        assert_eq!(t1.matrix(), &RatMatrix::from_ints(&[&[0, 1], &[1, 0]], 1));
        let t3 = binary_worst_case_table(3).unwrap();
        let first_rows: Vec<Vec<i64>> = (0..3)
            .map(|x| {
                (0..8)
                    .map(|k| if t3.entry(x, 0, k).is_one() { 1 } else { 0 })
                    .collect()
            })
            .collect();
        assert_eq!(
            first_rows,
            vec![
                vec![0, 0, 0, 0, 1, 1, 1, 1],
                vec![0, 0, 1, 1, 0, 0, 1, 1],
                vec![0, 1, 0, 1, 0, 1, 0, 1],
            ]
        );
        assert_eq!(t3.pattern_lower_bound(), 8);
        assert_eq!(binary_worst_case_table(2).unwrap().pattern_lower_bound(), 4);
        assert!(matches!(
            binary_worst_case_table(40),
            Err(Error::Resource(_))
        ));
        assert!(binary_worst_case_table(0).is_err());
    }

    #[test]
    fn random_tables_are_valid() {
        for seed in 0..50 {
            let t = random_table(3, 3, 4, seed, 12).unwrap();
            assert!(t.validate().valid);
        }
        assert_eq!(
            random_table(2, 2, 2, 9, 5).unwrap(),
            random_table(2, 2, 2, 9, 5).unwrap()
        );
    }

    #[test]
    fn json_parse_normalizes_and_reports_location() {
        let doc = r#"{"d":2,"m":1,"s":2,"entries":[["4/6","1"],["1/3","0"]]}"#;
        let t = parse_table(doc.as_bytes()).unwrap();
        assert_eq!(t.entry(0, 0, 0), &Rational::new(2, 3));
        assert!(t.validate().valid);

        let bad = r#"{"d":2,"m":1,"s":1,"entries":[["1/2"],["0.5"]]}"#;
        match parse_table(bad.as_bytes()) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "entries[1][0]"),
            other => panic!("unexpected {other:?}"),
        }
        let short = r#"{"d":2,"m":1,"s":1,"entries":[["1"]]}"#;
        assert!(matches!(
            parse_table(short.as_bytes()),
            Err(Error::Parse { .. })
        ));
        let float = r#"{"d":2,"m":1,"s":1,"entries":[[0.5],[0.5]]}"#;
        assert!(matches!(
            parse_table(float.as_bytes()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_table(b"{nope"), Err(Error::Parse { .. })));
    }

    #[test]
    fn serialize_uses_lowest_terms() {
        let t = model2_example();
        let json = serialize_table(&t);
        assert!(json.contains("\"2/3\""));
        assert!(!json.contains("4/6"));
        assert_eq!(parse_table(json.as_bytes()).unwrap(), t);
    }
}
