//! Tabular input, normalization to `(0, 1]`, skylines and projections.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("table has no rows")]
    EmptyTable,
    #[error("table has no columns")]
    NoColumns,
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column `{0}` has no observed values")]
    AllMissing(String),
    #[error("delta fraction {0} outside (0, 0.1]")]
    BadDelta(f64),
    #[error("value {value} at row {row}, column {col} is outside (0, 1]")]
    ValueOutOfRange { row: usize, col: usize, value: f64 },
    #[error("column {0} has no value equal to 1")]
    ColumnWithoutMax(usize),
    #[error("dimension {index} out of range for {d} attributes")]
    DimensionOutOfRange { index: usize, d: usize },
    #[error("dimension {0} listed twice")]
    DuplicateDimension(usize),
    #[error("empty dimension set")]
    EmptyDimensions,
    #[error("duplicate origin id {0}")]
    DuplicateOrigin(usize),
    #[error("cannot parse `{value}` at row {row}, column {col}")]
    Parse {
        row: usize,
        col: usize,
        value: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Direction {
    fn from_token(tok: &str) -> Option<Direction> {
        match tok.trim().to_ascii_lowercase().as_str() {
            "max" => Some(Direction::HigherBetter),
            "min" => Some(Direction::LowerBetter),
            _ => None,
        }
    }
}

/// Source table before normalization. `None` cells are missing.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    column_names: Vec<String>,
    directions: Vec<Direction>,
    cells: Vec<Vec<Option<f64>>>,
}

impl RawTable {
    pub fn new(
        column_names: Vec<String>,
        directions: Vec<Direction>,
        cells: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, DataError> {
        let d = column_names.len();
        if d == 0 {
            return Err(DataError::NoColumns);
        }
        if cells.is_empty() {
            return Err(DataError::EmptyTable);
        }
        if directions.len() != d {
            return Err(DataError::RaggedRow {
                row: 0,
                expected: d,
                got: directions.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        if let Some((row, r)) = cells.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(DataError::RaggedRow {
                row,
                expected: d,
                got: r.len(),
            });
        }
        Ok(RawTable {
            column_names,
            directions,
            cells,
        })
    }

    /// Reads CSV: a header row of attribute names, an optional row of
    /// `max`/`min` direction tokens, then data rows. Empty cells are missing.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let column_names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let d = column_names.len();
        let mut directions = vec![Direction::HigherBetter; d];
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if i == 0 {
                let tokens: Option<Vec<Direction>> =
                    rec.iter().map(Direction::from_token).collect();
                if let Some(dirs) = tokens {
                    if dirs.len() == d {
                        directions = dirs;
                        continue;
                    }
                }
            }
            let row = rec
                .iter()
                .enumerate()
                .map(|(col, s)| {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        s.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .map(Some)
                            .ok_or_else(|| DataError::Parse {
                                row: cells.len(),
                                col,
                                value: s.to_owned(),
                            })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            cells.push(row);
        }
        RawTable::new(column_names, directions, cells)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, DataError> {
        RawTable::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        &self.cells[i]
    }
}

/// Normalized `n × d` table. Every value lies in `(0, 1]` and every column
/// attains exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    values: Vec<f64>,
    attribute_names: Vec<String>,
    origin_ids: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from already-normalized rows; origin ids are `0..n`.
    pub fn from_rows(rows: Vec<Vec<f64>>, attribute_names: Vec<String>) -> Result<Self, DataError> {
        let origin_ids = (0..rows.len()).collect();
        Dataset::with_origins(rows, attribute_names, origin_ids)
    }

    pub fn with_origins(
        rows: Vec<Vec<f64>>,
        attribute_names: Vec<String>,
        origin_ids: Vec<usize>,
    ) -> Result<Self, DataError> {
        let n = rows.len();
        if n == 0 {
            return Err(DataError::EmptyTable);
        }
        let d = attribute_names.len();
        if d == 0 {
            return Err(DataError::NoColumns);
        }
        let mut values = Vec::with_capacity(n * d);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != d {
                return Err(DataError::RaggedRow {
                    row: i,
                    expected: d,
                    got: r.len(),
                });
            }
            values.extend(r);
        }
        let ds = Dataset {
            n,
            d,
            values,
            attribute_names,
            origin_ids,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<(), DataError> {
        let mut seen = HashSet::new();
        for &id in &self.origin_ids {
            if !seen.insert(id) {
                return Err(DataError::DuplicateOrigin(id));
            }
        }
        let mut has_max = vec![false; self.d];
        for i in 0..self.n {
            for (j, &v) in self.row(i).iter().enumerate() {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(DataError::ValueOutOfRange {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                has_max[j] |= v == 1.0;
            }
        }
        match has_max.iter().position(|m| !m) {
            Some(j) => Err(DataError::ColumnWithoutMax(j)),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn origin_ids(&self) -> &[usize] {
        &self.origin_ids
    }

    pub fn origin_id(&self, i: usize) -> usize {
        self.origin_ids[i]
    }

    /// Row index holding `origin`, if present.
    pub fn position_of(&self, origin: usize) -> Option<usize> {
        self.origin_ids.iter().position(|&o| o == origin)
    }

    /// FNV-1a over the shape and value bits; stable across runs and builds.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(self.n() as u64);
        eat(self.d() as u64);
        for v in &self.values {
            eat(v.to_bits());
        }
        h
    }

    /// Keeps the listed rows in the given order. Only used for row subsets
    /// that keep every column maximum (skylines).
    pub(crate) fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.d);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Dataset {
            n: rows.len(),
            d: self.d,
            values,
            attribute_names: self.attribute_names.clone(),
            origin_ids: rows.iter().map(|&r| self.origin_ids[r]).collect(),
        }
    }

    /// Restricts every row to `dims`, in `dims` order.
    pub fn project(&self, dims: &DimensionSet) -> Result<Dataset, DataError> {
        dims.check(self.d)?;
        let idx = dims.indices();
        let mut values = Vec::with_capacity(self.n * idx.len());
        for row in self.rows() {
            values.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(Dataset {
            n: self.n,
            d: idx.len(),
            values,
            attribute_names: idx
                .iter()
                .map(|&j| self.attribute_names[j].clone())
                .collect(),
            origin_ids: self.origin_ids.clone(),
        })
    }

    /// The five-house table used throughout the documentation and tests.
    pub fn example_houses() -> Dataset {
        let rows = vec![
            vec![0.84, 0.61, 0.93, 0.70, 0.31],
            vec![0.59, 0.95, 0.77, 0.86, 0.79],
            vec![0.69, 0.84, 1.00, 0.99, 0.55],
            vec![1.00, 0.64, 0.68, 0.45, 1.00],
            vec![0.74, 1.00, 0.44, 1.00, 0.73],
        ];
        let names = ["price", "size", "commute", "age", "condition"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Dataset::from_rows(rows, names).expect("example table is normalized")
    }
}

/// Ordered set of distinct column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionSet(Vec<usize>);

impl DimensionSet {
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self, DataError> {
        let set = DimensionSet(indices);
        set.check(d)?;
        Ok(set)
    }

    pub fn all(d: usize) -> Self {
        DimensionSet((0..d).collect())
    }

    pub(crate) fn from_vec_unchecked(indices: Vec<usize>) -> Self {
        DimensionSet(indices)
    }

    fn check(&self, d: usize) -> Result<(), DataError> {
        if self.0.is_empty() {
            return Err(DataError::EmptyDimensions);
        }
        let mut seen = HashSet::new();
        for &i in &self.0 {
            if i >= d {
                return Err(DataError::DimensionOutOfRange { index: i, d });
            }
            if !seen.insert(i) {
                return Err(DataError::DuplicateDimension(i));
            }
        }
        Ok(())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Normalizes a raw table into a [`Dataset`].
///
/// Missing cells take the column's minimum observed raw value. Lower-better
/// columns are mirrored as `max - x`. Each column is then mapped by
/// `(x - lo + δ) / (hi - lo + δ)` with `δ = delta_fraction · (hi - lo)`, so the
/// best value becomes exactly 1 and the worst stays strictly positive.
/// Constant columns become all ones.
pub fn load_table(raw: &RawTable, delta_fraction: f64) -> Result<Dataset, DataError> {
    if !(delta_fraction > 0.0 && delta_fraction <= 0.1) {
        return Err(DataError::BadDelta(delta_fraction));
    }
    let n = raw.rows();
    let d = raw.column_names.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let observed = raw.cells.iter().filter_map(|r| r[j]);
        let (min, max) = observed.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if min > max {
            return Err(DataError::AllMissing(raw.column_names[j].clone()));
        }
        let mut col: Vec<f64> = raw.cells.iter().map(|r| r[j].unwrap_or(min)).collect();
        let (lo, hi) = match raw.directions[j] {
            Direction::HigherBetter => (min, max),
            Direction::LowerBetter => {
                col.iter_mut().for_each(|x| *x = max - *x);
                (0.0, max - min)
            }
        };
        let range = hi - lo;
        if range > 0.0 {
            let delta = delta_fraction * range;
            let denom = range + delta;
            col.iter_mut()
                .for_each(|x| *x = ((*x - lo) + delta) / denom);
        } else {
            col.iter_mut().for_each(|x| *x = 1.0);
        }
        columns.push(col);
    }
    let rows = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Dataset::from_rows(rows, raw.column_names.clone())
}

/// `a` dominates `b`: at least as good everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        strict |= x > y;
    }
    strict
}

fn skyline_of(x: &Dataset, idx: &[usize]) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (x.row(i).iter().sum(), i)).collect();
    // A dominator has a larger sum, or an equal floating-point sum and a
    // lexicographically larger row; either way it is visited first.
    order.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            x.row(b.1)
                .iter()
                .zip(x.row(a.1))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut kept: Vec<usize> = Vec::new();
    for (_, i) in order {
        let p = x.row(i);
        if !kept.iter().any(|&k| dominates(x.row(k), p)) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Row indices of the non-dominated rows, ascending.
pub fn skyline_indices(x: &Dataset, exec: Exec) -> Vec<usize> {
    let all: Vec<usize> = (0..x.n()).collect();
    let threads = match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => rayon::current_num_threads(),
        _ => 1,
    };
    if threads <= 1 || x.n() < 2048 {
        return skyline_of(x, &all);
    }
    let chunk = x.n().div_ceil(threads * 4);
    let chunks: Vec<&[usize]> = all.chunks(chunk).collect();
    let local: Vec<usize> = exec
        .map(&chunks, |c| skyline_of(x, c))
        .into_iter()
        .flatten()
        .collect();
    skyline_of(x, &local)
}

/// Non-dominated rows in their original order.
pub fn skyline(x: &Dataset) -> Dataset {
    x.select_rows(&skyline_indices(x, Exec::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table(cols: Vec<Vec<Option<f64>>>, dirs: Vec<Direction>) -> RawTable {
        let d = cols.len();
        let n = cols[0].len();
        let cells = (0..n)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        let names = (0..d).map(|j| format!("c{j}")).collect();
        RawTable::new(names, dirs, cells).unwrap()
    }

    fn column(ds: &Dataset, j: usize) -> Vec<f64> {
        ds.rows().map(|r| r[j]).collect()
    }

    #[test]
    fn normalizes_with_shifted_min_max() {
        let raw = table(
            vec![vec![Some(10.0), Some(20.0), Some(30.0)]],
            vec![Direction::HigherBetter],
        );
        // range 20, δ = 0.2: (x - 10 + 0.2) / 20.2
        let ds = load_table(&raw, 0.01).unwrap();
        let c = column(&ds, 0);
        assert_abs_diff_eq!(c[0], 0.2 / 20.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 10.2 / 20.2, epsilon = 1e-15);
        assert_eq!(c[2], 1.0);

        // δ = 0.4 reproduces 1/51 and 26/51
        let ds = load_table(&raw, 0.02).unwrap();
        let c = column(&ds, 0);
        assert_abs_diff_eq!(c[0], 1.0 / 51.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 26.0 / 51.0, epsilon = 1e-15);
        assert_eq!(c[2], 1.0);
    }

    #[test]
    fn constant_column_is_all_ones() {
        let raw = table(
            vec![vec![Some(5.0); 3], vec![Some(1.0), Some(2.0), Some(3.0)]],
            vec![Direction::HigherBetter, Direction::HigherBetter],
        );
        let ds = load_table(&raw, 0.01).unwrap();
        assert_eq!(column(&ds, 0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn missing_takes_minimum_before_inversion() {
        let raw = table(
            vec![vec![Some(10.0), None, Some(30.0)]],
            vec![Direction::LowerBetter],
        );
        let ds = load_table(&raw, 0.01).unwrap();
        let c = column(&ds, 0);
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 1.0);
        assert!(c[2] > 0.0 && c[2] < 1.0);
    }

    #[test]
    fn rejects_bad_tables() {
        let raw = table(vec![vec![None, None]], vec![Direction::HigherBetter]);
        assert!(matches!(
            load_table(&raw, 0.01),
            Err(DataError::AllMissing(_))
        ));
        let raw = table(vec![vec![Some(1.0)]], vec![Direction::HigherBetter]);
        assert!(matches!(load_table(&raw, 0.0), Err(DataError::BadDelta(_))));
        assert!(matches!(load_table(&raw, 0.2), Err(DataError::BadDelta(_))));
        assert!(matches!(
            RawTable::new(vec!["a".into()], vec![Direction::HigherBetter], vec![]),
            Err(DataError::EmptyTable)
        ));
        assert!(matches!(
            RawTable::new(
                vec!["a".into(), "a".into()],
                vec![Direction::HigherBetter; 2],
                vec![vec![Some(1.0), Some(1.0)]]
            ),
            Err(DataError::DuplicateColumn(_))
        ));
    }

    #[test]
    fn csv_with_direction_row() {
        let text = "price,size\nmin,max\n300,80\n,120\n250,\n";
        let raw = RawTable::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(
            raw.directions(),
            &[Direction::LowerBetter, Direction::HigherBetter]
        );
        assert_eq!(raw.rows(), 3);
        assert_eq!(raw.row(1), &[None, Some(120.0)]);
        let ds = load_table(&raw, 0.01).unwrap();
        assert_eq!(ds.row(2)[0], 1.0);

        let text = "a,b\n1,2\n3,4\n";
        let raw = RawTable::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(raw.directions(), &[Direction::HigherBetter; 2]);
        assert_eq!(raw.rows(), 2);

        let bad = "a\nfoo\n";
        assert!(matches!(
            RawTable::from_csv_reader(bad.as_bytes()),
            Err(DataError::Parse { .. })
        ));
    }

    #[test]
    fn example_houses_form_a_skyline() {
        let x = Dataset::example_houses();
        assert_eq!(skyline(&x), x);
    }

    #[test]
    fn strict_dominance_removes_point() {
        let x = Dataset::from_rows(
            vec![vec![1.0, 1.0], vec![0.5, 0.5]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let s = skyline(&x);
        assert_eq!(s.n(), 1);
        assert_eq!(s.row(0), &[1.0, 1.0]);
        assert_eq!(s.origin_ids(), &[0]);
    }

    #[test]
    fn duplicates_survive_together() {
        let x = Dataset::from_rows(
            vec![vec![1.0, 0.5], vec![1.0, 0.5], vec![0.2, 1.0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert_eq!(skyline(&x).n(), 3);
    }

    #[test]
    fn projection_keeps_rows_and_order() {
        let x = Dataset::example_houses();
        let dims = DimensionSet::new(vec![0, 1, 3], 5).unwrap();
        let p = x.project(&dims).unwrap();
        assert_eq!(p.row(4), &[0.74, 1.00, 1.00]);
        assert_eq!(p.origin_ids(), x.origin_ids());
        assert_eq!(x.project(&DimensionSet::all(5)).unwrap(), x);

        let sub = DimensionSet::new(vec![2, 0], 3).unwrap();
        let twice = p.project(&sub).unwrap();
        let once = x
            .project(&DimensionSet::new(vec![3, 0], 5).unwrap())
            .unwrap();
        assert_eq!(
            twice.rows().collect::<Vec<_>>(),
            once.rows().collect::<Vec<_>>()
        );

        assert!(matches!(
            x.project(&DimensionSet::from_vec_unchecked(vec![7])),
            Err(DataError::DimensionOutOfRange { index: 7, d: 5 })
        ));
        assert!(DimensionSet::new(vec![1, 1], 5).is_err());
        assert!(DimensionSet::new(vec![], 5).is_err());
    }

    fn brute_skyline(x: &Dataset) -> Vec<usize> {
        (0..x.n())
            .filter(|&i| !(0..x.n()).any(|j| dominates(x.row(j), x.row(i))))
            .collect()
    }

    fn arb_dataset(max_n: usize, max_d: usize) -> impl Strategy<Value = Dataset> {
        (1..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
            // coarse grid values make ties and duplicates common
            proptest::collection::vec(proptest::collection::vec(1u8..=8, d), n).prop_map(
                move |rows| {
                    let mut rows: Vec<Vec<f64>> = rows
                        .into_iter()
                        .map(|r| r.into_iter().map(|v| f64::from(v) / 8.0).collect())
                        .collect();
                    for j in 0..d {
                        let len = rows.len();
                        rows[j % len][j] = 1.0;
                    }
                    let names = (0..d).map(|j| format!("a{j}")).collect();
                    Dataset::from_rows(rows, names).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn skyline_matches_brute_force(x in arb_dataset(120, 5)) {
            let fast = skyline_indices(&x, Exec::Sequential);
            prop_assert_eq!(&fast, &brute_skyline(&x));
            prop_assert_eq!(fast, skyline_indices(&x, Exec::Parallel));
            let s = skyline(&x);
            prop_assert_eq!(skyline(&s), s);
        }

        #[test]
        fn normalization_contract(
            cols in proptest::collection::vec(
                proptest::collection::vec(proptest::option::weighted(0.9, -1e3f64..1e3), 1..40),
                1..5),
            lower in proptest::collection::vec(any::<bool>(), 5),
        ) {
            let n = cols[0].len();
            let mut cols: Vec<Vec<Option<f64>>> =
                cols.into_iter().map(|mut c| { c.resize(n, None); c }).collect();
            for c in &mut cols {
                if c.iter().all(Option::is_none) { c[0] = Some(0.0); }
            }
            let dirs: Vec<Direction> = (0..cols.len())
                .map(|j| if lower[j] { Direction::LowerBetter } else { Direction::HigherBetter })
                .collect();
            let raw = table(cols.clone(), dirs.clone());
            let ds = load_table(&raw, 0.01).unwrap();
            for (j, col) in cols.iter().enumerate() {
                let norm = column(&ds, j);
                prop_assert!(norm.iter().all(|&v| v > 0.0 && v <= 1.0));
                prop_assert!(norm.contains(&1.0));
                for a in 0..n {
                    for b in 0..n {
                        if let (Some(x), Some(y)) = (col[a], col[b]) {
                            if x < y {
                                match dirs[j] {
                                    Direction::HigherBetter => prop_assert!(norm[a] < norm[b]),
                                    Direction::LowerBetter => prop_assert!(norm[a] > norm[b]),
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
