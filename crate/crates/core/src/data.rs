//! Typed tabular data: column schema, CSV ingestion, missing-value policy.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("column mismatch between CSV header and schema: `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as {expected}")]
    UnparseableCell {
        row: usize,
        column: String,
        value: String,
        expected: String,
    },
    #[error("no usable rows")]
    EmptyTable,
    #[error("column `{0}` has no non-missing values to impute from")]
    EmptyColumn(String),
    #[error("column `{0}` is not categorical")]
    NotCategorical(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Feature,
    Outcome,
}

/// Declared type of one column. `categories` is empty for continuous columns;
/// for categorical/binary columns it lists the distinct labels (order as
/// constructed: lexicographic for loaded columns, interval order for binned
/// ones; [`category_order`] always gives the canonical lexicographic view).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default)]
    pub role: Role,
}

impl ColumnSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Continuous,
            categories: Vec::new(),
            role: Role::Feature,
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories,
            role: Role::Feature,
        }
    }

    pub fn binary(name: impl Into<String>, categories: [String; 2]) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Binary,
            categories: categories.to_vec(),
            role: Role::Feature,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, ColumnKind::Categorical | ColumnKind::Binary)
    }

    fn validate(&self) -> Result<(), DataError> {
        match self.kind {
            ColumnKind::Continuous => {
                if !self.categories.is_empty() {
                    return Err(DataError::InvalidSchema(format!(
                        "continuous column `{}` must not declare categories",
                        self.name
                    )));
                }
            }
            ColumnKind::Categorical | ColumnKind::Binary => {
                let distinct: BTreeSet<&String> = self.categories.iter().collect();
                if distinct.len() != self.categories.len() {
                    return Err(DataError::InvalidSchema(format!(
                        "column `{}` has duplicate category labels",
                        self.name
                    )));
                }
                if self.kind == ColumnKind::Binary && self.categories.len() != 2 {
                    return Err(DataError::InvalidSchema(format!(
                        "binary column `{}` must have exactly 2 categories, got {}",
                        self.name,
                        self.categories.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Canonical category order of a categorical/binary column: labels sorted
/// lexicographically. This is what "first" and "last" mean for the dummy
/// encodings, regardless of the order categories were declared in.
pub fn category_order(col: &ColumnSchema) -> Result<Vec<String>, DataError> {
    if !col.is_categorical() {
        return Err(DataError::NotCategorical(col.name.clone()));
    }
    let mut cats = col.categories.clone();
    cats.sort();
    Ok(cats)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    /// Index into the column's `categories`.
    Category(usize),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

/// What to do with rows that contain missing cells during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Listwise deletion: keep only complete rows.
    #[default]
    DropRows,
    /// Replace missing continuous cells with the column median and missing
    /// categorical cells with the column mode (ties broken by smallest label).
    ImputeCentral,
}

/// Immutable typed table. Row-major cells; every categorical cell indexes a
/// valid category of its column and all columns have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    schema: Vec<ColumnSchema>,
    rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(schema: Vec<ColumnSchema>, rows: Vec<Vec<Cell>>) -> Result<Self, DataError> {
        let mut names = BTreeSet::new();
        let mut outcomes = 0usize;
        for col in &schema {
            col.validate()?;
            if !names.insert(col.name.clone()) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate column name `{}`",
                    col.name
                )));
            }
            if col.role == Role::Outcome {
                outcomes += 1;
            }
        }
        if outcomes > 1 {
            return Err(DataError::InvalidSchema(
                "more than one column has role outcome".into(),
            ));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(DataError::InvalidSchema(format!(
                    "row {} has {} cells, schema has {} columns",
                    r,
                    row.len(),
                    schema.len()
                )));
            }
            for (c, cell) in row.iter().enumerate() {
                match (cell, &schema[c].kind) {
                    (Cell::Number(_), ColumnKind::Continuous) | (Cell::Missing, _) => {}
                    (Cell::Category(i), ColumnKind::Categorical | ColumnKind::Binary) => {
                        if *i >= schema[c].categories.len() {
                            return Err(DataError::InvalidSchema(format!(
                                "row {r} column `{}`: category index {i} out of range",
                                schema[c].name
                            )));
                        }
                    }
                    _ => {
                        return Err(DataError::InvalidSchema(format!(
                            "row {r} column `{}`: cell does not match column kind",
                            schema[c].name
                        )));
                    }
                }
            }
        }
        Ok(DataTable { schema, rows })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.rows[row][col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    /// Index of the outcome column, if one is declared.
    pub fn outcome_index(&self) -> Option<usize> {
        self.schema.iter().position(|c| c.role == Role::Outcome)
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_missing)
    }

    /// Non-missing numeric values of a continuous column, in row order.
    pub fn continuous_values(&self, col: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|row| match row[col] {
                Cell::Number(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// Category index per row for a categorical column; panics on missing.
    pub fn category_indices(&self, col: usize) -> Vec<usize> {
        self.rows
            .iter()
            .map(|row| match row[col] {
                Cell::Category(i) => i,
                _ => panic!("column `{}` has a non-categorical or missing cell", self.schema[col].name),
            })
            .collect()
    }

    /// Replace one column with a categorical column (used by binning).
    pub fn with_categorical_column(
        &self,
        col: usize,
        replacement: ColumnSchema,
        values: Vec<Cell>,
    ) -> Result<DataTable, DataError> {
        if values.len() != self.n_rows() {
            return Err(DataError::InvalidSchema(
                "replacement column length does not match table".into(),
            ));
        }
        let mut schema = self.schema.clone();
        schema[col] = replacement;
        let mut rows = self.rows.clone();
        for (row, v) in rows.iter_mut().zip(values) {
            row[col] = v;
        }
        DataTable::new(schema, rows)
    }
}

#[derive(Debug, Deserialize)]
struct ColumnSpecJson {
    kind: ColumnKind,
    #[serde(default)]
    role: Role,
    #[serde(default)]
    categories: Option<Vec<String>>,
}

/// Parse a schema document: a JSON object mapping column name to
/// `{kind, role?, categories?}`. Column order is taken from the CSV header at
/// load time, so the JSON object order does not matter.
pub fn parse_schema_json(text: &str) -> Result<Vec<ColumnSchema>, DataError> {
    let map: BTreeMap<String, ColumnSpecJson> = serde_json::from_str(text)
        .map_err(|e| DataError::InvalidSchema(format!("schema JSON: {e}")))?;
    if map.is_empty() {
        return Err(DataError::InvalidSchema("schema declares no columns".into()));
    }
    map.into_iter()
        .map(|(name, spec)| {
            let mut categories = spec.categories.unwrap_or_default();
            categories.sort();
            let col = ColumnSchema {
                name,
                kind: spec.kind,
                categories,
                role: spec.role,
            };
            // A binary column without a declared list gets its two categories
            // inferred from the data in load_csv.
            if !(col.kind == ColumnKind::Binary && col.categories.is_empty()) {
                col.validate()?;
            }
            Ok(col)
        })
        .collect()
}

pub fn load_schema_file(path: &Path) -> Result<Vec<ColumnSchema>, DataError> {
    parse_schema_json(&std::fs::read_to_string(path)?)
}

/// Load a CSV file against a declared schema. The header must contain exactly
/// the schema's column names (any order); the resulting column order is the
/// header order. Empty cells are missing; `policy` decides what happens to
/// rows containing them. Ingestion is deterministic.
pub fn load_csv(
    path: &Path,
    schema: &[ColumnSchema],
    policy: MissingPolicy,
) -> Result<DataTable, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    let by_name: BTreeMap<&str, &ColumnSchema> =
        schema.iter().map(|c| (c.name.as_str(), c)).collect();
    if by_name.len() != schema.len() {
        return Err(DataError::InvalidSchema("duplicate column in schema".into()));
    }
    for h in &headers {
        if !by_name.contains_key(h.as_str()) {
            return Err(DataError::UnknownColumn(h.clone()));
        }
    }
    for name in by_name.keys() {
        if !headers.iter().any(|h| h == name) {
            return Err(DataError::UnknownColumn((*name).to_string()));
        }
    }
    let ordered: Vec<ColumnSchema> = headers
        .iter()
        .map(|h| (*by_name[h.as_str()]).clone())
        .collect();

    let mut raw: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        raw.push(record.iter().map(str::to_owned).collect());
    }

    build_table(&ordered, raw, policy)
}

fn build_table(
    ordered: &[ColumnSchema],
    raw: Vec<Vec<String>>,
    policy: MissingPolicy,
) -> Result<DataTable, DataError> {
    let n_cols = ordered.len();

    // Resolve category lists: declared lists are used as-is (sorted), columns
    // without one get the sorted distinct non-missing values seen in the data.
    let mut schema: Vec<ColumnSchema> = Vec::with_capacity(n_cols);
    for (c, col) in ordered.iter().enumerate() {
        let mut col = col.clone();
        if col.is_categorical() && col.categories.is_empty() {
            let mut seen: BTreeSet<String> = BTreeSet::new();
            for row in &raw {
                if !row[c].is_empty() {
                    seen.insert(row[c].clone());
                }
            }
            col.categories = seen.into_iter().collect();
        } else if col.is_categorical() {
            col.categories.sort();
        }
        col.validate()?;
        schema.push(col);
    }

    let mut rows: Vec<Vec<Cell>> = Vec::with_capacity(raw.len());
    for (r, raw_row) in raw.iter().enumerate() {
        if raw_row.len() != n_cols {
            return Err(DataError::InvalidSchema(format!(
                "row {r} has {} fields, expected {n_cols}",
                raw_row.len()
            )));
        }
        let mut row = Vec::with_capacity(n_cols);
        for (c, value) in raw_row.iter().enumerate() {
            let col = &schema[c];
            let cell = if value.is_empty() {
                Cell::Missing
            } else {
                match col.kind {
                    ColumnKind::Continuous => {
                        let v: f64 = value.parse().map_err(|_| DataError::UnparseableCell {
                            row: r,
                            column: col.name.clone(),
                            value: value.clone(),
                            expected: "a number".into(),
                        })?;
                        if !v.is_finite() {
                            return Err(DataError::UnparseableCell {
                                row: r,
                                column: col.name.clone(),
                                value: value.clone(),
                                expected: "a finite number".into(),
                            });
                        }
                        Cell::Number(v)
                    }
                    ColumnKind::Categorical | ColumnKind::Binary => {
                        match col.categories.iter().position(|cat| cat == value) {
                            Some(i) => Cell::Category(i),
                            None => {
                                return Err(DataError::UnparseableCell {
                                    row: r,
                                    column: col.name.clone(),
                                    value: value.clone(),
                                    expected: format!(
                                        "one of the declared categories of `{}`",
                                        col.name
                                    ),
                                })
                            }
                        }
                    }
                }
            };
            row.push(cell);
        }
        rows.push(row);
    }

    let rows = apply_policy(&schema, rows, policy)?;
    if rows.is_empty() {
        return Err(DataError::EmptyTable);
    }
    DataTable::new(schema, rows)
}

fn apply_policy(
    schema: &[ColumnSchema],
    mut rows: Vec<Vec<Cell>>,
    policy: MissingPolicy,
) -> Result<Vec<Vec<Cell>>, DataError> {
    match policy {
        MissingPolicy::DropRows => {
            rows.retain(|row| !row.iter().any(Cell::is_missing));
            Ok(rows)
        }
        MissingPolicy::ImputeCentral => {
            for (c, col) in schema.iter().enumerate() {
                if !rows.iter().any(|row| row[c].is_missing()) {
                    continue;
                }
                let fill = match col.kind {
                    ColumnKind::Continuous => {
                        let mut values: Vec<f64> = rows
                            .iter()
                            .filter_map(|row| match row[c] {
                                Cell::Number(v) => Some(v),
                                _ => None,
                            })
                            .collect();
                        if values.is_empty() {
                            return Err(DataError::EmptyColumn(col.name.clone()));
                        }
                        values.sort_by(f64::total_cmp);
                        let n = values.len();
                        let median = if n % 2 == 1 {
                            values[n / 2]
                        } else {
                            0.5 * (values[n / 2 - 1] + values[n / 2])
                        };
                        Cell::Number(median)
                    }
                    ColumnKind::Categorical | ColumnKind::Binary => {
                        let mut counts = vec![0usize; col.categories.len()];
                        for row in rows.iter() {
                            if let Cell::Category(i) = row[c] {
                                counts[i] += 1;
                            }
                        }
                        let (mode, &max) = counts
                            .iter()
                            .enumerate()
                            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                            .expect("categorical column has categories");
                        if max == 0 {
                            return Err(DataError::EmptyColumn(col.name.clone()));
                        }
                        // max_by keeps the smallest index on ties because later
                        // equal counts compare as smaller via the reversed index.
                        Cell::Category(mode)
                    }
                };
                for row in rows.iter_mut() {
                    if row[c].is_missing() {
                        row[c] = fill;
                    }
                }
            }
            Ok(rows)
        }
    }
}
