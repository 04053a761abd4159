//! Dummy encoding of typed tables into numeric design matrices, with full
//! per-column provenance. `DropFirst` and `DropLast` are the two working
//! encodings; `Full` keeps every category and exists to demonstrate the
//! dummy-variable trap (the columns of a feature sum to a constant, so the
//! covariance matrix is singular).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{category_order, Cell, ColumnKind, DataTable, Role};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("row {row}, column `{column}`: missing value (apply a missing-value policy first)")]
    MissingData { row: usize, column: String },
    #[error("outcome column `{column}` unusable: {reason}")]
    OutcomeInvalid { column: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingStrategy {
    DropFirst,
    DropLast,
    Full,
}

/// Sentinel category label for pass-through continuous columns.
pub const CONTINUOUS_CATEGORY: &str = "__continuous__";

/// Where a matrix column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnProvenance {
    pub source_feature: String,
    /// Category label the column indicates, or [`CONTINUOUS_CATEGORY`].
    pub category: String,
    pub strategy: EncodingStrategy,
    #[serde(default)]
    pub is_outcome: bool,
}

impl ColumnProvenance {
    /// Graph node name: `Feature=Category` for indicators, the bare feature
    /// name for continuous columns and for the (single-column) outcome.
    pub fn node_name(&self) -> String {
        if self.is_outcome || self.category == CONTINUOUS_CATEGORY {
            self.source_feature.clone()
        } else {
            format!("{}={}", self.source_feature, self.category)
        }
    }
}

/// Numeric design matrix (column-major) plus provenance. Dummy columns take
/// values in {0,1}; a k-category feature contributes k−1 columns under the
/// drop encodings and k under `Full`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    columns: Vec<Vec<f64>>,
    provenance: Vec<ColumnProvenance>,
    outcome_col: Option<usize>,
    n_rows: usize,
    /// Declared categories with zero occurrences, dropped from the encoding.
    dropped_empty: Vec<(String, String)>,
}

impl EncodedMatrix {
    pub fn from_parts(
        columns: Vec<Vec<f64>>,
        provenance: Vec<ColumnProvenance>,
        outcome_col: Option<usize>,
        n_rows: usize,
    ) -> Self {
        assert_eq!(columns.len(), provenance.len());
        assert!(columns.iter().all(|c| c.len() == n_rows));
        EncodedMatrix {
            columns,
            provenance,
            outcome_col,
            n_rows,
            dropped_empty: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn provenance(&self) -> &[ColumnProvenance] {
        &self.provenance
    }

    pub fn outcome_col(&self) -> Option<usize> {
        self.outcome_col
    }

    pub fn dropped_empty(&self) -> &[(String, String)] {
        &self.dropped_empty
    }

    pub fn node_names(&self) -> Vec<String> {
        self.provenance.iter().map(ColumnProvenance::node_name).collect()
    }
}

/// Encode a table. Categorical columns expand to 0/1 dummies over their
/// *observed* categories in lexicographic order, minus the first (`DropFirst`)
/// or last (`DropLast`); continuous columns pass through unchanged. The
/// outcome is always a single 0/1 column indicating its lexicographically
/// last category, whatever the strategy. Column order is schema order, then
/// category order.
pub fn encode(table: &DataTable, strategy: EncodingStrategy) -> Result<EncodedMatrix, EncodeError> {
    let n = table.n_rows();
    for r in 0..n {
        for c in 0..table.n_cols() {
            if table.cell(r, c).is_missing() {
                return Err(EncodeError::MissingData {
                    row: r,
                    column: table.schema()[c].name.clone(),
                });
            }
        }
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut provenance: Vec<ColumnProvenance> = Vec::new();
    let mut outcome_col = None;
    let mut dropped_empty = Vec::new();

    for (c, col) in table.schema().iter().enumerate() {
        if col.role == Role::Outcome {
            let (column, positive) = encode_outcome(table, c)?;
            outcome_col = Some(columns.len());
            columns.push(column);
            provenance.push(ColumnProvenance {
                source_feature: col.name.clone(),
                category: positive,
                strategy,
                is_outcome: true,
            });
            continue;
        }
        match col.kind {
            ColumnKind::Continuous => {
                let column: Vec<f64> = (0..n)
                    .map(|r| match table.cell(r, c) {
                        Cell::Number(v) => v,
                        _ => unreachable!("validated continuous column"),
                    })
                    .collect();
                columns.push(column);
                provenance.push(ColumnProvenance {
                    source_feature: col.name.clone(),
                    category: CONTINUOUS_CATEGORY.into(),
                    strategy,
                    is_outcome: false,
                });
            }
            ColumnKind::Categorical | ColumnKind::Binary => {
                let ordered = category_order(col).expect("categorical column");
                let observed = observed_categories(table, c, col.categories.len());
                let kept: Vec<&String> = ordered
                    .iter()
                    .filter(|label| {
                        let idx = col.categories.iter().position(|l| l == *label).unwrap();
                        let present = observed[idx];
                        if !present {
                            dropped_empty.push((col.name.clone(), (*label).clone()));
                            log::warn!(
                                "feature `{}`: declared category `{}` never occurs; dropped",
                                col.name,
                                label
                            );
                        }
                        present
                    })
                    .collect();
                let emit: Vec<&String> = match strategy {
                    // a single observed category would be an all-ones column;
                    // it contributes nothing under the drop encodings either
                    EncodingStrategy::Full if kept.len() < 2 => {
                        if let Some(label) = kept.first() {
                            log::warn!(
                                "feature `{}`: single observed category `{}`; no columns emitted",
                                col.name,
                                label
                            );
                        }
                        Vec::new()
                    }
                    EncodingStrategy::Full => kept,
                    EncodingStrategy::DropFirst => kept.into_iter().skip(1).collect(),
                    EncodingStrategy::DropLast => {
                        let mut k = kept;
                        k.pop();
                        k
                    }
                };
                for label in emit {
                    let idx = col.categories.iter().position(|l| l == label).unwrap();
                    let column: Vec<f64> = (0..n)
                        .map(|r| match table.cell(r, c) {
                            Cell::Category(i) if i == idx => 1.0,
                            _ => 0.0,
                        })
                        .collect();
                    columns.push(column);
                    provenance.push(ColumnProvenance {
                        source_feature: col.name.clone(),
                        category: label.clone(),
                        strategy,
                        is_outcome: false,
                    });
                }
            }
        }
    }

    Ok(EncodedMatrix {
        columns,
        provenance,
        outcome_col,
        n_rows: n,
        dropped_empty,
    })
}

fn observed_categories(table: &DataTable, col: usize, n_categories: usize) -> Vec<bool> {
    let mut seen = vec![false; n_categories];
    for r in 0..table.n_rows() {
        if let Cell::Category(i) = table.cell(r, col) {
            seen[i] = true;
        }
    }
    seen
}

/// The outcome becomes one 0/1 column indicating the lexicographically last
/// observed category (so a {0,1} outcome indicates "1").
fn encode_outcome(table: &DataTable, c: usize) -> Result<(Vec<f64>, String), EncodeError> {
    let col = &table.schema()[c];
    if !col.is_categorical() {
        return Err(EncodeError::OutcomeInvalid {
            column: col.name.clone(),
            reason: "outcome must be a binary/categorical column".into(),
        });
    }
    let ordered = category_order(col).expect("categorical outcome");
    let observed = observed_categories(table, c, col.categories.len());
    let observed_labels: Vec<&String> = ordered
        .iter()
        .filter(|l| observed[col.categories.iter().position(|x| x == *l).unwrap()])
        .collect();
    if observed_labels.len() != 2 {
        return Err(EncodeError::OutcomeInvalid {
            column: col.name.clone(),
            reason: format!(
                "outcome needs exactly 2 observed categories, got {}",
                observed_labels.len()
            ),
        });
    }
    let positive = observed_labels[1].clone();
    let pos_idx = col.categories.iter().position(|l| *l == positive).unwrap();
    let column: Vec<f64> = (0..table.n_rows())
        .map(|r| match table.cell(r, c) {
            Cell::Category(i) if i == pos_idx => 1.0,
            _ => 0.0,
        })
        .collect();
    Ok((column, positive))
}

/// Partition the matrix columns by source feature, in first-appearance order.
/// Continuous pass-through columns (and the outcome) form singleton groups.
pub fn sibling_groups(m: &EncodedMatrix) -> Vec<Vec<usize>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in m.provenance().iter().enumerate() {
        let key = p.source_feature.as_str();
        if !groups.contains_key(key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(i);
    }
    order.into_iter().map(|k| groups.remove(k).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnSchema, DataTable};

    fn toy_table() -> DataTable {
        // Embarked in {C,Q,S}, Sex binary, Fare continuous, Survived outcome
        let schema = vec![
            ColumnSchema::categorical("Embarked", vec!["C".into(), "Q".into(), "S".into()]),
            ColumnSchema::binary("Sex", ["female".into(), "male".into()]),
            ColumnSchema::continuous("Fare"),
            ColumnSchema::binary("Survived", ["0".into(), "1".into()])
                .with_role(Role::Outcome),
        ];
        let rows = vec![
            vec![Cell::Category(2), Cell::Category(1), Cell::Number(7.25), Cell::Category(0)],
            vec![Cell::Category(0), Cell::Category(0), Cell::Number(71.3), Cell::Category(1)],
            vec![Cell::Category(2), Cell::Category(0), Cell::Number(7.92), Cell::Category(1)],
            vec![Cell::Category(1), Cell::Category(1), Cell::Number(8.05), Cell::Category(0)],
            vec![Cell::Category(2), Cell::Category(1), Cell::Number(53.1), Cell::Category(0)],
        ];
        DataTable::new(schema, rows).unwrap()
    }

    #[test]
    fn drop_first_omits_first_category() {
        let m = encode(&toy_table(), EncodingStrategy::DropFirst).unwrap();
        let names = m.node_names();
        assert_eq!(
            names,
            vec!["Embarked=Q", "Embarked=S", "Sex=male", "Fare", "Survived"]
        );
        assert_eq!(m.outcome_col(), Some(4));
    }

    #[test]
    fn drop_last_omits_last_category() {
        let m = encode(&toy_table(), EncodingStrategy::DropLast).unwrap();
        assert_eq!(
            m.node_names(),
            vec!["Embarked=C", "Embarked=Q", "Sex=female", "Fare", "Survived"]
        );
    }

    #[test]
    fn full_dummies_sum_to_one_per_row() {
        let m = encode(&toy_table(), EncodingStrategy::Full).unwrap();
        let embarked: Vec<usize> = m
            .provenance()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.source_feature == "Embarked")
            .map(|(i, _)| i)
            .collect();
        assert_eq!(embarked.len(), 3);
        for r in 0..m.n_rows() {
            let s: f64 = embarked.iter().map(|&c| m.column(c)[r]).sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn outcome_is_single_indicator_under_both_strategies() {
        let a = encode(&toy_table(), EncodingStrategy::DropFirst).unwrap();
        let b = encode(&toy_table(), EncodingStrategy::DropLast).unwrap();
        let (oa, ob) = (a.outcome_col().unwrap(), b.outcome_col().unwrap());
        assert_eq!(a.column(oa), b.column(ob));
        assert_eq!(a.provenance()[oa].category, "1");
        assert_eq!(a.column(oa), &[0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn strategies_have_equal_column_counts_and_swap_reference_category() {
        let a = encode(&toy_table(), EncodingStrategy::DropFirst).unwrap();
        let b = encode(&toy_table(), EncodingStrategy::DropLast).unwrap();
        assert_eq!(a.n_cols(), b.n_cols());
        let feats = |m: &EncodedMatrix| {
            m.provenance()
                .iter()
                .map(|p| p.source_feature.clone())
                .collect::<std::collections::BTreeSet<_>>()
        };
        assert_eq!(feats(&a), feats(&b));
        // per categorical feature the category sets differ by first↔last swap
        let cats = |m: &EncodedMatrix, f: &str| {
            m.provenance()
                .iter()
                .filter(|p| p.source_feature == f && !p.is_outcome)
                .map(|p| p.category.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(cats(&a, "Embarked"), vec!["Q", "S"]);
        assert_eq!(cats(&b, "Embarked"), vec!["C", "Q"]);
    }

    #[test]
    fn rows_reconstruct_from_dummy_groups() {
        let table = toy_table();
        let m = encode(&table, EncodingStrategy::DropFirst).unwrap();
        // all-zero Embarked group means the dropped reference category "C"
        let groups = sibling_groups(&m);
        let embarked = &groups[0];
        for r in 0..m.n_rows() {
            let hot: Vec<&str> = embarked
                .iter()
                .filter(|&&c| m.column(c)[r] == 1.0)
                .map(|&c| m.provenance()[c].category.as_str())
                .collect();
            let expected = match table.cell(r, 0) {
                Cell::Category(i) => &table.schema()[0].categories[i],
                _ => unreachable!(),
            };
            if expected == "C" {
                assert!(hot.is_empty());
            } else {
                assert_eq!(hot, vec![expected.as_str()]);
            }
        }
    }

    #[test]
    fn sibling_groups_partition_by_feature() {
        let m = encode(&toy_table(), EncodingStrategy::DropFirst).unwrap();
        let groups = sibling_groups(&m);
        assert_eq!(groups.len(), 4); // Embarked, Sex, Fare, Survived
        assert_eq!(groups[0], vec![0, 1]);
        assert_eq!(groups[2], vec![3]); // continuous singleton
        let total: usize = groups.iter().map(Vec::len).sum();
        assert_eq!(total, m.n_cols());
    }

    #[test]
    fn missing_data_is_rejected() {
        let schema = vec![
            ColumnSchema::continuous("x"),
            ColumnSchema::binary("y", ["a".into(), "b".into()]).with_role(Role::Outcome),
        ];
        let rows = vec![
            vec![Cell::Number(1.0), Cell::Category(0)],
            vec![Cell::Missing, Cell::Category(1)],
        ];
        let table = DataTable::new(schema, rows).unwrap();
        assert!(matches!(
            encode(&table, EncodingStrategy::DropFirst),
            Err(EncodeError::MissingData { row: 1, .. })
        ));
    }

    #[test]
    fn empty_declared_category_is_reported_and_dropped() {
        let schema = vec![
            ColumnSchema::categorical("Embarked", vec!["C".into(), "Q".into(), "S".into()]),
            ColumnSchema::binary("Survived", ["0".into(), "1".into()])
                .with_role(Role::Outcome),
        ];
        let rows = vec![
            vec![Cell::Category(0), Cell::Category(0)],
            vec![Cell::Category(2), Cell::Category(1)],
            vec![Cell::Category(0), Cell::Category(1)],
        ];
        let table = DataTable::new(schema, rows).unwrap();
        let m = encode(&table, EncodingStrategy::Full).unwrap();
        assert_eq!(m.dropped_empty(), &[("Embarked".to_string(), "Q".to_string())]);
        // no all-zero column was materialized
        for c in 0..m.n_cols() {
            assert!(m.column(c).iter().any(|&v| v != 0.0));
        }
    }

    #[test]
    fn non_binary_outcome_is_rejected() {
        let schema = vec![
            ColumnSchema::continuous("x"),
            ColumnSchema::categorical("y", vec!["a".into(), "b".into(), "c".into()])
                .with_role(Role::Outcome),
        ];
        let rows = vec![
            vec![Cell::Number(1.0), Cell::Category(0)],
            vec![Cell::Number(2.0), Cell::Category(1)],
            vec![Cell::Number(3.0), Cell::Category(2)],
        ];
        let table = DataTable::new(schema, rows).unwrap();
        assert!(matches!(
            encode(&table, EncodingStrategy::DropFirst),
            Err(EncodeError::OutcomeInvalid { .. })
        ));
    }
}
