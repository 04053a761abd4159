//! Supervised entropy-based binning: recursive binary splits on information
//! gain with the minimum-description-length acceptance criterion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Cell, ColumnKind, ColumnSchema, DataTable};

#[derive(Debug, Error)]
pub enum DiscretizeError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("bin spec does not match the table: {0}")]
    SpecMismatch(String),
}

/// Cut points for one continuous feature. `k` cut points produce `k + 1`
/// left-closed/right-open bins; the last bin is open-ended. `lower_bound` is
/// the smallest value seen at fit time and is only used to label the first
/// bin — bin assignment goes through the cut points alone, so every finite
/// value maps to exactly one bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub source_feature: String,
    pub lower_bound: f64,
    pub cut_points: Vec<f64>,
}

impl BinSpec {
    /// Interval labels in bin order, e.g. `["[0,5)", "[5,30)", "[30,inf)"]`.
    pub fn bin_labels(&self) -> Vec<String> {
        let mut bounds: Vec<String> = Vec::with_capacity(self.cut_points.len() + 2);
        bounds.push(format!("{}", self.lower_bound));
        for c in &self.cut_points {
            bounds.push(format!("{c}"));
        }
        let mut labels = Vec::with_capacity(self.cut_points.len() + 1);
        for i in 0..self.cut_points.len() {
            labels.push(format!("[{},{})", bounds[i], bounds[i + 1]));
        }
        labels.push(format!("[{},inf)", bounds[self.cut_points.len()]));
        labels
    }

    /// Bin index of a value: the number of cut points not exceeding it.
    pub fn bin_of(&self, value: f64) -> usize {
        self.cut_points.partition_point(|c| *c <= value)
    }

    pub fn n_bins(&self) -> usize {
        self.cut_points.len() + 1
    }
}

/// Shannon entropy in bits of a class-count vector.
fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn classes_present(counts: &[usize]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// Fit cut points for `values` against the class `labels` by recursive binary
/// partitioning: each step takes the boundary midpoint with the highest
/// information gain and keeps it only if the gain clears the MDL criterion,
/// then recurses into both halves. Ties on gain go to the smallest threshold.
pub fn mdlp_discretize(
    feature: &str,
    values: &[f64],
    labels: &[usize],
) -> Result<BinSpec, DiscretizeError> {
    if values.len() != labels.len() {
        return Err(DiscretizeError::DegenerateInput(format!(
            "{} values but {} labels",
            values.len(),
            labels.len()
        )));
    }
    if values.len() < 2 {
        return Err(DiscretizeError::DegenerateInput(
            "need at least 2 rows".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DiscretizeError::DegenerateInput(
            "values must be finite".into(),
        ));
    }
    let n_classes = labels.iter().copied().max().unwrap() + 1;

    let mut sorted: Vec<(f64, usize)> = values.iter().copied().zip(labels.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted[0].0 == sorted[sorted.len() - 1].0 {
        return Err(DiscretizeError::DegenerateInput(
            "all values identical".into(),
        ));
    }

    let mut cuts = Vec::new();
    split_segment(&sorted, n_classes, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    Ok(BinSpec {
        source_feature: feature.to_string(),
        lower_bound: sorted[0].0,
        cut_points: cuts,
    })
}

/// One recursion step over a value-sorted segment.
fn split_segment(segment: &[(f64, usize)], n_classes: usize, cuts: &mut Vec<f64>) {
    let n = segment.len();
    if n < 2 {
        return;
    }
    let mut total = vec![0usize; n_classes];
    for &(_, l) in segment {
        total[l] += 1;
    }
    let k = classes_present(&total);
    if k <= 1 {
        return; // already pure
    }
    let h_total = entropy(&total, n);

    let Some(best) = best_boundary_cut(segment, n_classes, &total, h_total) else {
        return;
    };

    // Fayyad–Irani MDL acceptance: gain must exceed
    // (log2(N-1) + log2(3^k - 2) - [k·H(S) - k1·H(S1) - k2·H(S2)]) / N.
    let k1 = classes_present(&best.left_counts);
    let k2 = classes_present(&best.right_counts);
    let delta = (3f64.powi(k as i32) - 2.0).log2()
        - (k as f64 * h_total - k1 as f64 * best.h_left - k2 as f64 * best.h_right);
    let threshold = ((n as f64 - 1.0).log2() + delta) / n as f64;
    if best.gain <= threshold || best.gain <= 1e-12 {
        return;
    }

    cuts.push(best.cut);
    split_segment(&segment[..best.split_at], n_classes, cuts);
    split_segment(&segment[best.split_at..], n_classes, cuts);
}

struct CandidateCut {
    cut: f64,
    split_at: usize,
    gain: f64,
    h_left: f64,
    h_right: f64,
    left_counts: Vec<usize>,
    right_counts: Vec<usize>,
}

/// Scan boundary candidates (midpoints between adjacent distinct values whose
/// blocks of equal values carry different label distributions) and return the
/// one with the highest information gain, smallest threshold on ties.
fn best_boundary_cut(
    segment: &[(f64, usize)],
    n_classes: usize,
    total: &[usize],
    h_total: f64,
) -> Option<CandidateCut> {
    let n = segment.len();
    let mut best: Option<CandidateCut> = None;

    let mut left = vec![0usize; n_classes];
    let mut block_start = 0usize;
    let mut i = 0usize;
    while i < n {
        // advance over the block of rows with equal value
        let v = segment[i].0;
        let mut j = i;
        while j < n && segment[j].0 == v {
            left[segment[j].1] += 1;
            j += 1;
        }
        if j == n {
            break;
        }
        // candidate boundary between this block and the next
        let next_v = segment[j].0;
        let mut k2 = j;
        while k2 < n && segment[k2].0 == next_v {
            k2 += 1;
        }
        let cur_block = &segment[block_start..j];
        let next_block = &segment[j..k2];
        if block_distributions_differ(cur_block, next_block, n_classes) {
            let n_left = j;
            let n_right = n - j;
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let h_left = entropy(&left, n_left);
            let h_right = entropy(&right, n_right);
            let gain = h_total
                - (n_left as f64 / n as f64) * h_left
                - (n_right as f64 / n as f64) * h_right;
            let cut = 0.5 * (v + next_v);
            let better = match &best {
                None => true,
                Some(b) => gain > b.gain, // strict: ties keep the earlier (smaller) cut
            };
            if better {
                best = Some(CandidateCut {
                    cut,
                    split_at: j,
                    gain,
                    h_left,
                    h_right,
                    left_counts: left.clone(),
                    right_counts: right,
                });
            }
        }
        block_start = j;
        i = j;
    }
    best
}

fn block_distributions_differ(a: &[(f64, usize)], b: &[(f64, usize)], n_classes: usize) -> bool {
    let mut ca = vec![0usize; n_classes];
    let mut cb = vec![0usize; n_classes];
    for &(_, l) in a {
        ca[l] += 1;
    }
    for &(_, l) in b {
        cb[l] += 1;
    }
    // compare normalized distributions exactly via cross-multiplication
    let (na, nb) = (a.len(), b.len());
    ca.iter().zip(&cb).any(|(&x, &y)| x * nb != y * na)
}

/// Replace each spec's source column with a categorical column whose
/// categories are the bin labels in interval order. Other columns untouched.
pub fn apply_bins(table: &DataTable, specs: &[BinSpec]) -> Result<DataTable, DiscretizeError> {
    let mut out = table.clone();
    for spec in specs {
        let col = out
            .column_index(&spec.source_feature)
            .ok_or_else(|| DiscretizeError::SpecMismatch(format!(
                "column `{}` not found",
                spec.source_feature
            )))?;
        let schema_col = &out.schema()[col];
        if schema_col.kind != ColumnKind::Continuous {
            return Err(DiscretizeError::SpecMismatch(format!(
                "column `{}` is not continuous",
                spec.source_feature
            )));
        }
        let labels = spec.bin_labels();
        let replacement = ColumnSchema {
            name: schema_col.name.clone(),
            kind: ColumnKind::Categorical,
            categories: labels,
            role: schema_col.role,
        };
        let cells: Vec<Cell> = (0..out.n_rows())
            .map(|r| match out.cell(r, col) {
                Cell::Number(v) => Cell::Category(spec.bin_of(v)),
                Cell::Missing => Cell::Missing,
                Cell::Category(_) => unreachable!("continuous column holds numbers"),
            })
            .collect();
        out = out
            .with_categorical_column(col, replacement, cells)
            .map_err(|e| DiscretizeError::SpecMismatch(e.to_string()))?;
    }
    Ok(out)
}
