//! Covariance, partial correlation, Fisher's z conditional-independence test,
//! and the Pearson weighting kernel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::EncodedMatrix;
use crate::exec::{map_collect, Parallelism};

/// Pivot magnitude below which a factorization is treated as structurally
/// singular (the dummy-variable-trap failure mode, as opposed to benign
/// ill-conditioning).
pub const SINGULARITY_PIVOT_TOL: f64 = 1e-10;

/// Correlations are clamped into [−1+ε, 1−ε] before the log transform.
const CLAMP_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("covariance submatrix for ({x}, {y} | {cond:?}) is singular")]
    SingularCovariance { x: usize, y: usize, cond: Vec<usize> },
    #[error("column {col} has zero variance")]
    ZeroVariance { col: usize },
    #[error("too few samples: need more than {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid index set: {0}")]
    InvalidIndices(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    SingularCovariance,
    ZeroVariance,
    TooFewSamples,
}

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, PartialEq)]
pub struct CiDecision {
    pub x: usize,
    pub y: usize,
    pub cond_set: Vec<usize>,
    pub partial_r: f64,
    /// √(n − |S| − 3) · |z|, with z the Fisher transform of the partial r.
    pub statistic: f64,
    pub p_value: f64,
    pub independent: bool,
    pub degenerate: Option<Degeneracy>,
}

/// Symmetric sample covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    p: usize,
    data: Vec<f64>,
}

impl CovMatrix {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let p = rows.len();
        let mut data = Vec::with_capacity(p * p);
        for row in &rows {
            assert_eq!(row.len(), p);
            data.extend_from_slice(row);
        }
        CovMatrix { p, data }
    }
}

/// Sample covariance with 1/(n−1) normalization.
pub fn covariance(m: &EncodedMatrix) -> Result<CovMatrix, StatsError> {
    covariance_with(m, Parallelism::default())
}

pub fn covariance_with(m: &EncodedMatrix, par: Parallelism) -> Result<CovMatrix, StatsError> {
    let n = m.n_rows();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 1, got: n });
    }
    let p = m.n_cols();
    let means: Vec<f64> = (0..p)
        .map(|c| m.column(c).iter().sum::<f64>() / n as f64)
        .collect();

    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i..p).map(move |j| (i, j))).collect();
    let values = map_collect(pairs.clone(), par, |(i, j)| {
        let (a, b) = (m.column(i), m.column(j));
        let (ma, mb) = (means[i], means[j]);
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        s / (n as f64 - 1.0)
    });

    let mut data = vec![0.0; p * p];
    for ((i, j), v) in pairs.into_iter().zip(values) {
        data[i * p + j] = v;
        data[j * p + i] = v;
    }
    Ok(CovMatrix { p, data })
}

/// Gauss-Jordan inverse with partial pivoting; `None` when any pivot falls
/// below the singularity tolerance.
fn invert(mat: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let d = mat.len();
    let mut aug: Vec<Vec<f64>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..d).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();

    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
            .unwrap();
        if aug[pivot_row][col].abs() <= tol {
            return None;
        }
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= pivot;
        }
        for r in 0..d {
            if r == col {
                continue;
            }
            let factor = aug[r][col];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row_vals, target) = if r < col {
                let (lo, hi) = aug.split_at_mut(col);
                (&hi[0], &mut lo[r])
            } else {
                let (lo, hi) = aug.split_at_mut(r);
                (&lo[col], &mut hi[0])
            };
            for (t, p) in target.iter_mut().zip(pivot_row_vals) {
                *t -= factor * p;
            }
        }
    }

    Some(aug.into_iter().map(|row| row[d..].to_vec()).collect())
}

/// Partial correlation of `x` and `y` given `cond`, from the precision matrix
/// of the covariance submatrix over {x, y} ∪ cond:
/// r = −P_xy / √(P_xx · P_yy). The submatrix is assembled in canonical
/// (sorted) index order, so the result is exactly symmetric in x and y.
pub fn partial_correlation(
    cov: &CovMatrix,
    x: usize,
    y: usize,
    cond: &[usize],
) -> Result<f64, StatsError> {
    if x == y || cond.contains(&x) || cond.contains(&y) {
        return Err(StatsError::InvalidIndices(format!(
            "x={x}, y={y}, cond={cond:?} must be distinct"
        )));
    }
    if cond.is_empty() {
        // reduction case: plain correlation from the covariance entries
        let (cxx, cyy) = (cov.get(x, x), cov.get(y, y));
        if cxx.abs() <= SINGULARITY_PIVOT_TOL || cyy.abs() <= SINGULARITY_PIVOT_TOL {
            return Err(StatsError::SingularCovariance {
                x,
                y,
                cond: Vec::new(),
            });
        }
        let r = cov.get(x.min(y), x.max(y)) / (cxx * cyy).sqrt();
        return Ok(r.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS));
    }
    let mut idx: Vec<usize> = Vec::with_capacity(cond.len() + 2);
    idx.push(x);
    idx.push(y);
    idx.extend_from_slice(cond);
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Err(StatsError::InvalidIndices("repeated index".into()));
    }

    let sub: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| cov.get(i, j)).collect())
        .collect();
    let precision = invert(&sub, SINGULARITY_PIVOT_TOL).ok_or(StatsError::SingularCovariance {
        x,
        y,
        cond: cond.to_vec(),
    })?;

    let ix = idx.iter().position(|&i| i == x).unwrap();
    let iy = idx.iter().position(|&i| i == y).unwrap();
    // read the off-diagonal canonically: a floating-point Gauss-Jordan
    // inverse of a symmetric matrix is not bit-symmetric
    let (lo, hi) = (ix.min(iy), ix.max(iy));
    let (pxx, pyy, pxy) = (precision[ix][ix], precision[iy][iy], precision[lo][hi]);
    if pxx <= 0.0 || pyy <= 0.0 {
        // a PSD covariance cannot produce this except through degeneracy
        return Err(StatsError::SingularCovariance {
            x,
            y,
            cond: cond.to_vec(),
        });
    }
    let r = -pxy / (pxx * pyy).sqrt();
    Ok(r.clamp(-1.0 + CLAMP_EPS, 1.0 - CLAMP_EPS))
}

fn is_constant(col: &[f64]) -> bool {
    col.windows(2).all(|w| w[0] == w[1])
}

/// Fisher's z conditional-independence tester over one encoded matrix. The
/// covariance matrix is computed once at construction and shared by every
/// query, which makes concurrent testing cheap.
pub struct FisherZ<'a> {
    m: &'a EncodedMatrix,
    cov: CovMatrix,
    alpha: f64,
    constant: Vec<bool>,
}

impl<'a> FisherZ<'a> {
    pub fn new(m: &'a EncodedMatrix, alpha: f64) -> Result<Self, StatsError> {
        Self::with_parallelism(m, alpha, Parallelism::default())
    }

    pub fn with_parallelism(
        m: &'a EncodedMatrix,
        alpha: f64,
        par: Parallelism,
    ) -> Result<Self, StatsError> {
        let cov = covariance_with(m, par)?;
        let constant = (0..m.n_cols()).map(|c| is_constant(m.column(c))).collect();
        Ok(FisherZ {
            m,
            cov,
            alpha,
            constant,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn covariance(&self) -> &CovMatrix {
        &self.cov
    }

    /// z = ½·ln((1+r)/(1−r)); statistic = √(n − |S| − 3)·|z|;
    /// p = 2·(1 − Φ(statistic)); independent iff p > α.
    pub fn test(&self, x: usize, y: usize, cond: &[usize]) -> Result<CiDecision, StatsError> {
        let n = self.m.n_rows();
        if n <= cond.len() + 3 {
            return Err(StatsError::TooFewSamples {
                needed: cond.len() + 3,
                got: n,
            });
        }
        for &c in [x, y].iter() {
            if self.constant[c] {
                return Err(StatsError::ZeroVariance { col: c });
            }
        }
        let r = partial_correlation(&self.cov, x, y, cond)?;
        let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
        let statistic = ((n - cond.len() - 3) as f64).sqrt() * z.abs();
        // 2·(1 − Φ(s)) = erfc(s/√2)
        let p_value = statrs::function::erf::erfc(statistic / std::f64::consts::SQRT_2);
        Ok(CiDecision {
            x,
            y,
            cond_set: cond.to_vec(),
            partial_r: r,
            statistic,
            p_value,
            independent: p_value > self.alpha,
            degenerate: None,
        })
    }

    /// Non-erroring variant: failures come back as a decision with the
    /// degeneracy flagged (and `independent = false`).
    pub fn decide(&self, x: usize, y: usize, cond: &[usize]) -> CiDecision {
        match self.test(x, y, cond) {
            Ok(d) => d,
            Err(e) => {
                let degenerate = match e {
                    StatsError::SingularCovariance { .. } => Degeneracy::SingularCovariance,
                    StatsError::ZeroVariance { .. } => Degeneracy::ZeroVariance,
                    StatsError::TooFewSamples { .. } | StatsError::InvalidIndices(_) => {
                        Degeneracy::TooFewSamples
                    }
                };
                CiDecision {
                    x,
                    y,
                    cond_set: cond.to_vec(),
                    partial_r: f64::NAN,
                    statistic: f64::NAN,
                    p_value: f64::NAN,
                    independent: false,
                    degenerate: Some(degenerate),
                }
            }
        }
    }
}

/// One-off Fisher z test; builds the covariance matrix for this single query.
pub fn fisher_z_test(
    m: &EncodedMatrix,
    x: usize,
    y: usize,
    cond: &[usize],
    alpha: f64,
) -> Result<CiDecision, StatsError> {
    FisherZ::new(m, alpha)?.test(x, y, cond)
}

/// Sample Pearson correlation of two equal-length slices.
/// The `col` in a ZeroVariance error is 0 for `a`, 1 for `b`.
pub fn pearson_slices(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    assert_eq!(a.len(), b.len(), "pearson over unequal lengths");
    if is_constant(a) {
        return Err(StatsError::ZeroVariance { col: 0 });
    }
    if is_constant(b) {
        return Err(StatsError::ZeroVariance { col: 1 });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation of two matrix columns.
pub fn pearson(m: &EncodedMatrix, x: usize, y: usize) -> Result<f64, StatsError> {
    pearson_slices(m.column(x), m.column(y)).map_err(|e| match e {
        StatsError::ZeroVariance { col } => StatsError::ZeroVariance {
            col: if col == 0 { x } else { y },
        },
        other => other,
    })
}
