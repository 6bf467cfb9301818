//! Labelled sparse classification data: storage, label handling, splits and
//! summary statistics.

mod csr;
mod split;
pub mod svmlight;
pub mod synthetic;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use csr::CsrMatrix;
pub use split::{split_indices, train_test_split};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1` or `-1` in the requested scalar type.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    /// Decision rule of a linear classifier; a score of exactly zero is
    /// assigned to the positive class.
    pub fn from_score<T: Scalar>(score: T) -> Self {
        if score >= T::zero() {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// Mapping from the two raw label values found in a file to `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMap {
    positive: f64,
    negative: f64,
}

impl LabelMap {
    pub fn new(positive: f64, negative: f64) -> Result<Self> {
        if positive == negative || !positive.is_finite() || !negative.is_finite() {
            return Err(Error::invalid(format!(
                "label map needs two distinct finite raw values, got {positive} and {negative}"
            )));
        }
        Ok(Self { positive, negative })
    }

    /// The identity map on `{-1, +1}`.
    pub fn signed() -> Self {
        Self {
            positive: 1.0,
            negative: -1.0,
        }
    }

    /// Picks a map for a two-class label set.
    ///
    /// `{-1, +1}` maps to itself and `{0, 1}` sends `1` to the positive class.
    /// Any other pair sends the smaller raw value to the positive class, so
    /// `{2, 4}` becomes `2 -> +1`, `4 -> -1`.
    pub fn infer(distinct: &[f64]) -> Result<Self> {
        let mut vals = distinct.to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        match vals.as_slice() {
            [a, b] if *a == -1.0 && *b == 1.0 => Ok(Self::signed()),
            [a, b] if *a == 0.0 && *b == 1.0 => Self::new(1.0, 0.0),
            [a, b] => Self::new(*a, *b),
            _ => Err(Error::NotBinary(vals)),
        }
    }

    /// Parses `raw:sign,raw:sign`, for example `2:1,4:-1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut positive = None;
        let mut negative = None;
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (raw, sign) = part
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("label map entry `{part}` lacks ':'")))?;
            let raw: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad raw label `{raw}`")))?;
            let slot = match sign.trim() {
                "1" | "+1" => &mut positive,
                "-1" => &mut negative,
                other => {
                    return Err(Error::invalid(format!(
                        "label map target must be 1 or -1, got `{other}`"
                    )))
                }
            };
            if slot.replace(raw).is_some() {
                return Err(Error::invalid("label map assigns a sign twice"));
            }
        }
        match (positive, negative) {
            (Some(p), Some(n)) => Self::new(p, n),
            _ => Err(Error::invalid(
                "label map must name one raw value for each of 1 and -1",
            )),
        }
    }

    pub fn get(&self, raw: f64) -> Option<Label> {
        if raw == self.positive {
            Some(Label::Positive)
        } else if raw == self.negative {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

/// Samples as read from disk, with labels not yet mapped to `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset<T> {
    pub features: CsrMatrix<T>,
    pub labels: Vec<f64>,
}

impl<T: Scalar> RawDataset<T> {
    pub fn distinct_labels(&self) -> Vec<f64> {
        let mut v = self.labels.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn remap(self, map: &LabelMap) -> Result<SparseDataset<T>> {
        let labels = self
            .labels
            .iter()
            .map(|&raw| map.get(raw).ok_or(Error::UnknownLabel(raw)))
            .collect::<Result<Vec<_>>>()?;
        SparseDataset::new(self.features, labels)
    }

    /// Remaps with [`LabelMap::infer`].
    pub fn into_signed(self) -> Result<SparseDataset<T>> {
        let map = LabelMap::infer(&self.distinct_labels())?;
        self.remap(&map)
    }
}

/// `n` samples with `m` features stored row-wise, and a `±1` label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset<T> {
    features: CsrMatrix<T>,
    labels: Vec<Label>,
}

impl<T: Scalar> SparseDataset<T> {
    pub fn new(features: CsrMatrix<T>, labels: Vec<Label>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        Ok(Self { features, labels })
    }

    /// Dense constructor, mostly for tests and small examples.
    pub fn from_dense(n: usize, m: usize, rows: &[T], labels: Vec<Label>) -> Result<Self> {
        Self::new(CsrMatrix::from_dense(n, m, rows)?, labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &CsrMatrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_signs(&self) -> Vec<T> {
        self.labels.iter().map(|l| l.sign()).collect()
    }

    pub fn with_feature_count(self, m: usize) -> Result<Self> {
        Ok(Self {
            features: self.features.with_ncols(m)?,
            labels: self.labels,
        })
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats::new(self.n(), self.m(), self.features.nnz())
    }

    /// Back to a raw dataset with `±1` labels, for writing to disk.
    pub fn to_raw(&self) -> RawDataset<T> {
        RawDataset {
            features: self.features.clone(),
            labels: self.labels.iter().map(|l| f64::from(l.as_i8())).collect(),
        }
    }
}

/// Size summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n: usize,
    pub m: usize,
    pub nnz: usize,
    /// Stored entries as a percentage of `n * m`.
    pub density_pct: f64,
}

impl DatasetStats {
    pub fn new(n: usize, m: usize, nnz: usize) -> Self {
        let cells = (n as f64) * (m as f64);
        let density_pct = if cells > 0.0 {
            100.0 * nnz as f64 / cells
        } else {
            0.0
        };
        Self {
            n,
            m,
            nnz,
            density_pct,
        }
    }

    pub const CSV_HEADER: &'static str = "name,n,m,nnz,density";

    /// `name,n,m,nnz,density` with the density in percent, two decimals.
    pub fn csv_row(&self, name: &str) -> String {
        format!(
            "{},{},{},{},{:.2}",
            name, self.n, self.m, self.nnz, self.density_pct
        )
    }
}
