//! The cases × indicators table and its z-score standardization.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fmath;
use crate::{Error, Matrix, Result};

pub const MIN_CASES: usize = 3;
pub const MIN_INDICATORS: usize = 2;
/// Columns whose sample standard deviation is at or below this are constant.
pub const ZERO_VARIANCE_TOLERANCE: f64 = 1e-12;

/// Optional theme/sub-theme classification of an indicator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndicatorTag {
    pub theme: Option<String>,
    pub subtheme: Option<String>,
}

/// What to do with a case that has a missing cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MissingPolicy {
    /// Reject the table.
    #[default]
    Error,
    /// Drop every case with at least one missing cell.
    Listwise,
}

/// Immutable cases × indicators table in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDataset {
    case_ids: Vec<String>,
    indicator_names: Vec<String>,
    values: Matrix,
    metadata: Vec<Option<IndicatorTag>>,
}

impl IndicatorDataset {
    pub fn new(case_ids: Vec<String>, indicator_names: Vec<String>, values: Matrix) -> Result<Self> {
        if values.rows() != case_ids.len() || values.cols() != indicator_names.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} case ids and {} indicator names for a {}x{} table",
                case_ids.len(),
                indicator_names.len(),
                values.rows(),
                values.cols()
            )));
        }
        if case_ids.len() < MIN_CASES {
            return Err(Error::TooFewCases { found: case_ids.len(), required: MIN_CASES });
        }
        if indicator_names.len() < MIN_INDICATORS {
            return Err(Error::TooFewIndicators { found: indicator_names.len(), required: MIN_INDICATORS });
        }
        if let Some(dup) = first_duplicate(&case_ids) {
            return Err(Error::DuplicateCase(dup.into()));
        }
        if let Some(dup) = first_duplicate(&indicator_names) {
            return Err(Error::DuplicateIndicator(dup.into()));
        }
        let metadata = alloc::vec![None; indicator_names.len()];
        Ok(Self { case_ids, indicator_names, values, metadata })
    }

    /// Builds a dataset from parsed rows where `None` marks a missing cell.
    ///
    /// Returns the dataset and the ids of cases dropped under
    /// [`MissingPolicy::Listwise`], in file order.
    pub fn from_records(
        case_ids: Vec<String>,
        indicator_names: Vec<String>,
        records: Vec<Vec<Option<f64>>>,
        policy: MissingPolicy,
    ) -> Result<(Self, Vec<String>)> {
        if records.len() != case_ids.len() {
            return Err(Error::Dimension(alloc::format!("{} records for {} case ids", records.len(), case_ids.len())));
        }
        // Duplicate ids are reported before anything is dropped.
        if let Some(dup) = first_duplicate(&case_ids) {
            return Err(Error::DuplicateCase(dup.into()));
        }
        let p = indicator_names.len();
        let mut kept_ids = Vec::with_capacity(case_ids.len());
        let mut dropped = Vec::new();
        let mut data = Vec::with_capacity(records.len() * p);
        for (r, (id, rec)) in case_ids.into_iter().zip(records).enumerate() {
            if rec.len() != p {
                return Err(Error::Dimension(alloc::format!("record {r} has {} cells, expected {p}", rec.len())));
            }
            if let Some(col) = rec.iter().position(Option::is_none) {
                match policy {
                    MissingPolicy::Error => {
                        return Err(Error::MissingValue { record: r, column: indicator_names[col].clone() })
                    }
                    MissingPolicy::Listwise => {
                        dropped.push(id);
                        continue;
                    }
                }
            }
            data.extend(rec.into_iter().map(|v| v.unwrap_or_default()));
            kept_ids.push(id);
        }
        if kept_ids.len() < MIN_CASES {
            return Err(Error::TooFewCases { found: kept_ids.len(), required: MIN_CASES });
        }
        let values = Matrix::new(kept_ids.len(), p.max(1), data)
            .map_err(|_| Error::TooFewIndicators { found: p, required: MIN_INDICATORS })?;
        Ok((Self::new(kept_ids, indicator_names, values)?, dropped))
    }

    pub fn with_metadata(mut self, metadata: Vec<Option<IndicatorTag>>) -> Result<Self> {
        if metadata.len() != self.indicator_names.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} metadata entries for {} indicators",
                metadata.len(),
                self.indicator_names.len()
            )));
        }
        self.metadata = metadata;
        Ok(self)
    }

    pub fn n_cases(&self) -> usize {
        self.case_ids.len()
    }

    pub fn n_indicators(&self) -> usize {
        self.indicator_names.len()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn indicator_names(&self) -> &[String] {
        &self.indicator_names
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn metadata(&self) -> &[Option<IndicatorTag>] {
        &self.metadata
    }

    pub fn indicator_index(&self, name: &str) -> Result<usize> {
        self.indicator_names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownVariable {
            name: name.into(),
            suggestion: nearest(name, &self.indicator_names).map(String::from),
        })
    }

    pub fn case_index(&self, id: &str) -> Result<usize> {
        self.case_ids.iter().position(|c| c == id).ok_or_else(|| Error::UnknownCase(id.into()))
    }

    /// Column subset in the requested order, preserving case order.
    pub fn select_variables<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names.iter().map(|n| self.indicator_index(n.as_ref())).collect::<Result<Vec<_>>>()?;
        let new_names = idx.iter().map(|&j| self.indicator_names[j].clone()).collect();
        let metadata = idx.iter().map(|&j| self.metadata[j].clone()).collect();
        Self::new(self.case_ids.clone(), new_names, self.values.select_columns(&idx))?.with_metadata(metadata)
    }

    /// Row subset in the requested order.
    pub fn select_cases<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self> {
        let idx = ids.iter().map(|id| self.case_index(id.as_ref())).collect::<Result<Vec<_>>>()?;
        let new_ids = idx.iter().map(|&i| self.case_ids[i].clone()).collect();
        Self::new(new_ids, self.indicator_names.clone(), self.values.select_rows(&idx))?
            .with_metadata(self.metadata.clone())
    }
}

/// Dataset columns in z-score units together with the moments used.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    pub case_ids: Vec<String>,
    pub indicator_names: Vec<String>,
    pub values: Matrix,
    pub column_means: Vec<f64>,
    /// Sample (n − 1) standard deviations.
    pub column_sds: Vec<f64>,
}

impl StandardizedMatrix {
    /// Maps z-scores back to original units.
    pub fn unstandardize(&self) -> Matrix {
        let mut out = self.values.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out[(i, j)] = out[(i, j)] * self.column_sds[j] + self.column_means[j];
            }
        }
        out
    }
}

/// Sample mean and (n − 1) standard deviation.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, fmath::sqrt(ss / (n - 1.0)))
}

/// z-scores every column with its sample mean and standard deviation.
pub fn standardize(ds: &IndicatorDataset) -> Result<StandardizedMatrix> {
    let x = ds.values();
    let (n, p) = (x.rows(), x.cols());
    let mut z = Matrix::zeros(n, p);
    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    for j in 0..p {
        let col = x.column(j);
        let (mean, sd) = mean_and_sd(&col);
        if sd.is_nan() || sd <= ZERO_VARIANCE_TOLERANCE {
            return Err(Error::ZeroVariance(ds.indicator_names()[j].clone()));
        }
        for (i, v) in col.iter().enumerate() {
            z[(i, j)] = (v - mean) / sd;
        }
        means.push(mean);
        sds.push(sd);
    }
    Ok(StandardizedMatrix {
        case_ids: ds.case_ids().to_vec(),
        indicator_names: ds.indicator_names().to_vec(),
        values: z,
        column_means: means,
        column_sds: sds,
    })
}

fn first_duplicate(items: &[String]) -> Option<&str> {
    let mut seen = BTreeSet::new();
    items.iter().find(|s| !seen.insert(s.as_str())).map(String::as_str)
}

/// Closest candidate by edit distance, if any is reasonably close.
fn nearest<'a>(name: &str, candidates: &'a [String]) -> Option<&'a str> {
    let (best, dist) = candidates.iter().map(|c| (c.as_str(), levenshtein(name, c))).min_by_key(|&(_, d)| d)?;
    let limit = (name.chars().count().max(best.chars().count()) / 2).max(2);
    (dist <= limit).then_some(best)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
