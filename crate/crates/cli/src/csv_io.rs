//! CSV ingestion for indicator tables and indicator metadata.

use std::fs::File;
use std::path::Path;

use factorank_core::dataset::{IndicatorDataset, IndicatorTag, MissingPolicy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("identifier column \"{0}\" not found in header")]
    MissingIdColumn(String),
    #[error("non-numeric value {value:?} at row {row}, column \"{column}\"")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("missing value at row {row}, column \"{column}\"")]
    MissingValue { row: usize, column: String },
    #[error(transparent)]
    Dataset(#[from] factorank_core::Error),
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Defaults to the first column.
    pub id_column: Option<String>,
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: IndicatorDataset,
    /// Ids removed by listwise deletion, in file order.
    pub dropped: Vec<String>,
}

fn open(path: &Path) -> Result<csv::Reader<File>, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

/// Loads a header-first CSV with one identifier column and numeric indicators.
///
/// Row numbers in errors are file line numbers, so the first data row is 2.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Loaded, LoadError> {
    let mut reader = open(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let id_col = match &opts.id_column {
        Some(name) => header.iter().position(|h| h == name).ok_or_else(|| LoadError::MissingIdColumn(name.clone()))?,
        None => 0,
    };
    let names: Vec<String> = header.iter().enumerate().filter(|&(j, _)| j != id_col).map(|(_, h)| h.clone()).collect();

    let mut ids = Vec::new();
    let mut records = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        let mut cells = Vec::with_capacity(names.len());
        for (j, cell) in rec.iter().enumerate() {
            if j == id_col {
                continue;
            }
            let column = &header[j];
            if cell.is_empty() {
                if opts.missing == MissingPolicy::Error {
                    return Err(LoadError::MissingValue { row, column: column.clone() });
                }
                cells.push(None);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => cells.push(Some(v)),
                _ => return Err(LoadError::NonNumeric { row, column: column.clone(), value: cell.to_owned() }),
            }
        }
        ids.push(rec.get(id_col).unwrap_or_default().to_owned());
        records.push(cells);
    }
    let (dataset, dropped) = IndicatorDataset::from_records(ids, names, records, opts.missing)?;
    Ok(Loaded { dataset, dropped })
}

/// Reads `indicator,theme,subtheme` rows and attaches them to the dataset.
/// Indicators without a row get no tag; unknown indicators are rejected.
pub fn attach_metadata(ds: IndicatorDataset, path: &Path) -> Result<IndicatorDataset, LoadError> {
    let mut reader = open(path)?;
    let mut tags = vec![None; ds.n_indicators()];
    for rec in reader.records() {
        let rec = rec?;
        let name = rec.get(0).unwrap_or_default();
        let j = ds.indicator_index(name)?;
        let field = |i: usize| rec.get(i).filter(|s| !s.is_empty()).map(str::to_owned);
        tags[j] = Some(IndicatorTag { theme: field(1), subtheme: field(2) });
    }
    Ok(ds.with_metadata(tags)?)
}
