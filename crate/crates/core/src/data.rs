//! CSV ingestion for real-data fits.
//!
//! A header row is required and every column must be numeric. Cells that are
//! empty or spell a missing value (`NA`, `NaN`, `nan`, `null`) drop their row.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Dataset;

const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "null"];

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub data: Dataset,
    pub outcome: String,
    /// Rows removed because of a missing value.
    pub dropped_rows: usize,
}

pub fn read_csv_path(path: impl AsRef<Path>, outcome: &str) -> Result<LoadedData> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Csv(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, outcome)
}

pub fn read_csv<R: Read>(reader: R, outcome: &str) -> Result<LoadedData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let y_col = header
        .iter()
        .position(|h| h == outcome)
        .ok_or_else(|| Error::OutcomeMissing(outcome.to_string()))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0;
    for record in rdr.records() {
        let record = record?;
        let mut row = Vec::with_capacity(header.len());
        let mut missing = false;
        for (cell, name) in record.iter().zip(&header) {
            if MISSING.contains(&cell) {
                missing = true;
                row.push(f64::NAN);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericColumn(name.clone()))?;
            if !v.is_finite() {
                return Err(Error::NonNumericColumn(name.clone()));
            }
            row.push(v);
        }
        if missing {
            dropped += 1;
        } else {
            rows.push(row);
        }
    }

    let n = rows.len();
    let features: Vec<usize> = (0..header.len()).filter(|&j| j != y_col).collect();
    if features.is_empty() {
        return Err(Error::InvalidInput("no feature columns besides the outcome".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("no complete rows".into()));
    }
    let x = DMatrix::from_fn(n, features.len(), |i, k| rows[i][features[k]]);
    let y = DVector::from_fn(n, |i, _| rows[i][y_col]);
    let names = features.iter().map(|&j| header[j].clone()).collect();
    Ok(LoadedData {
        data: Dataset::new(x, y, names)?,
        outcome: outcome.to_string(),
        dropped_rows: dropped,
    })
}
