use std::collections::BTreeMap;
use std::path::Path;

use super::IoError;
use crate::biosignals::{EcgRecord, EmgRecord, MuscleChannel};

type Columns = (Vec<String>, Vec<Vec<Option<f64>>>);

fn columns(text: &str, path: &Path) -> Result<Columns, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| IoError::Header {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(String::is_empty) {
        return Err(IoError::Header {
            path: path.to_path_buf(),
            message: "empty column name".into(),
        });
    }
    let mut cols = vec![Vec::new(); header.len()];
    for record in reader.records() {
        let record = record.map_err(|e| IoError::Row {
            path: path.to_path_buf(),
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        for (i, cell) in record.iter().enumerate() {
            let v = if cell.is_empty() || cell == "NA" {
                None
            } else {
                let v = cell.parse::<f64>().ok().filter(|v| v.is_finite());
                Some(v.ok_or_else(|| IoError::Row {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column `{}`: `{cell}` is not a finite number", header[i]),
                })?)
            };
            cols[i].push(v);
        }
    }
    Ok((header, cols))
}

/// One column per channel (`ESL_L`, ...), one row per sample in µV. A column
/// that is entirely `NA` or empty marks a channel that was recorded but is
/// unusable; a partial gap is an error.
pub fn emg_from_csv(text: &str, sample_rate: f64, path: &Path) -> Result<EmgRecord, IoError> {
    let (header, cols) = columns(text, path)?;
    let mut channels = BTreeMap::new();
    for (name, col) in header.iter().zip(cols) {
        let ch: MuscleChannel = name.parse().map_err(|e| IoError::Header {
            path: path.to_path_buf(),
            message: format!("{e}"),
        })?;
        let samples = if col.iter().all(Option::is_none) {
            None
        } else if let Some(gap) = col.iter().position(Option::is_none) {
            return Err(IoError::Row {
                path: path.to_path_buf(),
                row: gap + 2,
                message: format!("channel {ch} has a missing sample"),
            });
        } else {
            Some(col.into_iter().flatten().collect())
        };
        if channels.insert(ch, samples).is_some() {
            return Err(IoError::Header {
                path: path.to_path_buf(),
                message: format!("channel {ch} appears twice"),
            });
        }
    }
    EmgRecord::new(sample_rate, channels).map_err(|e| IoError::content(path, e))
}

/// Single-column ECG in mV.
pub fn ecg_from_csv(text: &str, sample_rate: f64, path: &Path) -> Result<EcgRecord, IoError> {
    let (header, mut cols) = columns(text, path)?;
    if header.len() != 1 {
        return Err(IoError::Header {
            path: path.to_path_buf(),
            message: format!("expected one ECG column, found {}", header.len()),
        });
    }
    let col = cols.remove(0);
    if let Some(gap) = col.iter().position(Option::is_none) {
        return Err(IoError::Row {
            path: path.to_path_buf(),
            row: gap + 2,
            message: "missing sample".into(),
        });
    }
    EcgRecord::new(sample_rate, col.into_iter().flatten().collect())
        .map_err(|e| IoError::content(path, e))
}
