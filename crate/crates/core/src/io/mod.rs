//! File formats: motion CSV, biosignal CSV, session config, annotations,
//! survey responses, report tables, plot data and the run manifest.

mod config;
mod manifest;
mod motion;
mod signals;
mod tables;

pub use config::{EcgInput, EmgInput, SessionConfig, CONFIG_ENV};
pub use manifest::{sha256_hex, FileDigest, InputLog, Manifest};
pub use motion::{motion_from_csv, motion_to_csv, parse_motion_file, QUATERNION_TOLERANCE};
pub use signals::{ecg_from_csv, emg_from_csv};
pub(crate) use tables::summary_cells;
pub use tables::{
    emit_boxplot_data, fmt_float, BoxplotFigure, BoxplotRecord, CsvTable, SUMMARY_COLUMNS,
};

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{}: {message}", path.display())]
    File { path: PathBuf, message: String },
    #[error("{}: malformed header: {message}", path.display())]
    Header { path: PathBuf, message: String },
    #[error("{}, row {row}: {message}", path.display())]
    Row {
        path: PathBuf,
        /// 1-based line number in the file, header included.
        row: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Content { path: PathBuf, message: String },
}

impl IoError {
    pub fn file(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn content(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Content {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// Row number for row-level errors.
    pub fn row(&self) -> Option<usize> {
        match self {
            Self::Row { row, .. } => Some(*row),
            _ => None,
        }
    }
}
