use std::fs;
use std::path::Path;

use serde::Serialize;

use super::HarnessError;

/// Floats in CSV files carry 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Provenance stamped on every result file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunMetadata {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A row type that knows its CSV layout.
pub trait CsvRecord {
    fn header(&self) -> Vec<String>;
    fn fields(&self) -> Vec<String>;
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv<R: CsvRecord>(path: &Path, records: &[R]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let csv_err = |e: csv::Error| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    if let Some(first) = records.first() {
        w.write_record(first.header()).map_err(csv_err)?;
    }
    for r in records {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("result types serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}
