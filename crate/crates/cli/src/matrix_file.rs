//! Matrix input and output: a JSON document with complex entries, or a CSV
//! table of real entries.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use posprod::ComplexMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Row-major matrix with `[re, im]` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix, String> {
        let data = self.entries.into_iter().map(|[re, im]| Complex::new(re, im)).collect();
        ComplexMatrix::new(self.rows, self.cols, data).map_err(|e| e.to_string())
    }
}

fn parse_csv(text: &str) -> Result<ComplexMatrix, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = record
            .iter()
            .map(|field| field.parse::<f64>().map_err(|e| format!("row {}: {field:?}: {e}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no rows".into());
    }
    ComplexMatrix::from_real_rows(&rows).map_err(|e| e.to_string())
}

fn looks_like_json(path: &Path, text: &str) -> bool {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => true,
        Some(ext) if ext.eq_ignore_ascii_case("csv") => false,
        _ => text.trim_start().starts_with('{'),
    }
}

/// Parses matrix text; `path` only selects the format and labels errors.
pub fn parse_matrix(path: &Path, text: &str) -> Result<ComplexMatrix, CliError> {
    let parsed = if looks_like_json(path, text) {
        serde_json::from_str::<MatrixFile>(text)
            .map_err(|e| e.to_string())
            .and_then(MatrixFile::into_matrix)
    } else {
        parse_csv(text)
    };
    parsed.map_err(|message| CliError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(path, &text)
}
