//! File formats: CSV matrices, the JSON run report and PGM abundance maps.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shamans::{DenseMatrix, Mode, UnmixReport};

use crate::error::CliError;

/// Reads a headerless comma-separated matrix, one row per line.
///
/// Rejects ragged rows, non-finite values and negative values.
pub fn read_csv_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut data = Vec::new();
    let mut cols = None;
    let mut nrows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(nrows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(CliError::RaggedRows {
                    path: path.to_path_buf(),
                    line,
                    expected: c,
                    found: record.len(),
                })
            }
            _ => {}
        }
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                column: k + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::NonFiniteEntry {
                    path: path.to_path_buf(),
                    line,
                    column: k + 1,
                });
            }
            if v < 0.0 {
                return Err(CliError::NegativeEntry {
                    path: path.to_path_buf(),
                    line,
                    column: k + 1,
                    value: v,
                });
            }
            data.push(v);
        }
        nrows += 1;
    }
    let Some(ncols) = cols else {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 0,
            column: 0,
            message: "file contains no matrix rows".into(),
        });
    };
    Ok(DenseMatrix::from_row_major(nrows, ncols, &data)?)
}

/// Writes `m` in the format [`read_csv_matrix`] reads. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv_matrix(m: &DenseMatrix, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for i in 0..m.rows() {
        line.clear();
        for j in 0..m.cols() {
            if j > 0 {
                line.push(',');
            }
            let v = m.get(i, j);
            // no "-0" in the output
            let v = if v == 0.0 { 0.0 } else { v };
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Flat JSON form of an [`UnmixReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub rel_error: f64,
    pub avg_sparsity: f64,
    pub nnz: usize,
    pub per_column_sparsity: Vec<usize>,
    pub elapsed_path_ms: f64,
    pub elapsed_select_ms: f64,
    pub mode: String,
    pub budget: Option<usize>,
}

impl ReportJson {
    pub fn new(report: &UnmixReport, mode: &Mode) -> Self {
        Self {
            rel_error: report.rel_error,
            avg_sparsity: report.avg_sparsity,
            nnz: report.nnz,
            per_column_sparsity: report.per_column_sparsity.clone(),
            elapsed_path_ms: report.elapsed_path_ms,
            elapsed_select_ms: report.elapsed_select_ms,
            mode: mode.name().to_string(),
            budget: mode.budget(),
        }
    }
}

pub fn write_report_json(report: &UnmixReport, mode: &Mode, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &ReportJson::new(report, mode))
        .map_err(|e| CliError::io(path, e.into()))?;
    out.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Pixel value for `v` in a row whose maximum is `max`; rounds half up.
pub fn scale_to_byte(v: f64, max: f64) -> u8 {
    if max <= 0.0 {
        return 0;
    }
    (255.0 * v / max + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Path of the map for row `i` inside `dir`.
pub fn map_path(dir: &Path, i: usize) -> PathBuf {
    dir.join(format!("abundance_{i:03}.pgm"))
}

/// Writes one binary PGM per row of `H`, reshaped row-major to
/// `width × height` and scaled so the row maximum is 255.
pub fn export_abundance_maps(
    h: &DenseMatrix,
    width: usize,
    height: usize,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    if width * height != h.cols() {
        return Err(CliError::ShapeMismatch(format!(
            "{width} x {height} map does not hold {} columns",
            h.cols()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::with_capacity(h.rows());
    for i in 0..h.rows() {
        let row = h.row(i);
        let max = row.iter().copied().fold(0.0, f64::max);
        let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
        bytes.extend(row.iter().map(|&v| scale_to_byte(v, max)));
        let path = map_path(dir, i);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
