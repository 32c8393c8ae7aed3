//! Result files. Every write goes to a temporary file in the target
//! directory and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub const DIST_FILE: &str = "dist.csv";
pub const CHI_FILE: &str = "chi.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SWEEP_FILE: &str = "sweep.csv";

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn two_columns(header: &str, xs: &[f64], ys: &[f64]) -> String {
    csv(header, xs.iter().zip(ys).map(|(&x, &y)| vec![x, y]))
}

pub fn chi_csv(lambdas: &[f64], values: &[C64]) -> String {
    csv(
        "lambda,re,im",
        lambdas
            .iter()
            .zip(values)
            .map(|(&l, v)| vec![l, v.re, v.im]),
    )
}

pub fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Numerical(format!("report is not representable as JSON: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Reads a numeric CSV, checking the header.
pub fn read_csv(path: &Path, header: &str) -> CliResult<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let found = lines.next().unwrap_or("").trim();
    if found != header {
        return Err(CliError::Validation(format!(
            "{}: expected header `{header}`, found `{found}`",
            path.display()
        )));
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, line)| {
            let row: Result<Vec<f64>, _> =
                line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match row {
                Ok(r) if r.len() == width => Ok(r),
                _ => Err(CliError::Validation(format!(
                    "{}: malformed row {}",
                    path.display(),
                    k + 2
                ))),
            }
        })
        .collect()
}

pub struct OutputDir(pub PathBuf);

impl OutputDir {
    pub fn file(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: &[u8]) -> CliResult<()> {
        write_atomic(&self.file(name), contents)
    }
}
