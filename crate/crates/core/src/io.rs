//! Matrix CSV files.
//!
//! The first line is `rows,cols`; each following line holds one row of
//! comma-separated values written with 17 significant digits, so a write
//! followed by a read reproduces the matrix bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matlib::Matrix;

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_csv(a: &Matrix) -> String {
    let mut out = format!("{},{}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(a[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str, path: &str) -> Result<Matrix> {
    let perr = |line: usize, reason: String| Error::Parse {
        path: path.to_string(),
        line,
        reason,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
    let dims: Vec<&str> = header.split(',').map(str::trim).collect();
    if dims.len() != 2 {
        return Err(perr(1, format!("expected 'rows,cols', got '{header}'")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| perr(1, format!("bad dimension '{s}'")))
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        seen += 1;
        if seen > rows {
            return Err(perr(lineno, format!("more than {rows} data rows")));
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| perr(lineno, format!("bad number '{}'", field.trim())))?;
            if !v.is_finite() {
                return Err(perr(lineno, format!("non-finite entry '{}'", field.trim())));
            }
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(perr(
                lineno,
                format!("expected {cols} values, got {}", data.len() - before),
            ));
        }
    }
    if seen != rows {
        return Err(perr(
            text.lines().count(),
            format!("expected {rows} data rows, got {seen}"),
        ));
    }
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    fs::write(path, matrix_to_csv(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path)?;
    matrix_from_csv(&text, &path.display().to_string())
}
