//! Plain-text matrix files: a line holding `N`, then `N` rows of `N`
//! whitespace-separated numbers. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error)]
pub enum MatrixFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("file ends after {got} of {expected} rows")]
    Truncated { expected: usize, got: usize },
}

fn parse_err(line: usize, message: impl Into<String>) -> MatrixFileError {
    MatrixFileError::Parse { line, message: message.into() }
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, MatrixFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let n: usize = header
        .parse()
        .map_err(|_| parse_err(line, format!("expected the matrix size, found `{header}`")))?;
    if n == 0 {
        return Err(parse_err(line, "matrix size must be positive"));
    }

    let mut m = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (line, text) in lines {
        if rows == n {
            return Err(parse_err(line, format!("unexpected data after {n} rows")));
        }
        let mut cols = 0;
        for token in text.split_whitespace() {
            if cols == n {
                return Err(parse_err(line, format!("more than {n} values")));
            }
            let v: f64 = token
                .parse()
                .map_err(|_| parse_err(line, format!("`{token}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("`{token}` is not finite")));
            }
            m[(rows, cols)] = v;
            cols += 1;
        }
        if cols < n {
            return Err(parse_err(line, format!("expected {n} values, found {cols}")));
        }
        rows += 1;
    }
    if rows < n {
        return Err(MatrixFileError::Truncated { expected: n, got: rows });
    }
    Ok(m)
}

/// Shortest round-trip representation of every entry.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{:?}", m[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, MatrixFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| MatrixFileError::Io { path: path.display().to_string(), source })?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), MatrixFileError> {
    std::fs::write(path, format_matrix(m))
        .map_err(|source| MatrixFileError::Io { path: path.display().to_string(), source })
}
