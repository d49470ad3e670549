//! Plain-text matrix and vector formats.
//!
//! A matrix file holds the dimension `n` on its first line, then `n` lines of
//! exactly `n` characters from `{0,1}`. A vector file holds one line of `0`/`1`
//! characters. The trailing newline is optional in both.

use std::fs;
use std::path::Path;

use qbmm_core::BooleanMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_bits(line_no: usize, line: &str) -> Result<Vec<bool>, FormatError> {
    line.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(parse_err(line_no, format!("unexpected character {other:?}"))),
        })
        .collect()
}

/// Parses the matrix text format. Error line numbers are 1-based.
pub fn parse_matrix(text: &str) -> Result<BooleanMatrix, FormatError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().unwrap_or("");
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| parse_err(1, format!("expected dimension, found {header:?}")))?;
    if n == 0 {
        return Err(parse_err(1, "dimension must be positive"));
    }
    let mut rows = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if rows.len() == n {
            return Err(parse_err(line_no, format!("more than {n} rows")));
        }
        let row = parse_bits(line_no, line)?;
        if row.len() != n {
            return Err(parse_err(
                line_no,
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_err(rows.len() + 2, format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(BooleanMatrix::from_rows(&rows).expect("rows validated"))
}

/// Renders `m` in the matrix text format, with a trailing newline.
pub fn write_matrix(m: &BooleanMatrix) -> String {
    let n = m.dim();
    let mut out = String::with_capacity((n + 1) * n + 8);
    out.push_str(&n.to_string());
    out.push('\n');
    for i in 1..=n {
        for j in 1..=n {
            out.push(if m.get(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Parses a single `0`/`1` line.
pub fn parse_vector(text: &str) -> Result<Vec<bool>, FormatError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.contains('\n') {
        return Err(parse_err(2, "vector file must hold a single line"));
    }
    let bits = parse_bits(1, text)?;
    if bits.is_empty() {
        return Err(parse_err(1, "empty vector"));
    }
    Ok(bits)
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix_file(path: &Path) -> Result<BooleanMatrix, FormatError> {
    parse_matrix(&read(path)?)
}

pub fn read_vector_file(path: &Path) -> Result<Vec<bool>, FormatError> {
    parse_vector(&read(path)?)
}

pub fn write_matrix_file(path: &Path, m: &BooleanMatrix) -> Result<(), FormatError> {
    fs::write(path, write_matrix(m)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `<family>_n<n>_seed<seed>_A.txt` and the matching `_B` name.
pub fn instance_file_names(family: &str, n: usize, seed: u64) -> (String, String) {
    let stem = format!("{family}_n{n}_seed{seed}");
    (format!("{stem}_A.txt"), format!("{stem}_B.txt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_trailing_newline() {
        let m = parse_matrix("2\n10\n01").unwrap();
        assert_eq!(m, BooleanMatrix::identity(2));
        assert_eq!(parse_matrix("2\n10\n01\n").unwrap(), m);
        assert_eq!(write_matrix(&m), "2\n10\n01\n");
    }

    #[test]
    fn errors_name_the_line() {
        let msg = |s: &str| parse_matrix(s).unwrap_err().to_string();
        assert!(msg("3\n101\n01\n111\n").starts_with("line 3:"));
        assert!(msg("2\n10\n0x\n").starts_with("line 3:"));
        assert!(msg("x\n").starts_with("line 1:"));
        assert!(msg("2\n10\n").starts_with("line 3:"));
        assert!(msg("1\n1\n0\n").starts_with("line 3:"));
        assert!(msg("0\n").starts_with("line 1:"));
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1010\n").unwrap(), vec![true, false, true, false]);
        assert!(parse_vector("10\n01\n").is_err());
        assert!(parse_vector("").is_err());
    }

    #[test]
    fn file_names() {
        let (a, b) = instance_file_names("threshold", 16, 3);
        assert_eq!(a, "threshold_n16_seed3_A.txt");
        assert_eq!(b, "threshold_n16_seed3_B.txt");
    }
}
