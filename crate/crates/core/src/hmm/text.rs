//! Plain-text parameter files.
//!
//! ```text
//! n_states
//! prior (one row)
//! transition (n_states rows)
//! emission (n_states rows)
//! ```
//!
//! Values are whitespace separated. Blank lines and lines starting with `#`
//! are ignored. Values are written in shortest round-trip form, so a file
//! reproduces the parameters exactly.

use std::io::{self, Write};

use super::{HmmParams, Matrix};

/// A problem at a specific (1-based) line of a parameter file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

pub fn write_params(out: &mut impl Write, params: &HmmParams) -> io::Result<()> {
    writeln!(out, "{}", params.n_states())?;
    write_row(out, &params.prior)?;
    for row in params.transition.iter_rows() {
        write_row(out, row)?;
    }
    for row in params.emission.iter_rows() {
        write_row(out, row)?;
    }
    Ok(())
}

fn write_row(out: &mut impl Write, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            out.write_all(b" ")?;
        }
        write!(out, "{v}")?;
        first = false;
    }
    out.write_all(b"\n")
}

/// Parses a parameter block from `lines`, given as `(line_number, text)`.
///
/// The result is validated; an invariant violation is reported at the last
/// line of the block.
pub fn read_params<'a>(
    lines: impl IntoIterator<Item = (usize, &'a str)>,
) -> Result<HmmParams, LineError> {
    let mut rows = lines
        .into_iter()
        .map(|(no, text)| (no, text.trim()))
        .filter(|(_, text)| !text.is_empty() && !text.starts_with('#'));

    let (line, header) = rows.next().ok_or_else(|| LineError {
        line: 0,
        message: "missing n_states line".into(),
    })?;
    let n: usize = header.parse().map_err(|_| LineError {
        line,
        message: format!("expected n_states, found {header:?}"),
    })?;
    if n == 0 {
        return Err(LineError {
            line,
            message: "n_states must be positive".into(),
        });
    }

    let mut last_line = line;
    let mut next_row = |what: &str| -> Result<Vec<f64>, LineError> {
        let (line, text) = rows.next().ok_or_else(|| LineError {
            line: last_line + 1,
            message: format!("missing {what} row"),
        })?;
        last_line = line;
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| LineError {
                    line,
                    message: format!("invalid number {tok:?} in {what} row"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != n {
            return Err(LineError {
                line,
                message: format!("{what} row has {} values, expected {n}", values.len()),
            });
        }
        Ok(values)
    };

    let prior = next_row("prior")?;
    let transition = (0..n)
        .map(|_| next_row("transition"))
        .collect::<Result<Vec<_>, _>>()?;
    let emission = (0..n)
        .map(|_| next_row("emission"))
        .collect::<Result<Vec<_>, _>>()?;
    let params = HmmParams {
        prior,
        transition: Matrix::from_rows(transition).expect("rows have equal length"),
        emission: Matrix::from_rows(emission).expect("rows have equal length"),
    };
    params.validate().map_err(|v| LineError {
        line: last_line,
        message: v.0,
    })?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
        text.lines().enumerate().map(|(i, l)| (i + 1, l))
    }

    #[test]
    fn parses_small_file() {
        let text = "2\n0.99 0.01\n0.9 0.1\n0.1 0.9\n\n# emission\n0.8 0.2\n0.3 0.7\n";
        let params = read_params(numbered(text)).unwrap();
        assert_eq!(params.prior, vec![0.99, 0.01]);
        assert_eq!(params.emission[(1, 0)], 0.3);
    }

    #[test]
    fn round_trip_is_exact() {
        let a = Matrix::from_rows(vec![
            vec![1.0 / 3.0, 2.0 / 3.0],
            vec![1e-10, 1.0 - 1e-10],
        ])
        .unwrap();
        let params = HmmParams::new(vec![0.1, 0.9], a.clone(), a).unwrap();
        let mut buf = Vec::new();
        write_params(&mut buf, &params).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('e'), "decimal notation expected: {text}");
        assert_eq!(read_params(numbered(&text)).unwrap(), params);
    }

    #[test]
    fn bad_number_reports_line() {
        let text = "2\n0.5 0.5\n0.5 x\n0.5 0.5\n1 0\n0 1\n";
        let err = read_params(numbered(text)).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn short_row_reports_line() {
        let text = "2\n0.5 0.5\n0.5 0.5\n1\n";
        assert_eq!(read_params(numbered(text)).unwrap_err().line, 4);
    }

    #[test]
    fn truncated_file() {
        let err = read_params(numbered("2\n0.5 0.5\n")).unwrap_err();
        assert!(err.message.contains("missing transition"));
    }

    #[test]
    fn non_stochastic_rejected() {
        let text = "2\n0.5 0.5\n0.5 0.4\n0.5 0.5\n1 0\n0 1\n";
        let err = read_params(numbered(text)).unwrap_err();
        assert!(err.message.contains("transition row 1"), "{}", err.message);
    }
}
