//! Series files: a `# stablevar v1 <json-config>` header line, then one value
//! per line or `index,value` pairs.

use std::io::{self, BufRead, Write};

use serde::{de::DeserializeOwned, Serialize};
use thiserror::Error;

pub const HEADER_PREFIX: &str = "# stablevar v1";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input contains no values")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A parsed series file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    /// Raw JSON after the header prefix, if the file had a header.
    pub header: Option<String>,
    pub values: Vec<f64>,
}

impl SeriesFile {
    pub fn config<T: DeserializeOwned>(&self) -> Option<serde_json::Result<T>> {
        self.header.as_deref().map(serde_json::from_str)
    }
}

/// Writes the header and one value per line. Values use Rust's shortest
/// round-trip formatting.
pub fn write_series<W: Write, C: Serialize>(
    mut out: W,
    config: &C,
    values: &[f64],
) -> io::Result<()> {
    let json = serde_json::to_string(config).map_err(io::Error::other)?;
    writeln!(out, "{HEADER_PREFIX} {json}")?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()
}

/// Reads a series. Blank lines and `#` comments are skipped; a data line is
/// either `value` or `index,value`.
pub fn read_series<R: BufRead>(input: R) -> Result<SeriesFile, CsvError> {
    let mut header = None;
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text.starts_with('#') {
            if lineno == 1 {
                if let Some(json) = text.strip_prefix(HEADER_PREFIX) {
                    header = Some(json.trim().to_string());
                }
            }
            continue;
        }
        let field = match text.split_once(',') {
            Some((index, value)) => {
                index.trim().parse::<u64>().map_err(|_| CsvError::Parse {
                    line: lineno,
                    message: format!("bad index {:?}", index.trim()),
                })?;
                if value.contains(',') {
                    return Err(CsvError::Parse {
                        line: lineno,
                        message: "too many fields".into(),
                    });
                }
                value.trim()
            }
            None => text,
        };
        let v: f64 = field.parse().map_err(|_| CsvError::Parse {
            line: lineno,
            message: format!("cannot parse {field:?} as a number"),
        })?;
        if !v.is_finite() {
            return Err(CsvError::Parse {
                line: lineno,
                message: format!("non-finite value {field}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(SeriesFile { header, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let vals = vec![0.0, -1.5, 1e-300, 0.1, 12345.678];
        let mut buf = Vec::new();
        write_series(&mut buf, &serde_json::json!({"n": 3}), &vals).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# stablevar v1 {\"n\":3}\n"));
        let back = read_series(&buf[..]).unwrap();
        assert_eq!(back.values, vals);
        let cfg: serde_json::Value = back.config().unwrap().unwrap();
        assert_eq!(cfg["n"], 3);
    }

    #[test]
    fn indexed_lines() {
        let f = read_series("0,1.0\n1, 2.5\n\n2,-3\n".as_bytes()).unwrap();
        assert_eq!(f.values, vec![1.0, 2.5, -3.0]);
        assert!(f.header.is_none());
    }

    #[test]
    fn reports_line_numbers() {
        match read_series("# stablevar v1 {}\n1.0\nabc\n".as_bytes()) {
            Err(CsvError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_series("1;2\n".as_bytes()),
            Err(CsvError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_series("1,2,3\n".as_bytes()),
            Err(CsvError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_series("nan\n".as_bytes()),
            Err(CsvError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(read_series("".as_bytes()), Err(CsvError::Empty)));
        assert!(matches!(
            read_series("# stablevar v1 {}\n".as_bytes()),
            Err(CsvError::Empty)
        ));
    }
}
