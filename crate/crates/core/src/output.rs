//! Flat record emission as CSV (header row, RFC 4180 quoting) or as a JSON
//! array of objects. Output is a pure function of the rows.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// A serializable row with a fixed column list matching its field order.
pub trait Record: Serialize {
    const COLUMNS: &'static [&'static str];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub fn write_records<T: Record, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(T::COLUMNS)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn to_string<T: Record>(rows: &[T], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    write_records(rows, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv and json writers emit UTF-8"))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit<T: Record>(rows: &[T], format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_records(rows, format, BufWriter::new(File::create(p)?)),
        None => write_records(rows, format, io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: String,
        value: f64,
    }

    impl Record for Row {
        const COLUMNS: &'static [&'static str] = &["name", "value"];
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(to_string::<Row>(&[], Format::Csv).unwrap(), "name,value\n");
        assert_eq!(to_string::<Row>(&[], Format::Json).unwrap(), "[]\n");
    }

    #[test]
    fn one_row_and_quoting() {
        let rows = [Row { name: "a,b \"c\"".into(), value: 0.5 }];
        assert_eq!(to_string(&rows, Format::Csv).unwrap(), "name,value\n\"a,b \"\"c\"\"\",0.5\n");
        let json = to_string(&rows, Format::Json).unwrap();
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0]["value"], 0.5);
    }

    #[test]
    fn emission_is_byte_stable() {
        let rows = [Row { name: "x".into(), value: 1.0 / 3.0 }, Row { name: "y".into(), value: 2.0 }];
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Json] {
            let a = dir.path().join(format!("a.{format}"));
            let b = dir.path().join(format!("b.{format}"));
            emit(&rows, format, Some(&a)).unwrap();
            emit(&rows, format, Some(&b)).unwrap();
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
    }

    #[test]
    fn unwritable_path_errors() {
        let rows: [Row; 0] = [];
        assert!(emit(&rows, Format::Csv, Some(Path::new("/nonexistent/dir/out.csv"))).is_err());
    }
}
