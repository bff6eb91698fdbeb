//! Plain-text point-set format.
//!
//! ```text
//! # optional comments
//! n d
//! x11 x12 ... x1d
//! ...
//! ```
//! Floats are written with Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::Dataset;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut header: Option<(usize, usize)> = None;
    let mut data = Vec::new();
    let mut rows = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match header {
            None => {
                let mut it = trimmed.split_whitespace();
                let mut field = |name: &str| -> Result<usize> {
                    it.next()
                        .ok_or_else(|| parse_err(lineno, format!("missing {name} in header")))?
                        .parse::<usize>()
                        .map_err(|e| parse_err(lineno, format!("bad {name}: {e}")))
                };
                let n = field("n")?;
                let d = field("d")?;
                if it.next().is_some() {
                    return Err(parse_err(lineno, "header must be 'n d'"));
                }
                header = Some((n, d));
                data.reserve(n * d);
            }
            Some((n, d)) => {
                if rows == n {
                    return Err(parse_err(lineno, format!("more than {n} point rows")));
                }
                let before = data.len();
                for tok in trimmed.split_whitespace() {
                    let v = tok
                        .parse::<f64>()
                        .map_err(|e| parse_err(lineno, format!("bad coordinate '{tok}': {e}")))?;
                    data.push(v);
                }
                if data.len() - before != d {
                    return Err(parse_err(
                        lineno,
                        format!("expected {d} coordinates, found {}", data.len() - before),
                    ));
                }
                rows += 1;
            }
        }
    }
    let (n, d) = header.ok_or_else(|| parse_err(0, "missing 'n d' header"))?;
    if rows != n {
        return Err(parse_err(0, format!("header declares {n} points, found {rows}")));
    }
    Dataset::new(n, d, data)
}

pub fn format_dataset(data: &Dataset) -> String {
    let mut s = String::with_capacity(data.n() * data.d() * 20);
    let _ = writeln!(s, "{} {}", data.n(), data.d());
    for row in data.rows() {
        let mut first = true;
        for v in row {
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_dataset<W: Write>(mut w: W, data: &Dataset) -> Result<()> {
    w.write_all(format_dataset(data).as_bytes())?;
    Ok(())
}

pub fn load_dataset(path: &std::path::Path) -> Result<Dataset> {
    let f = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(f))
}
