//! Text container for instances.
//!
//! ```text
//! kind=lasso seed=42 m=100 n=200 mu=1.0
//! matrix A 100 200
//! <100 lines of 200 comma-separated values>
//! vector b 100
//! <one line of 100 comma-separated values>
//! ```
//!
//! Values use the shortest representation that round-trips exactly, so a
//! fixed seed always serializes to the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use super::{Kind, ProblemInstance};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

fn join(values: impl Iterator<Item = f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.enumerate() {
        if i > 0 {
            line.push(',');
        }
        write!(line, "{v:?}").unwrap();
    }
    line
}

/// Serializes an instance.
pub fn write_instance(p: &ProblemInstance) -> String {
    let mut out = format!("kind={} seed={} m={} n={}", p.kind, p.seed, p.m, p.n);
    for (k, v) in &p.params {
        write!(out, " {k}={v:?}").unwrap();
    }
    out.push('\n');
    for (name, a) in &p.matrices {
        writeln!(out, "matrix {name} {} {}", a.nrows(), a.ncols()).unwrap();
        for i in 0..a.nrows() {
            out.push_str(&join(a.row(i).iter().copied()));
            out.push('\n');
        }
    }
    for (name, v) in &p.vectors {
        writeln!(out, "vector {name} {}", v.len()).unwrap();
        out.push_str(&join(v.iter().copied()));
        out.push('\n');
    }
    out
}

pub fn save_instance(p: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(p))?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

fn perr(line: usize, field: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Parse { line, field: field.into(), msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, field: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| perr(line, field, format!("cannot parse `{s}`")))
}

fn parse_row(line: usize, name: &str, text: &str, expected: usize) -> Result<Vec<f64>> {
    let text = text.trim();
    let fields: Vec<&str> = if text.is_empty() { Vec::new() } else { text.split(',').collect() };
    if fields.len() != expected {
        return Err(perr(line, name, format!("expected {expected} values, found {}", fields.len())));
    }
    fields.iter().enumerate().map(|(j, s)| parse_num(line, &format!("{name}[{j}]"), s)).collect()
}

/// Parses the text produced by [`write_instance`]; the result is validated
/// against its header.
pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "header", "empty file"))?;
    let mut kind = None;
    let mut seed = None;
    let mut m = None;
    let mut n = None;
    let mut params = std::collections::BTreeMap::new();
    for token in header.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| perr(hline, token, "expected key=value"))?;
        match key {
            "kind" => kind = Some(value.parse::<Kind>().map_err(|e| perr(hline, key, e.to_string()))?),
            "seed" => seed = Some(parse_num::<u64>(hline, key, value)?),
            "m" => m = Some(parse_num::<usize>(hline, key, value)?),
            "n" => n = Some(parse_num::<usize>(hline, key, value)?),
            _ => {
                params.insert(key.to_string(), parse_num::<f64>(hline, key, value)?);
            }
        }
    }
    let missing = |f: &str| perr(hline, f, "missing from header");
    let mut p = ProblemInstance::empty(
        kind.ok_or_else(|| missing("kind"))?,
        seed.ok_or_else(|| missing("seed"))?,
        m.ok_or_else(|| missing("m"))?,
        n.ok_or_else(|| missing("n"))?,
    );
    p.params = params;

    while let Some((ln, line)) = lines.next() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["matrix", name, rows, cols] => {
                let rows: usize = parse_num(ln, "rows", rows)?;
                let cols: usize = parse_num(ln, "cols", cols)?;
                let mut data = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    let (rl, row) = lines.next().ok_or_else(|| perr(ln, *name, format!("missing row {i}")))?;
                    data.extend(parse_row(rl, name, row, cols)?);
                }
                p.matrices.insert(name.to_string(), Matrix::from_row_slice(rows, cols, &data));
            }
            ["vector", name, len] => {
                let len: usize = parse_num(ln, "len", len)?;
                let (vl, row) = lines.next().ok_or_else(|| perr(ln, *name, "missing values line"))?;
                p.vectors.insert(name.to_string(), Vector::from_vec(parse_row(vl, name, row, len)?));
            }
            _ => return Err(perr(ln, "block", format!("expected a matrix or vector header, found `{line}`"))),
        }
    }
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_fused_lasso, gen_lasso, gen_matrix_game, gen_quadratic_l1};

    #[test]
    fn round_trip() {
        for p in [
            gen_lasso(6, 9, 1, 0.3).unwrap(),
            gen_fused_lasso(5, 7, 2, 5.0, 10.0).unwrap(),
            gen_matrix_game(3, 4, 3).unwrap(),
            gen_quadratic_l1(5, 4, 1.0).unwrap(),
        ] {
            let text = write_instance(&p);
            let back = parse_instance(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(write_instance(&back), text);
        }
    }

    #[test]
    fn file_round_trip_and_stable_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lasso.txt");
        let p = gen_lasso(10, 20, 42, 1.0).unwrap();
        save_instance(&p, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), p);
        let again = gen_lasso(10, 20, 42, 1.0).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), write_instance(&again));
    }

    #[test]
    fn wrong_dimension_header() {
        let text = write_instance(&gen_lasso(4, 6, 1, 1.0).unwrap()).replacen("m=4", "m=5", 1);
        assert!(matches!(parse_instance(&text), Err(Error::Dimension { .. })));
    }

    #[test]
    fn malformed_values_report_line_and_field() {
        let text = write_instance(&gen_lasso(2, 3, 1, 1.0).unwrap());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // Line 3 is the second row of A.
        lines[2] = lines[2].replacen(',', ",oops,", 1);
        match parse_instance(&lines.join("\n")) {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (3, "A")),
            other => panic!("unexpected {other:?}"),
        }
        lines[2] = "1.0,x,2.0".into();
        match parse_instance(&lines.join("\n")) {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (3, "A[1]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        assert!(matches!(parse_instance(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_instance("kind=lasso seed=1 m=2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("kind=ridge seed=1 m=2 n=2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance("kind=lasso seed=x m=2 n=2"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_instance("kind=lasso seed=1 m=1 n=1 mu=1\nbogus line"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
