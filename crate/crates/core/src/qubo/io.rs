//! Sparse coordinate text formats.
//!
//! QUBO: a header line `num_vars offset alpha beta`, then one `i j value`
//! line per nonzero with `i <= j`.
//!
//! Ising: a header line `num_spins constant`, then `h <count>` followed by
//! `i value` lines, then `J <count>` followed by `i j value` lines.
//!
//! Floats use Rust's shortest round-trip formatting, so a write/read cycle is
//! lossless.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{IsingProblem, QuboMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuboFile {
    pub matrix: QuboMatrix,
    pub alpha: f64,
    pub beta: f64,
}

pub fn write_qubo(path: impl AsRef<Path>, q: &QuboMatrix, alpha: f64, beta: f64) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{} {} {} {}", q.num_vars(), q.offset(), alpha, beta)?;
    for (i, j, v) in q.entries() {
        writeln!(out, "{i} {j} {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ising(path: impl AsRef<Path>, is: &IsingProblem) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{} {}", is.num_spins(), is.constant)?;
    let fields: Vec<_> = is.h.iter().enumerate().filter(|(_, h)| **h != 0.0).collect();
    writeln!(out, "h {}", fields.len())?;
    for (i, h) in fields {
        writeln!(out, "{i} {h}")?;
    }
    writeln!(out, "J {}", is.couplings.len())?;
    for &(i, j, v) in &is.couplings {
        writeln!(out, "{i} {j} {v}")?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<'a> {
    path: &'a Path,
    total: usize,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            total: text.lines().count(),
            inner: text.lines().enumerate(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            column: 1,
            message: message.into(),
        }
    }

    /// Next non-blank line as whitespace-separated fields.
    fn next_fields(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let fields: Vec<_> = line.split_whitespace().collect();
            if !fields.is_empty() {
                return Some((i + 1, fields));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        self.next_fields()
            .ok_or_else(|| self.err(self.total, format!("unexpected end of file, expected {what}")))
    }

    fn parse<T: FromStr>(&self, line: usize, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(line, format!("invalid {what} `{field}`")))
    }

    fn arity(&self, line: usize, fields: &[&str], n: usize) -> Result<()> {
        if fields.len() != n {
            return Err(self.err(line, format!("expected {n} fields, found {}", fields.len())));
        }
        Ok(())
    }
}

pub fn read_qubo(path: impl AsRef<Path>) -> Result<QuboFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = Lines::new(path, &text);
    let (ln, head) = lines.expect("header")?;
    lines.arity(ln, &head, 4)?;
    let n: usize = lines.parse(ln, head[0], "variable count")?;
    let offset: f64 = lines.parse(ln, head[1], "offset")?;
    let alpha: f64 = lines.parse(ln, head[2], "alpha")?;
    let beta: f64 = lines.parse(ln, head[3], "beta")?;
    let mut entries = Vec::new();
    while let Some((ln, f)) = lines.next_fields() {
        lines.arity(ln, &f, 3)?;
        let i: usize = lines.parse(ln, f[0], "index")?;
        let j: usize = lines.parse(ln, f[1], "index")?;
        let v: f64 = lines.parse(ln, f[2], "value")?;
        if i > j || j >= n {
            return Err(lines.err(ln, format!("entry ({i}, {j}) must satisfy i <= j < {n}")));
        }
        entries.push((i, j, v));
    }
    Ok(QuboFile {
        matrix: QuboMatrix::from_entries(n, offset, entries),
        alpha,
        beta,
    })
}

pub fn read_ising(path: impl AsRef<Path>) -> Result<IsingProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = Lines::new(path, &text);
    let (ln, head) = lines.expect("header")?;
    lines.arity(ln, &head, 2)?;
    let n: usize = lines.parse(ln, head[0], "spin count")?;
    let constant: f64 = lines.parse(ln, head[1], "constant")?;

    let (ln, sec) = lines.expect("`h` section")?;
    if sec.len() != 2 || sec[0] != "h" {
        return Err(lines.err(ln, "expected `h <count>`"));
    }
    let count: usize = lines.parse(ln, sec[1], "count")?;
    let mut h = vec![0.0; n];
    for _ in 0..count {
        let (ln, f) = lines.expect("field entry")?;
        lines.arity(ln, &f, 2)?;
        let i: usize = lines.parse(ln, f[0], "index")?;
        if i >= n {
            return Err(lines.err(ln, format!("spin {i} out of range")));
        }
        h[i] = lines.parse(ln, f[1], "value")?;
    }

    let (ln, sec) = lines.expect("`J` section")?;
    if sec.len() != 2 || sec[0] != "J" {
        return Err(lines.err(ln, "expected `J <count>`"));
    }
    let count: usize = lines.parse(ln, sec[1], "count")?;
    let mut couplings = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, f) = lines.expect("coupling entry")?;
        lines.arity(ln, &f, 3)?;
        let i: usize = lines.parse(ln, f[0], "index")?;
        let j: usize = lines.parse(ln, f[1], "index")?;
        if i >= j || j >= n {
            return Err(lines.err(ln, format!("coupling ({i}, {j}) must satisfy i < j < {n}")));
        }
        couplings.push((i, j, lines.parse(ln, f[2], "value")?));
    }
    Ok(IsingProblem { h, couplings, constant })
}
