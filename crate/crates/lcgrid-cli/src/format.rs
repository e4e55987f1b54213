//! The on-disk grid-function format.
//!
//! A small line-oriented text format, one value per line after a fixed
//! header:
//!
//! ```text
//! lcgrid grid-function v1
//! kind logconcave            # or: convex
//! dim 2
//! axis 0 -6 6 97             # lo hi count
//! axis 1 -6 6 97
//! values 9409
//! 1
//! 0.99316...
//! ```
//!
//! Values appear in the engine's row-major linear order. They are written
//! with Rust's shortest round-trip float formatting, so write-then-read
//! reproduces every bit; `inf` marks `+infinity` and is only legal in
//! `convex` files (a log-concave density is finite everywhere).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lcgrid::func::ConvexityCheck;
use lcgrid::{AxisSpec, ConvexFnGrid, GridSpec, LogConcaveFnGrid};

use crate::error::{io_err, CliError, Result};

pub const MAGIC: &str = "lcgrid grid-function v1";

/// A parsed file: either a density or a convex profile.
pub enum GridFile {
    LogConcave(LogConcaveFnGrid),
    Convex(ConvexFnGrid),
}

impl GridFile {
    pub fn spec(&self) -> &GridSpec {
        match self {
            GridFile::LogConcave(f) => f.spec(),
            GridFile::Convex(p) => p.spec(),
        }
    }

    pub fn into_logconcave(self, path: &Path) -> Result<LogConcaveFnGrid> {
        match self {
            GridFile::LogConcave(f) => Ok(f),
            GridFile::Convex(_) => Err(CliError::Usage(format!(
                "{}: expected a logconcave file, found kind convex",
                path.display()
            ))),
        }
    }

    pub fn into_convex(self, path: &Path) -> Result<ConvexFnGrid> {
        match self {
            GridFile::Convex(p) => Ok(p),
            GridFile::LogConcave(_) => Err(CliError::Usage(format!(
                "{}: expected a convex file, found kind logconcave",
                path.display()
            ))),
        }
    }
}

fn render(spec: &GridSpec, kind: &str, values: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "dim {}", spec.dim());
    for (k, ax) in spec.axes().iter().enumerate() {
        let _ = writeln!(out, "axis {k} {} {} {}", ax.lo, ax.hi, ax.count);
    }
    let _ = writeln!(out, "values {}", values.len());
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_logconcave(path: &Path, f: &LogConcaveFnGrid) -> Result<()> {
    fs::write(path, render(f.spec(), "logconcave", f.values())).map_err(|e| io_err(path, e))
}

pub fn write_convex(path: &Path, phi: &ConvexFnGrid) -> Result<()> {
    fs::write(path, render(phi.spec(), "convex", phi.values())).map_err(|e| io_err(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

struct Lines<'a> {
    path: &'a Path,
    iter: std::str::Lines<'a>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.line += 1;
        self.iter
            .next()
            .ok_or_else(|| parse_err(self.path, self.line, format!("missing {what}")))
    }
}

pub fn read(path: &Path, cap: usize) -> Result<GridFile> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = Lines { path, iter: text.lines(), line: 0 };

    let magic = lines.next("header")?;
    if magic != MAGIC {
        return Err(parse_err(path, lines.line, format!("expected `{MAGIC}`, found `{magic}`")));
    }

    let kind_line = lines.next("kind line")?;
    let kind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| parse_err(path, lines.line, "expected `kind logconcave|convex`"))?;
    if kind != "logconcave" && kind != "convex" {
        return Err(parse_err(path, lines.line, format!("unknown kind `{kind}`")));
    }

    let dim_line = lines.next("dim line")?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(path, lines.line, "expected `dim <1..3>`"))?;

    let mut axes = Vec::with_capacity(dim);
    for k in 0..dim {
        let ax_line = lines.next("axis line")?;
        let fields: Vec<&str> = ax_line.split_whitespace().collect();
        let parsed = (|| -> Option<AxisSpec> {
            if fields.len() != 5 || fields[0] != "axis" || fields[1].parse::<usize>().ok()? != k {
                return None;
            }
            let lo: f64 = fields[2].parse().ok()?;
            let hi: f64 = fields[3].parse().ok()?;
            let count: usize = fields[4].parse().ok()?;
            AxisSpec::new(lo, hi, count).ok()
        })();
        axes.push(parsed.ok_or_else(|| {
            parse_err(path, lines.line, format!("expected `axis {k} <lo> <hi> <count>`"))
        })?);
    }
    let spec = GridSpec::with_cap(axes, cap).map_err(|e| parse_err(path, lines.line, e.to_string()))?;

    let count_line = lines.next("values line")?;
    let count: usize = count_line
        .strip_prefix("values ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(path, lines.line, "expected `values <count>`"))?;
    if count != spec.total_nodes() {
        return Err(parse_err(
            path,
            lines.line,
            format!("value count {count} does not match the grid's {} nodes", spec.total_nodes()),
        ));
    }

    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let raw = lines.next("value")?;
        let v: f64 = raw
            .parse()
            .map_err(|_| parse_err(path, lines.line, format!("not a number: `{raw}`")))?;
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(parse_err(path, lines.line, format!("value `{raw}` is not admissible")));
        }
        if kind == "logconcave" && !v.is_finite() {
            return Err(parse_err(path, lines.line, "infinite value in a logconcave file"));
        }
        values.push(v);
    }
    if let Some(extra) = lines.iter.next() {
        if !extra.trim().is_empty() {
            return Err(parse_err(path, lines.line + 1, "trailing content after the values"));
        }
    }

    // One-cell allowance: rearranged (Steiner/Asplund) outputs are
    // log-concave only up to a one-cell defect, and the format must accept
    // anything the engine can emit.
    let line = lines.line;
    if kind == "logconcave" {
        let f = LogConcaveFnGrid::with_check(spec, values, ConvexityCheck::OneCellAllowance)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        Ok(GridFile::LogConcave(f))
    } else {
        let p = ConvexFnGrid::with_check(spec, values, ConvexityCheck::OneCellAllowance)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        Ok(GridFile::Convex(p))
    }
}
