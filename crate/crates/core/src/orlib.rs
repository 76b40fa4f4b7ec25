//! OR-Library `mknap` reader and result-table writers.
//!
//! The `mknap` layout is a flat stream of whitespace-separated numbers:
//! the problem count `K`, then for each problem `n m optimum`, `n` profits,
//! `m` rows of `n` constraint coefficients and `m` capacities. An optimum of
//! `0` means unknown.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::bench::{CellStats, Fig2Row};
use crate::error::{Error, Result};
use crate::mkp::MkpInstance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("input ended at token {index} while reading {what}")]
    Truncated { index: usize, what: &'static str },

    #[error("token {index} (line {line}) is not a number: {token:?}")]
    NotNumeric {
        index: usize,
        line: usize,
        token: String,
    },

    #[error("token {index} (line {line}): {message}")]
    Format {
        index: usize,
        line: usize,
        message: String,
    },
}

/// The problems of one `mknap` file, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkFile {
    pub problems: Vec<MkpInstance>,
    pub source_path: String,
}

impl BenchmarkFile {
    /// Problem `k`, 1-based as in the OR-Library naming.
    pub fn problem(&self, k: usize) -> Option<&MkpInstance> {
        k.checked_sub(1).and_then(|i| self.problems.get(i))
    }
}

struct Tokens<'a> {
    iter: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    index: usize,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let iter: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .flat_map(|(l, line)| line.split_whitespace().map(move |t| (l + 1, t))),
        );
        Self {
            iter: iter.peekable(),
            index: 0,
            line: 1,
        }
    }

    fn real(&mut self, what: &'static str) -> Result<f64, ParseError> {
        let Some((line, tok)) = self.iter.next() else {
            return Err(ParseError::Truncated {
                index: self.index + 1,
                what,
            });
        };
        self.index += 1;
        self.line = line;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError::NotNumeric {
                index: self.index,
                line,
                token: tok.to_string(),
            }),
        }
    }

    fn count(&mut self, what: &'static str) -> Result<usize, ParseError> {
        let v = self.real(what)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(self.format(format!("{what} must be a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }

    fn format(&self, message: String) -> ParseError {
        ParseError::Format {
            index: self.index,
            line: self.line,
            message,
        }
    }

    fn is_done(&mut self) -> bool {
        self.iter.peek().is_none()
    }
}

/// Parses an OR-Library `mknap` text. Problems are named `MKP1`, `MKP2`, ...
pub fn parse_orlib(text: &str) -> Result<BenchmarkFile, ParseError> {
    let mut tokens = Tokens::new(text);
    let count = tokens.count("problem count")?;
    let mut problems = Vec::with_capacity(count.min(1024));
    for k in 1..=count {
        let n = tokens.count("item count")?;
        let m = tokens.count("constraint count")?;
        if n == 0 || m == 0 {
            return Err(tokens.format(format!("problem {k} has n={n}, m={m}")));
        }
        let optimum = tokens.real("optimum")?;
        let profits = (0..n)
            .map(|_| tokens.real("profits"))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = (0..m)
            .map(|_| (0..n).map(|_| tokens.real("constraint coefficients")).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let capacities = (0..m)
            .map(|_| tokens.real("capacities"))
            .collect::<Result<Vec<_>, _>>()?;
        let instance = MkpInstance::new(format!("MKP{k}"), profits, weights, capacities, Some(optimum))
            .map_err(|e| tokens.format(format!("problem {k}: {e}")))?;
        problems.push(instance);
    }
    if !tokens.is_done() {
        return Err(tokens.format(format!("trailing data after {count} problems")));
    }
    Ok(BenchmarkFile {
        problems,
        source_path: String::new(),
    })
}

/// Reads and parses an `mknap` file from disk.
pub fn load_file(path: impl AsRef<Path>) -> Result<BenchmarkFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut file = parse_orlib(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    file.source_path = path.display().to_string();
    Ok(file)
}

/// Serializes instances back to `mknap` token order, one problem section
/// per block. Unknown optima are written as `0`.
pub fn to_orlib_text(problems: &[MkpInstance]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", problems.len());
    let join = |vals: &[f64]| {
        vals.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for p in problems {
        let _ = writeln!(out, "{} {} {}", p.n(), p.m(), p.known_optimum().unwrap_or(0.0));
        let _ = writeln!(out, "{}", join(p.profits()));
        for i in 0..p.m() {
            let _ = writeln!(out, "{}", join(p.weight_row(i)));
        }
        let _ = writeln!(out, "{}", join(p.capacities()));
    }
    out
}

pub const RESULTS_HEADER: [&str; 9] = [
    "benchmark",
    "coordinator",
    "swarm_size",
    "inner_iters",
    "replications",
    "rpe",
    "cpu_mean_s",
    "best",
    "optimum",
];

fn csv_writer<W: io::Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

/// Writes one row per cell, sorted by benchmark, coordinator, swarm size
/// (then inner iterations). RPE is printed with 5 decimals.
pub fn write_results_csv<W: io::Write>(cells: &[CellStats], sink: W) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::invalid("no result cells to write"));
    }
    let mut sorted: Vec<&CellStats> = cells.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut w = csv_writer(sink);
    w.write_record(RESULTS_HEADER)?;
    for c in sorted {
        w.write_record([
            c.benchmark.clone(),
            c.coordinator.label().to_string(),
            c.swarm_size.to_string(),
            c.inner_iters.to_string(),
            c.replications.to_string(),
            format!("{:.5}", c.rpe),
            format!("{:.4}", c.cpu_mean_s),
            format!("{}", c.best_found),
            format!("{}", c.f_opt),
        ])?;
    }
    w.flush().map_err(|e| Error::Write(e.into()))?;
    Ok(())
}

/// Plot-ready averaged-RPE rows.
pub fn write_fig2_csv<W: io::Write>(rows: &[Fig2Row], sink: W) -> Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(["benchmark", "inner_iters", "coordinator", "mean_rpe"])?;
    for r in rows {
        w.write_record([
            r.benchmark.clone(),
            r.inner_iters.to_string(),
            r.coordinator.label().to_string(),
            format!("{:.5}", r.mean_rpe),
        ])?;
    }
    w.flush().map_err(|e| Error::Write(e.into()))?;
    Ok(())
}

/// Console rendering in the shape of the published tables: one table per
/// inner-iteration level, a row per (benchmark, swarm size) and an RPE/CPU
/// column pair per coordinator.
pub fn render_tables(cells: &[CellStats]) -> String {
    let mut sorted: Vec<&CellStats> = cells.iter().collect();
    sorted.sort_by(|a, b| {
        (a.inner_iters, &a.benchmark, a.swarm_size, a.coordinator.rank()).cmp(&(
            b.inner_iters,
            &b.benchmark,
            b.swarm_size,
            b.coordinator.rank(),
        ))
    });

    let mut out = String::new();
    let mut inner_levels: Vec<usize> = sorted.iter().map(|c| c.inner_iters).collect();
    inner_levels.dedup();
    for inner in inner_levels {
        let level: Vec<&&CellStats> = sorted.iter().filter(|c| c.inner_iters == inner).collect();
        let mut coords: Vec<_> = level.iter().map(|c| c.coordinator.clone()).collect();
        coords.sort_by_key(|c| c.rank());
        coords.dedup_by_key(|c| c.rank());

        let _ = writeln!(out, "inner iterations = {inner}");
        let mut header = format!("{:<12} {:>6}", "benchmark", "size");
        for c in &coords {
            let _ = write!(header, " | {:>9} {:>8}", format!("{} RPE", c.label()), "CPU");
        }
        let rule = "-".repeat(header.len());
        let _ = writeln!(out, "{header}\n{rule}");

        let mut rows: Vec<(&str, usize)> = level
            .iter()
            .map(|c| (c.benchmark.as_str(), c.swarm_size))
            .collect();
        rows.dedup();
        for (bench, size) in rows {
            let mut line = format!("{bench:<12} {size:>6}");
            for coord in &coords {
                match level.iter().find(|c| {
                    c.benchmark == bench && c.swarm_size == size && c.coordinator.rank() == coord.rank()
                }) {
                    Some(c) => {
                        let _ = write!(line, " | {:>9.5} {:>8.3}", c.rpe, c.cpu_mean_s);
                    }
                    None => {
                        let _ = write!(line, " | {:>9} {:>8}", "-", "-");
                    }
                }
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let f = parse_orlib("1  2 1 0  3 4  1 1  1").unwrap();
        assert_eq!(f.problems.len(), 1);
        let p = &f.problems[0];
        assert_eq!((p.n(), p.m()), (2, 1));
        assert_eq!(p.known_optimum(), None);
        assert_eq!(p.profits(), &[3.0, 4.0]);
        assert_eq!(p.weight_row(0), &[1.0, 1.0]);
        assert_eq!(p.capacities(), &[1.0]);
        assert_eq!(p.name(), "MKP1");
    }

    #[test]
    fn empty_file() {
        let f = parse_orlib("0").unwrap();
        assert!(f.problems.is_empty());
        assert!(f.problem(1).is_none());
    }

    #[test]
    fn line_breaks_are_insignificant() {
        let a = parse_orlib("1 2 1 7 3 4 1 1 1").unwrap();
        let b = parse_orlib("1\n2 1\n7\n3\n4\n1\n1\n\n1\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.problems[0].known_optimum(), Some(7.0));
    }

    #[test]
    fn truncation_reports_token_index() {
        let err = parse_orlib("1  2 1 0  3 4  1 1").unwrap_err();
        assert_eq!(
            err,
            ParseError::Truncated {
                index: 9,
                what: "capacities"
            }
        );
    }

    #[test]
    fn non_numeric_reports_position() {
        let err = parse_orlib("1\n2 1 0\n3 x 1 1 1").unwrap_err();
        assert!(matches!(err, ParseError::NotNumeric { index: 6, line: 3, .. }), "{err:?}");
    }

    #[test]
    fn negative_dimensions_are_format_errors() {
        assert!(matches!(
            parse_orlib("1 -2 1 0 3 4 1 1 1"),
            Err(ParseError::Format { index: 2, .. })
        ));
        assert!(matches!(
            parse_orlib("1 2 -1 0 3 4 1 1 1"),
            Err(ParseError::Format { .. })
        ));
        assert!(matches!(parse_orlib("-1"), Err(ParseError::Format { .. })));
    }

    #[test]
    fn trailing_tokens_rejected() {
        assert!(matches!(
            parse_orlib("1 2 1 0 3 4 1 1 1 9"),
            Err(ParseError::Format { .. })
        ));
    }

    #[test]
    fn round_trip_through_text() {
        let text = "2\n2 1 0\n3 4\n1 1\n1\n3 2 8706.1\n600.1 310.5 18.6\n1 2 3\n4 5 6\n7 8.5\n";
        let f = parse_orlib(text).unwrap();
        let again = parse_orlib(&to_orlib_text(&f.problems)).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_file("/definitely/not/here/mknap1.txt").unwrap_err();
        assert!(err.is_input_error());
        assert!(matches!(err, Error::Io { .. }));
    }
}
