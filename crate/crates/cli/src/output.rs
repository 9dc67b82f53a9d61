//! CSV and text artifacts written by the commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ccilc::{IlcHistory, IterationRecord, MarginMethod, Signal};
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

pub const HISTORY_HEADER: [&str; 9] = [
    "j", "e_norm", "ec_norm", "et_norm", "e1_norm", "e2_norm", "cost", "rho", "wall_ms",
];
pub const TRAJECTORY_HEADER: [&str; 9] = ["k", "y1", "y2", "e1", "e2", "ec", "et", "f1", "f2"];

/// Shortest round-trip representation, switching to exponent notation for
/// very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn history_row(r: &IterationRecord) -> Vec<String> {
    let axis = |i: usize| r.axis_norms.get(i).copied();
    vec![
        r.j.to_string(),
        fmt_f64(r.error_norm),
        fmt_opt(r.contour_norm),
        fmt_opt(r.tangential_norm),
        fmt_opt(axis(0)),
        fmt_opt(axis(1)),
        fmt_opt(r.cost),
        fmt_opt(r.rho),
        format!("{:.3}", r.wall_ms),
    ]
}

pub fn write_history(path: &Path, history: &IlcHistory) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(HISTORY_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for r in &history.records {
        w.write_record(history_row(r))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn trajectory_path(dir: &Path, j: usize) -> PathBuf {
    dir.join(format!("trajectory_j{j}.csv"))
}

/// Per-sample output, error and input of one trial. Two-axis only; missing
/// channels and contour errors are left empty.
pub fn write_trajectory(path: &Path, reference: &Signal, r: &IterationRecord) -> CliResult<()> {
    let y = r.output(reference);
    let mut w = csv_writer(path)?;
    w.write_record(TRAJECTORY_HEADER)
        .map_err(|e| csv_err(path, e))?;
    let ch = |s: &Signal, k: usize, i: usize| fmt_opt(s.sample(k).get(i).copied());
    for k in 0..y.len() {
        let row = [
            k.to_string(),
            ch(&y, k, 0),
            ch(&y, k, 1),
            ch(&r.e, k, 0),
            ch(&r.e, k, 1),
            fmt_opt(r.contour_errors.get(k).copied()),
            fmt_opt(r.tangential_errors.get(k).copied()),
            ch(&r.f, k, 0),
            ch(&r.f, k, 1),
        ];
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Columns of a trajectory file, read back by name; empty fields are NaN.
#[derive(Debug, Default, PartialEq)]
pub struct Trajectory {
    pub k: Vec<usize>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

pub fn read_trajectory(path: &Path) -> CliResult<Trajectory> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers != TRAJECTORY_HEADER {
        return Err(CliError::config(
            path,
            Some(1),
            "unexpected trajectory header",
        ));
    }
    let mut t = Trajectory {
        k: Vec::new(),
        columns: headers[1..]
            .iter()
            .map(|h| (h.clone(), Vec::new()))
            .collect(),
    };
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let bad = || CliError::config(path, Some(i + 2), "malformed trajectory row");
        t.k.push(rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?);
        for (c, col) in t.columns.iter_mut().enumerate() {
            let field = rec.get(c + 1).ok_or_else(bad)?;
            col.1.push(if field.is_empty() {
                f64::NAN
            } else {
                field.parse().map_err(|_| bad())?
            });
        }
    }
    Ok(t)
}

/// Dense matrix dump: a `rows,cols` line, then one CSV row per matrix row.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record([m.nrows().to_string(), m.ncols().to_string()])
        .map_err(|e| csv_err(path, e))?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|x| fmt_f64(*x)))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows = rdr.records();
    let bad = |line: usize| CliError::config(path, Some(line), "malformed matrix file");
    let head = rows
        .next()
        .ok_or_else(|| bad(1))?
        .map_err(|e| csv_err(path, e))?;
    let dim = |i: usize| {
        head.get(i)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| bad(1))
    };
    let (nr, nc) = (dim(0)?, dim(1)?);
    let mut data = Vec::with_capacity(nr * nc);
    for (i, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != nc {
            return Err(bad(i + 2));
        }
        for s in rec.iter() {
            data.push(s.parse::<f64>().map_err(|_| bad(i + 2))?);
        }
    }
    if data.len() != nr * nc {
        return Err(bad(nr + 1));
    }
    Ok(DMatrix::from_row_slice(nr, nc, &data))
}

fn method_name(m: MarginMethod) -> &'static str {
    match m {
        MarginMethod::Trivial => "trivial",
        MarginMethod::Dense => "dense",
        MarginMethod::PowerIteration => "power",
        MarginMethod::Unavailable => "unavailable",
    }
}

/// Human-readable convergence summary.
pub fn report_text(name: &str, solver: &str, history: &IlcHistory, kappa: Option<f64>) -> String {
    let rep = &history.report;
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {name}");
    let _ = writeln!(s, "solver: {solver}");
    let _ = writeln!(s, "iterations: {}", history.iterations());
    let _ = writeln!(s, "verdict: {}", rep.verdict.describe());
    let _ = writeln!(s, "worst rho: {}", fmt_opt(rep.worst_rho));
    if rep.worst_rho.is_some_and(|r| r >= 1.0) {
        let _ = writeln!(
            s,
            "note: rho >= 1, so the 2-norm bound does not certify contraction for this run"
        );
    }
    let _ = writeln!(s, "iteration invariant: {}", rep.iteration_invariant);
    match kappa {
        Some(k) => {
            let _ = writeln!(s, "empirical contraction: {}", fmt_f64(k));
        }
        None => {
            let _ = writeln!(
                s,
                "empirical contraction: n/a (needs at least 3 iterations)"
            );
        }
    }
    if let (Some(first), Some(last)) = (history.records.first(), history.records.last()) {
        let _ = writeln!(
            s,
            "error norm: {} -> {}",
            fmt_f64(first.error_norm),
            fmt_f64(last.error_norm)
        );
        if let (Some(a), Some(b)) = (first.contour_norm, last.contour_norm) {
            let _ = writeln!(s, "contour error norm: {} -> {}", fmt_f64(a), fmt_f64(b));
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "j  conditions  rho  method");
    for e in &rep.entries {
        let flags = if e.flags.passes() {
            "ok".to_string()
        } else {
            e.flags.violations().join("; ")
        };
        let _ = writeln!(
            s,
            "{}  {}  {}  {}",
            e.j,
            flags,
            fmt_opt(e.rho),
            method_name(e.method)
        );
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
