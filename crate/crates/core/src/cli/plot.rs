// SPDX-License-Identifier: Apache-2.0

//! Columnar CSV plot data.
//!
//! Measures are written with header `x,cdf,density`, one row per atom or
//! grid node. `cdf` is the mass of `(-inf, x)` and `density` the density
//! just left of `x`; where the CDF or the density jumps, a second row at the
//! same `x` carries the right-hand values. Sweeps use
//! `n,delta,levy,bound,ratio` and degenerate reports
//! `n,eta1,eta2,eta3,levy,bound`.

use std::fmt::Write as _;
use std::path::Path;

use super::CommandOutcome;
use crate::error::{Error, Result};
use crate::harness::{DegenerateReport, SweepReport};
use crate::measures::{FiniteMeasure, Measure};

pub const MEASURE_HEADER: &str = "x,cdf,density";
pub const SWEEP_HEADER: &str = "n,delta,levy,bound,ratio";
pub const DEGENERATE_HEADER: &str = "n,eta1,eta2,eta3,levy,bound";

pub enum PlotData<'a> {
    Measure(&'a FiniteMeasure),
    Sweep(&'a SweepReport),
    Degenerate(&'a [(usize, DegenerateReport)]),
}

pub fn render(data: &PlotData<'_>) -> String {
    match data {
        PlotData::Measure(m) => measure_csv(m),
        PlotData::Sweep(r) => {
            let mut s = format!("{SWEEP_HEADER}\n");
            for row in &r.rows {
                writeln!(s, "{},{},{},{},{}", row.n, row.delta, row.levy, row.bound, row.ratio).unwrap();
            }
            s
        }
        PlotData::Degenerate(rows) => {
            let mut s = format!("{DEGENERATE_HEADER}\n");
            for (n, r) in rows.iter() {
                writeln!(s, "{n},{},{},{},{},{}", r.eta1, r.eta2, r.eta3, r.levy_to_delta0, r.bound).unwrap();
            }
            s
        }
    }
}

fn measure_csv(m: &FiniteMeasure) -> String {
    let mut s = format!("{MEASURE_HEADER}\n");
    let (lo, hi) = m
        .density()
        .map_or((f64::NAN, f64::NAN), |d| (d.lower(), d.upper()));
    let density_left = |x: f64| if x == lo { 0.0 } else { m.density_at(x) };
    let density_right = |x: f64| if x == hi { 0.0 } else { m.density_at(x) };
    for x in m.breakpoints() {
        let (c0, c1) = (m.cdf(x), m.cdf_right(x));
        let (d0, d1) = (density_left(x), density_right(x));
        writeln!(s, "{x},{c0},{d0}").unwrap();
        if c1 != c0 || d1 != d0 {
            writeln!(s, "{x},{c1},{d1}").unwrap();
        }
    }
    s
}

/// Rebuilds a probability measure from its plot data: CDF jumps become
/// atoms and the density is read between its two support jumps.
pub fn measure_from_plot_data(text: &str) -> Result<Measure> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MEASURE_HEADER) {
        return Err(Error::Parse(format!("expected header {MEASURE_HEADER}")));
    }
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))?;
        let [x, c, d] = fields[..] else {
            return Err(Error::Parse(format!("row {} needs 3 fields", i + 2)));
        };
        rows.push([x, c, d]);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }

    // distinct x with (cdf left, cdf right, density left, density right)
    let mut nodes: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for &[x, c, d] in &rows {
        match nodes.last_mut() {
            Some(last) if last.0 == x => {
                last.2 = c;
                last.4 = d;
            }
            _ => nodes.push((x, c, c, d, d)),
        }
    }

    let mut atoms = Vec::new();
    for &(x, c0, c1, ..) in &nodes {
        if c1 > c0 {
            atoms.push((x, c1 - c0));
        }
    }
    // the last row's right-hand cdf is the total mass
    let start = nodes.iter().position(|n| n.4 > n.3).unwrap_or(0);
    let end = nodes.iter().rposition(|n| n.3 > n.4).unwrap_or(nodes.len() - 1);
    let has_density = nodes[start..=end].iter().any(|n| n.3 > 0.0 || n.4 > 0.0);
    if !has_density {
        return Measure::atoms(atoms);
    }
    let grid: Vec<f64> = nodes[start..=end].iter().map(|n| n.0).collect();
    let values: Vec<f64> = nodes[start..=end]
        .iter()
        .enumerate()
        .map(|(i, n)| if i == 0 { n.4 } else { n.3 })
        .collect();
    Measure::mixed(atoms, grid, values)
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

/// Writes plot data to `path`; I/O failures give exit code 3 with a
/// diagnostic on the error stream.
pub fn emit_plot_data(data: &PlotData<'_>, path: &Path) -> CommandOutcome {
    match write_atomically(path, &render(data)) {
        Ok(()) => CommandOutcome {
            exit_code: 0,
            artifacts: vec![path.to_path_buf()],
        },
        Err(e) => {
            eprintln!("error: {e}");
            CommandOutcome {
                exit_code: 3,
                artifacts: Vec::new(),
            }
        }
    }
}
