//! Column schemas for the emitted tables, with deterministic CSV emission
//! and schema-checked parsing.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which parse back
//! to the same `f64`, so parse followed by emit reproduces a file byte for
//! byte. Integer columns (`stable`, `index`) are written as integers.

use serde::{Deserialize, Serialize};

use crate::continuation::BranchCurve;
use crate::dynamics::Trajectory;
use crate::error::{OligomerError, Result};
use crate::linearization::Spectrum;
use crate::model::Topology;

const INTEGER_COLUMNS: [&str; 2] = ["stable", "index"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `gamma, A, B[, C], phi_a, phi_b | phi_c, E, max_Re_lambda, stable`, then
/// `lambda<k>_re, lambda<k>_im` for the `2N` eigenvalues in spectrum order.
pub fn branch_columns(topology: Topology) -> Vec<String> {
    let mut c = match topology {
        Topology::Dimer => names(&["gamma", "A", "B", "phi_a", "phi_b"]),
        Topology::Trimer => names(&["gamma", "A", "B", "C", "phi_a", "phi_c"]),
    };
    c.extend(names(&["E", "max_Re_lambda", "stable"]));
    for k in 1..=2 * topology.sites() {
        c.push(format!("lambda{k}_re"));
        c.push(format!("lambda{k}_im"));
    }
    c
}

pub fn branch_table(curve: &BranchCurve) -> Table {
    let topology = curve.spec.topology;
    let rows = curve
        .points
        .iter()
        .map(|p| {
            let s = &p.solution;
            let amp = s.amplitudes();
            let phase = s.phases();
            let mut row = vec![p.gamma];
            row.extend(&amp);
            match topology {
                Topology::Dimer => row.extend([phase[0], phase[1]]),
                Topology::Trimer => row.extend([phase[0], phase[2]]),
            }
            row.extend([s.energy, p.spectrum.max_real(), if p.stable() { 1.0 } else { 0.0 }]);
            for l in &p.spectrum.eigenvalues {
                row.extend([l.re, l.im]);
            }
            row
        })
        .collect();
    Table {
        columns: branch_columns(topology),
        rows,
    }
}

/// `t`, then `re_<j>, im_<j>, power_<j>` per site.
pub fn trajectory_columns(topology: Topology) -> Vec<String> {
    let mut c = names(&["t"]);
    for j in 1..=topology.sites() {
        c.extend([format!("re_{j}"), format!("im_{j}"), format!("power_{j}")]);
    }
    c
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let topology = traj.states.first().map_or(Topology::Dimer, |s| s.topology);
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            let mut row = vec![*t];
            for z in &s.sites {
                row.extend([z.re, z.im, z.norm_sqr()]);
            }
            row
        })
        .collect();
    Table {
        columns: trajectory_columns(topology),
        rows,
    }
}

/// `index, re, im, residual`.
pub fn spectrum_columns() -> Vec<String> {
    names(&["index", "re", "im", "residual"])
}

pub fn spectrum_table(spectrum: &Spectrum) -> Table {
    let rows = spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.residuals)
        .enumerate()
        .map(|(k, (l, r))| vec![k as f64, l.re, l.im, *r])
        .collect();
    Table {
        columns: spectrum_columns(),
        rows,
    }
}

fn format_cell(column: &str, v: f64) -> String {
    if INTEGER_COLUMNS.contains(&column) {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

pub fn emit_csv(table: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| OligomerError::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(table.columns.iter().zip(row).map(|(c, v)| format_cell(c, *v))).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| OligomerError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| OligomerError::Io(e.to_string()))
}

pub fn emit_json(table: &Table) -> Result<String> {
    serde_json::to_string_pretty(table)
        .map(|s| s + "\n")
        .map_err(|e| OligomerError::Io(e.to_string()))
}

fn schema(msg: impl Into<String>) -> OligomerError {
    OligomerError::SchemaViolation(msg.into())
}

/// Parses a CSV whose header must equal `columns`.
pub fn parse_csv(text: &str, columns: &[String]) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| schema(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != columns {
        return Err(schema(format!("expected columns {columns:?}, found {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| schema(e.to_string()))?;
        let row = record
            .iter()
            .zip(columns)
            .map(|(cell, col)| {
                let v = if INTEGER_COLUMNS.contains(&col.as_str()) {
                    cell.parse::<i64>().map(|i| i as f64).ok()
                } else {
                    cell.parse::<f64>().ok()
                };
                v.ok_or_else(|| schema(format!("row {}: column {col}: cannot read {cell:?}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table {
        columns: columns.to_vec(),
        rows,
    })
}

/// Parses a branch file of either topology.
pub fn parse_branch_csv(text: &str) -> Result<Table> {
    let trimer = text.lines().next().is_some_and(|h| h.split(',').any(|c| c == "C"));
    parse_csv(text, &branch_columns(if trimer { Topology::Trimer } else { Topology::Dimer }))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Table> {
    let trimer = text.lines().next().is_some_and(|h| h.split(',').any(|c| c == "re_3"));
    parse_csv(text, &trajectory_columns(if trimer { Topology::Trimer } else { Topology::Dimer }))
}

pub fn parse_spectrum_csv(text: &str) -> Result<Table> {
    parse_csv(text, &spectrum_columns())
}
