use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, io_error, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One bound set against its exact and simulated counterparts. Field order
/// is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub theorem_id: String,
    pub direction: String,
    pub bound: Option<f64>,
    pub oracle: Option<f64>,
    pub sim_mean: Option<f64>,
    pub sim_ci_lo: Option<f64>,
    pub sim_ci_hi: Option<f64>,
    /// `name=status` pairs separated by `;`, ending with the tolerances used.
    pub preconditions: String,
    pub verdict: Verdict,
}

/// Round to 12 significant digits; non-finite values become `None`.
pub fn sig12(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    Some(format!("{x:.11e}").parse().expect("formatted float parses"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(rows: &[ComparisonRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        other => invalid(format!("{}: {other:?}", path.display())),
    }
}

pub fn emit_report(rows: &[ComparisonRow], format: Format, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("report has no rows"));
    }
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(rows, &mut out).map_err(|e| csv_error(path, e))?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            out.write_all(b"\n").map_err(|e| io_error(path, e))?;
        }
    }
    out.flush().map_err(|e| io_error(path, e))
}

pub fn read_json(path: &Path) -> Result<Vec<ComparisonRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<PlotPoint>,
}

impl Series {
    pub fn curve(name: impl Into<String>, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points: points.into_iter().map(|(x, y)| PlotPoint { x, y, ci_lo: None, ci_hi: None }).collect(),
        }
    }
}

#[derive(Serialize)]
struct PlotRecord<'a> {
    series: &'a str,
    x: Option<f64>,
    y: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

fn check_series(series: &[Series]) -> Result<()> {
    if series.is_empty() {
        return Err(invalid("plot data has no series"));
    }
    for s in series {
        if s.points.is_empty() {
            return Err(invalid(format!("series '{}' is empty", s.name)));
        }
        if let Some(w) = s.points.windows(2).find(|w| !(w[1].x > w[0].x)) {
            return Err(invalid(format!("series '{}': x must increase strictly, got {} then {}", s.name, w[0].x, w[1].x)));
        }
    }
    Ok(())
}

/// Long-format `series,x,y,ci_lo,ci_hi`.
pub fn emit_plot_data(series: &[Series], path: &Path) -> Result<()> {
    check_series(series)?;
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for s in series {
        for p in &s.points {
            let record = PlotRecord {
                series: &s.name,
                x: sig12(p.x),
                y: sig12(p.y),
                ci_lo: p.ci_lo.and_then(sig12),
                ci_hi: p.ci_hi.and_then(sig12),
            };
            w.serialize(record).map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| io_error(path, e))
}
