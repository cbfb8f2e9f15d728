//! CSV outputs. Every file starts with a header row naming each column.

use std::io::Write;
use std::path::Path;

use gvm_core::ensemble::{EnsembleReport, ScanResult};
use gvm_core::trainer::TracePoint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::wash::WashReport;

fn csv_error(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv: {e}")))
}

#[derive(Serialize)]
struct ScanRow {
    axis_value: f64,
    mean_metric: f64,
    design_risk: f64,
    avg_rs: f64,
    jgvm_metric: f64,
    n_converged: usize,
}

impl From<&EnsembleReport> for ScanRow {
    fn from(r: &EnsembleReport) -> Self {
        ScanRow {
            axis_value: r.axis_value,
            mean_metric: r.mean_metric,
            design_risk: r.design_risk,
            avg_rs: r.avg_rs,
            jgvm_metric: r.jgvm_metric,
            n_converged: r.n_converged,
        }
    }
}

pub fn write_scan<W: Write>(out: W, scan: &ScanResult) -> Result<()> {
    write_rows(out, scan.reports.iter().map(ScanRow::from))
}

pub fn write_reports<W: Write>(out: W, reports: &[EnsembleReport]) -> Result<()> {
    write_rows(out, reports.iter().map(ScanRow::from))
}

#[derive(Serialize)]
struct MemberRow {
    member: usize,
    metric: f64,
}

/// One row per member metric.
pub fn write_members<W: Write>(out: W, report: &EnsembleReport) -> Result<()> {
    write_rows(out, report.member_metrics.iter().enumerate().map(|(member, &metric)| MemberRow { member, metric }))
}

#[derive(Serialize)]
struct CurveRow {
    x: f64,
    prediction: f64,
    goal: Option<f64>,
}

/// One row per grid point of a one-dimensional curve; `goal` may be absent.
pub fn write_curve<W: Write>(out: W, xs: &[f64], prediction: &[f64], goal: Option<&[f64]>) -> Result<()> {
    write_rows(
        out,
        xs.iter().enumerate().map(|(k, &x)| CurveRow { x, prediction: prediction[k], goal: goal.map(|g| g[k]) }),
    )
}

#[derive(Serialize)]
struct TraceRow {
    step: u64,
    cost: f64,
    accept_rate: f64,
}

pub fn write_trace<W: Write>(out: W, trace: &[TracePoint]) -> Result<()> {
    write_rows(out, trace.iter().map(|t| TraceRow { step: t.step, cost: t.cost, accept_rate: t.accept_rate }))
}

#[derive(Serialize)]
struct WashRow {
    rank: usize,
    index: usize,
    score: f64,
    label: usize,
    fields: String,
}

/// Fields are joined with `;` inside one column.
pub fn write_wash<W: Write>(out: W, report: &WashReport) -> Result<()> {
    write_rows(
        out,
        report.entries.iter().enumerate().map(|(rank, e)| WashRow {
            rank,
            index: e.index,
            score: e.score,
            label: e.label,
            fields: e.fields.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";"),
        }),
    )
}

#[derive(Serialize)]
struct KeyValue<'a> {
    key: &'a str,
    value: String,
}

pub fn write_summary<W: Write>(out: W, items: &[(&str, String)]) -> Result<()> {
    write_rows(out, items.iter().map(|(key, value)| KeyValue { key, value: value.clone() }))
}

/// Creates `path` and hands its writer to `body`.
pub fn to_file(path: &Path, body: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    body(file)
}
