use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use harmap_core::diagnostics::{CheckKind, DiagnosticsReport};
use harmap_core::MapField;

/// One float, 17 significant digits: enough to round-trip an f64 exactly,
/// so re-importing an export reproduces node values bit for bit.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Field CSV: header `r,theta,re,im`, one row per node, radius-major then
/// angle, all four columns at full precision.
pub fn export_field(w: &MapField, path: &Path) -> Result<()> {
    let grid = w.grid();
    if grid.node_count() == 0 {
        return Err(anyhow!("refusing to export an empty grid"));
    }
    let mut out = String::from("r,theta,re,im\n");
    for j in 0..grid.nr() {
        for k in 0..grid.ntheta() {
            let v = w.value(j, k);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                full(grid.radii()[j]),
                full(grid.angles()[k]),
                full(v.re),
                full(v.im)
            );
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Per-iteration sup-norm updates, for post-mortem inspection of a run that
/// failed to contract.
pub fn write_history(history: &[f64], path: &Path) -> Result<()> {
    let mut out = String::from("iteration,update\n");
    for (i, u) in history.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, full(*u));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Check table as CSV: one row per record, details left to the text
/// summary so the columns stay machine-parseable.
pub fn write_report_csv(report: &DiagnosticsReport, path: &Path) -> Result<()> {
    let mut out = String::from("name,kind,value,bound,passed\n");
    for r in &report.records {
        let kind = match r.kind {
            CheckKind::Inequality => "inequality",
            CheckKind::Measurement => "measurement",
        };
        let bound = r.bound.map(full).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", r.name, kind, full(r.value), bound, r.passed);
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Human-readable companion to the CSV, one block per record.
pub fn write_report_text(report: &DiagnosticsReport, header: &str, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{header}");
    for r in &report.records {
        let verdict = match (r.kind, r.passed) {
            (CheckKind::Measurement, _) => "measured",
            (CheckKind::Inequality, true) => "pass",
            (CheckKind::Inequality, false) => "FAIL",
        };
        let bound = r
            .bound
            .map(|b| format!(" (bound {})", full(b)))
            .unwrap_or_default();
        let _ = writeln!(out, "{:28} {:8} {}{}", r.name, verdict, full(r.value), bound);
        let _ = writeln!(out, "{:28}          {}", "", r.detail);
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Plain-text portable graymap of |w|: one pixel per node, rings as rows,
/// brightness scaled to the field's own sup. No plotting dependency.
pub fn write_raster(w: &MapField, path: &Path) -> Result<()> {
    let grid = w.grid();
    let sup = w.sup_abs().max(f64::MIN_POSITIVE);
    let mut out = format!("P2\n{} {}\n255\n", grid.ntheta(), grid.nr());
    for j in 0..grid.nr() {
        let row: Vec<String> = (0..grid.ntheta())
            .map(|k| {
                let level = (w.value(j, k).norm() / sup * 255.0).round() as u32;
                level.min(255).to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
