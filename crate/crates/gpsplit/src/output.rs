//! Artifact writers: diagnostics CSV, JSON metadata, snapshots, vortex events.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gpsplit_core::diagnostics::{DiagRow, VortexEvent};
use gpsplit_core::integrators::Trajectory;
use gpsplit_core::snapshot::write_snapshot;
use gpsplit_core::Field;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| HarnessError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    write_text(path, &(text + "\n"))
}

pub fn diagnostics_csv(rows: &[DiagRow]) -> String {
    let mut out = String::from(DiagRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_diagnostics(path: &Path, rows: &[DiagRow]) -> Result<()> {
    write_text(path, &diagnostics_csv(rows))
}

/// Full-precision float formatting used in every CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const VORTEX_HEADER: &str = "step,t,i,j,x,y,charge,density";

pub fn vortex_line(step: usize, t: f64, e: &VortexEvent) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{step},{},{},{},{},{},{},{}",
        fmt_f64(t),
        e.cell.0,
        e.cell.1,
        fmt_f64(e.center.0),
        fmt_f64(e.center.1),
        e.charge,
        fmt_f64(e.density)
    );
    s
}

pub fn snapshot_stem(dir: &Path, prefix: &str, step: usize) -> PathBuf {
    dir.join("fields").join(format!("{prefix}_{step:07}"))
}

pub fn write_field(dir: &Path, prefix: &str, step: usize, t: f64, field: &Field) -> Result<()> {
    let stem = snapshot_stem(dir, prefix, step);
    ensure_dir(stem.parent().expect("snapshot stem has a parent"))?;
    write_snapshot(field, &stem, Some(t))?;
    Ok(())
}

/// `diagnostics.csv` plus a snapshot of the final field.
pub fn write_outputs(trajectory: &Trajectory, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    write_diagnostics(&dir.join("diagnostics.csv"), &trajectory.rows)?;
    let state = &trajectory.final_state;
    write_field(dir, "u", trajectory.n_steps, state.t, &state.physical())
}
