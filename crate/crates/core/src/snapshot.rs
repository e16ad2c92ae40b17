//! Field snapshots: a JSON header next to a raw little-endian file of
//! interleaved `(re, im)` float64 pairs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BoundaryKind, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub bc: BoundaryKind,
    pub dtype: String,
    pub order: String,
    /// Simulation time of the snapshot, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl SnapshotHeader {
    pub fn for_grid(grid: &Grid, t: Option<f64>) -> Self {
        Self {
            dim: grid.dim(),
            n: grid.points(),
            l: grid.half_width(),
            bc: grid.bc(),
            dtype: "c128".into(),
            order: "row-major".into(),
            t,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Writes `<stem>.json` and `<stem>.bin`; returns both paths.
pub fn write_snapshot(field: &Field, stem: &Path, t: Option<f64>) -> Result<(PathBuf, PathBuf)> {
    let json_path = stem.with_extension("json");
    let bin_path = stem.with_extension("bin");
    let header = SnapshotHeader::for_grid(field.grid(), t);
    let text = serde_json::to_string_pretty(&header)
        .map_err(|source| Error::Json { path: json_path.clone(), source })?;
    fs::write(&json_path, text).map_err(io_err(&json_path))?;
    let mut bytes = Vec::with_capacity(field.len() * 16);
    for z in field.values() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(&bin_path, bytes).map_err(io_err(&bin_path))?;
    Ok((json_path, bin_path))
}

/// Reads a snapshot given either the `.json` header path or the common stem.
pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Field)> {
    let json_path = path.with_extension("json");
    let bin_path = path.with_extension("bin");
    let text = fs::read_to_string(&json_path).map_err(io_err(&json_path))?;
    let header: SnapshotHeader = serde_json::from_str(&text)
        .map_err(|source| Error::Json { path: json_path.clone(), source })?;
    if header.dtype != "c128" || header.order != "row-major" {
        return Err(Error::InvalidArgument(format!(
            "{}: unsupported dtype/order {}/{}",
            json_path.display(),
            header.dtype,
            header.order
        )));
    }
    let grid = Arc::new(Grid::new(header.dim, header.l, header.n, header.bc)?);
    let bytes = fs::read(&bin_path).map_err(io_err(&bin_path))?;
    if bytes.len() != grid.len() * 16 {
        return Err(Error::ShapeMismatch(format!(
            "{}: expected {} bytes, found {}",
            bin_path.display(),
            grid.len() * 16,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let field = Field::new(grid, values)?;
    Ok((header, field))
}
