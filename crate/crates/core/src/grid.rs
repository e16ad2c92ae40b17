//! Uniform 1D/2D grids.
//!
//! Periodic grids hold `N` nodes per axis covering `[-L, L)`. Dirichlet grids
//! (1D only) hold the `N` interior nodes of `(-L, L)`; boundary values live
//! with whoever owns the boundary data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
    bc: BoundaryKind,
    spacing: f64,
    modes: Vec<f64>,
}

pub const MIN_POINTS: usize = 8;

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize, bc: BoundaryKind) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {points}"
            )));
        }
        if bc == BoundaryKind::Dirichlet && dim != 1 {
            return Err(Error::InvalidGrid("Dirichlet grids are one-dimensional only".into()));
        }
        let (spacing, modes) = match bc {
            BoundaryKind::Periodic => {
                (2.0 * half_width / points as f64, fft_wavenumbers(points, half_width))
            }
            BoundaryKind::Dirichlet => {
                let modes = (1..=points)
                    .map(|j| j as f64 * PI / (2.0 * half_width))
                    .collect();
                (2.0 * half_width / (points + 1) as f64, modes)
            }
        };
        Ok(Self { dim, half_width, points, bc, spacing, modes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Per-axis wavenumbers. Periodic grids use FFT frequency order; Dirichlet
    /// grids list the sine modes `jπ/(2L)`, `j = 1..=N`.
    pub fn modes(&self) -> &[f64] {
        &self.modes
    }

    /// Total number of stored values, `N^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Node coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    pub fn coord(&self, j: usize) -> f64 {
        match self.bc {
            BoundaryKind::Periodic => -self.half_width + self.spacing * j as f64,
            BoundaryKind::Dirichlet => -self.half_width + self.spacing * (j + 1) as f64,
        }
    }

    /// Coordinates of the node at flat (row-major) index `idx`; the second
    /// component is zero in 1D.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(idx), 0.0],
            _ => [self.coord(idx / self.points), self.coord(idx % self.points)],
        }
    }

    /// Squared wavenumber `|k|^2` for flat spectral index `idx`.
    pub fn k_squared(&self, idx: usize) -> f64 {
        match self.dim {
            1 => self.modes[idx].powi(2),
            _ => {
                let (i, j) = (idx / self.points, idx % self.points);
                self.modes[i].powi(2) + self.modes[j].powi(2)
            }
        }
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Wavenumbers `jπ/L` in FFT order: `0, 1, ..., ceil(n/2)-1, -floor(n/2), ..., -1`.
fn fft_wavenumbers(n: usize, half_width: f64) -> Vec<f64> {
    let n = n as isize;
    (0..n)
        .map(|j| if j < (n + 1) / 2 { j } else { j - n } as f64 * PI / half_width)
        .collect()
}

pub fn make_grid(dim: usize, half_width: f64, points: usize, bc: BoundaryKind) -> Result<Grid> {
    Grid::new(dim, half_width, points, bc)
}
