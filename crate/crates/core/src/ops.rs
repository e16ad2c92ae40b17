//! Discrete derivatives and norms.
//!
//! Periodic grids differentiate spectrally. Dirichlet grids use second-order
//! centered differences, reading the two boundary values from a [`Boundary`]
//! (zero when none is given).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::BoundaryKind;
use crate::transform::Spectral;

/// Fixed values of a 1D field at `x = -L` and `x = +L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub left: Complex64,
    pub right: Complex64,
}

impl Boundary {
    pub fn new(left: Complex64, right: Complex64) -> Self {
        Self { left, right }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Harmonic interpolant `r(x) = left + (right - left)(x + L)/(2L)`.
    pub fn ramp(&self, x: f64, half_width: f64) -> Complex64 {
        self.left + (self.right - self.left) * ((x + half_width) / (2.0 * half_width))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Linf,
    H1,
    H2,
    X2,
}

/// Multi-indices `α` with `1 <= |α| <= order` for the given dimension.
pub fn multi_indices(dim: usize, order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 1..=order {
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for a in (0..=total).rev() {
                out.push([a, total - a]);
            }
        }
    }
    out
}

pub fn derivative(f: &Field, alpha: [usize; 2], boundary: Option<&Boundary>) -> Result<Field> {
    let order = alpha[0] + alpha[1];
    if order == 0 || order > 2 {
        return Err(Error::DerivativeOrder(order));
    }
    let grid = f.grid();
    if grid.dim() == 1 && alpha[1] != 0 {
        return Err(Error::InvalidArgument("1D fields have no second axis".into()));
    }
    match grid.bc() {
        BoundaryKind::Periodic => Ok(spectral_derivative(f, alpha, &Spectral::new(grid))),
        BoundaryKind::Dirichlet => {
            let b = boundary.copied().unwrap_or_else(Boundary::zero);
            Ok(fd_derivative(f, alpha[0], &b))
        }
    }
}

pub(crate) fn spectral_derivative(f: &Field, alpha: [usize; 2], spectral: &Spectral) -> Field {
    let grid = f.grid();
    let n = grid.points();
    let modes = grid.modes();
    let i = Complex64::new(0.0, 1.0);
    let mut data = f.values().to_vec();
    spectral.fft(&mut data);
    for (idx, z) in data.iter_mut().enumerate() {
        let (kx, ky) = if grid.dim() == 1 { (modes[idx], 0.0) } else { (modes[idx / n], modes[idx % n]) };
        *z *= (i * kx).powu(alpha[0] as u32) * (i * ky).powu(alpha[1] as u32);
    }
    spectral.ifft(&mut data);
    Field::from_raw(f.grid_arc().clone(), data)
}

fn fd_derivative(f: &Field, order: usize, b: &Boundary) -> Field {
    let u = f.values();
    let n = u.len();
    let h = f.grid().spacing();
    let at = |j: isize| -> Complex64 {
        if j < 0 {
            b.left
        } else if j as usize >= n {
            b.right
        } else {
            u[j as usize]
        }
    };
    let out = (0..n as isize)
        .map(|j| match order {
            1 => (at(j + 1) - at(j - 1)) / (2.0 * h),
            _ => (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (h * h),
        })
        .collect();
    Field::from_raw(f.grid_arc().clone(), out)
}

/// `h^dim Σ |f|^2`, summed in index order.
pub fn l2_squared(f: &Field) -> f64 {
    f.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * f.grid().cell_volume()
}

/// Squared discrete L² norms of `∂^α f` for every `1 <= |α| <= order`.
fn derivative_l2_squared(f: &Field, order: usize, boundary: Option<&Boundary>) -> Result<Vec<f64>> {
    let grid = f.grid();
    let spectral = (grid.bc() == BoundaryKind::Periodic).then(|| Spectral::new(grid));
    multi_indices(grid.dim(), order)
        .into_iter()
        .map(|alpha| {
            let d = match &spectral {
                Some(sp) => spectral_derivative(f, alpha, sp),
                None => derivative(f, alpha, boundary)?,
            };
            Ok(l2_squared(&d))
        })
        .collect()
}

pub fn norm(f: &Field, kind: NormKind, boundary: Option<&Boundary>) -> Result<f64> {
    Ok(match kind {
        NormKind::L2 => l2_squared(f).sqrt(),
        NormKind::Linf => f.max_abs(),
        NormKind::H1 => {
            (l2_squared(f) + derivative_l2_squared(f, 1, boundary)?.iter().sum::<f64>()).sqrt()
        }
        NormKind::H2 => {
            (l2_squared(f) + derivative_l2_squared(f, 2, boundary)?.iter().sum::<f64>()).sqrt()
        }
        NormKind::X2 => {
            f.max_abs() + derivative_l2_squared(f, 2, boundary)?.iter().map(|s| s.sqrt()).sum::<f64>()
        }
    })
}

/// `∫ |∇f|^2` evaluated in each backend's native basis.
///
/// Periodic: Parseval on the FFT coefficients. Dirichlet: `f = r + w` with `r`
/// the boundary ramp and `w` expanded in sine modes, giving
/// `|right - left|^2 / (2L) + L Σ k_j^2 |c_j|^2`.
pub fn kinetic_integral(f: &Field, boundary: Option<&Boundary>) -> f64 {
    let grid = f.grid();
    let spectral = Spectral::new(grid);
    match grid.bc() {
        BoundaryKind::Periodic => {
            let mut data = f.values().to_vec();
            spectral.fft(&mut data);
            let s: f64 =
                data.iter().enumerate().map(|(idx, z)| grid.k_squared(idx) * z.norm_sqr()).sum();
            s * grid.cell_volume() / grid.len() as f64
        }
        BoundaryKind::Dirichlet => {
            let b = boundary.copied().unwrap_or_else(Boundary::zero);
            let l = grid.half_width();
            let mut w: Vec<Complex64> = f
                .values()
                .iter()
                .enumerate()
                .map(|(j, &u)| u - b.ramp(grid.coord(j), l))
                .collect();
            spectral.idst(&mut w);
            let s: f64 = w.iter().zip(grid.modes()).map(|(c, k)| k * k * c.norm_sqr()).sum();
            (b.right - b.left).norm_sqr() / (2.0 * l) + l * s
        }
    }
}
