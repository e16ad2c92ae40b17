//! Background profiles `φ` and the 1D dark soliton.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::ops::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Spatially constant `c0` with `|c0| = 1`.
    Constant {
        #[serde(default = "one")]
        value: Complex64,
    },
    /// `φ_c(x) = sqrt((2-c²)/2) tanh(sqrt(2-c²)/2 x) + i c/sqrt(2)`, `|c| < sqrt(2)`.
    DarkSoliton { c: f64 },
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Background {
    pub fn constant_one() -> Self {
        Background::Constant { value: one() }
    }

    pub fn dark_soliton(c: f64) -> Result<Self> {
        let bg = Background::DarkSoliton { c };
        bg.validate()?;
        Ok(bg)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Background::Constant { value } => {
                if (value.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "constant background must have modulus one, got |{value}| = {}",
                        value.norm()
                    )));
                }
            }
            Background::DarkSoliton { c } => {
                if !(c.abs() < SQRT_2) {
                    return Err(Error::InvalidArgument(format!(
                        "dark soliton speed must satisfy |c| < sqrt(2), got {c}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value at `(x, y)`; the soliton ignores `y`.
    pub fn value(&self, x: f64, _y: f64) -> Complex64 {
        match *self {
            Background::Constant { value } => value,
            Background::DarkSoliton { c } => dark_soliton_profile(c, x),
        }
    }

    /// Constant limits `(φ(-∞), φ(+∞))`.
    pub fn limits(&self) -> Boundary {
        match *self {
            Background::Constant { value } => Boundary::new(value, value),
            Background::DarkSoliton { c } => {
                let amp = ((2.0 - c * c) / 2.0).sqrt();
                let im = c / SQRT_2;
                Boundary::new(Complex64::new(-amp, im), Complex64::new(amp, im))
            }
        }
    }
}

pub fn dark_soliton_profile(c: f64, x: f64) -> Complex64 {
    let s = (2.0 - c * c).sqrt();
    Complex64::new((s / SQRT_2) * (0.5 * s * x).tanh(), c / SQRT_2)
}

pub fn eval_background(bg: &Background, grid: &Arc<Grid>) -> Result<Field> {
    bg.validate()?;
    if matches!(bg, Background::DarkSoliton { .. }) && grid.dim() != 1 {
        return Err(Error::Unsupported("the dark soliton is a one-dimensional profile".into()));
    }
    Ok(Field::from_fn(grid.clone(), |x, y| bg.value(x, y)))
}

/// Exact traveling wave `u(t, x) = φ_c(x + ct)` (ε = 1, m = 1/2, V = 0).
pub fn soliton_solution(c: f64, t: f64, grid: &Arc<Grid>) -> Result<Field> {
    Background::dark_soliton(c)?;
    if grid.dim() != 1 {
        return Err(Error::Unsupported("the dark soliton is a one-dimensional profile".into()));
    }
    Ok(Field::from_fn(grid.clone(), |x, _| dark_soliton_profile(c, x + c * t)))
}
