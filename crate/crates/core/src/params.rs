use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonlinearity and dispersion scalings: `i∂_t u = (1/2m)Δu + (1/ε²)(1-|u|²)u + Vu`.
///
/// The defaults `ε = 1`, `m = 1/2` give the unscaled equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_mass")]
    pub mass: f64,
}

fn default_eps() -> f64 {
    1.0
}

fn default_mass() -> f64 {
    0.5
}

impl Default for PhysParams {
    fn default() -> Self {
        Self { eps: default_eps(), mass: default_mass() }
    }
}

impl PhysParams {
    pub fn new(eps: f64, mass: f64) -> Result<Self> {
        let p = Self { eps, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }

    /// Coefficient `1/(2m)` in front of the Laplacian.
    pub fn dispersion(&self) -> f64 {
        0.5 / self.mass
    }

    /// Coefficient `1/ε²` in front of the nonlinearity.
    pub fn coupling(&self) -> f64 {
        1.0 / (self.eps * self.eps)
    }
}
