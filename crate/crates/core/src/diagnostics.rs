//! Monitored quantities: Ginzburg-Landau energy, generalized mass, error
//! norms, convergence slopes and plaquette vortex windings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::BoundaryKind;
use crate::ops::{kinetic_integral, norm, Boundary, NormKind};
use crate::params::PhysParams;
use crate::potential::Potential;
use crate::transform::Spectral;

/// Compensated (Neumaier) sum.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(1/2m)∫|∇u|² + (1/2ε²)∫(1-|u|²)² + ∫V(t)(1-|u|²)`.
///
/// The kinetic term uses the grid's native spectral basis; `boundary` gives the
/// Dirichlet values of `u` and is ignored on periodic grids.
pub fn energy_gl(u: &Field, pot: &Potential, t: f64, params: &PhysParams, boundary: Option<&Boundary>) -> f64 {
    let grid = u.grid();
    let w = grid.cell_volume();
    let kinetic = params.dispersion() * kinetic_integral(u, boundary);
    let well = 0.5 * params.coupling() * w * stable_sum(u.values().iter().map(|z| (1.0 - z.norm_sqr()).powi(2)));
    let coupling = if pot.is_zero() {
        0.0
    } else {
        let v = pot.sample(t, grid);
        w * stable_sum(u.values().iter().zip(v).map(|(z, v)| v * (1.0 - z.norm_sqr())))
    };
    kinetic + well + coupling
}

/// `E(u) - E(u_ref)` evaluated in difference form, so that the result is
/// accurate relative to the gap rather than to the energies themselves.
/// Both fields must share the Dirichlet values `boundary`.
pub fn energy_gap(
    u: &Field,
    u_ref: &Field,
    pot: &Potential,
    t: f64,
    params: &PhysParams,
    boundary: Option<&Boundary>,
) -> Result<f64> {
    u.check_same_grid(u_ref)?;
    let grid = u.grid();
    let w = grid.cell_volume();
    let diff = u.sub(u_ref)?;
    let sum = u.add(u_ref)?;
    // |∇a|² - |∇b|² = Re(∇(a-b) conj(∇(a+b))); boundary ramps cancel in a-b.
    let kinetic = params.dispersion() * cross_kinetic(&diff, &sum, boundary);
    let drho: Vec<f64> = diff.values().iter().zip(sum.values()).map(|(d, s)| (d * s.conj()).re).collect();
    let well = 0.5
        * params.coupling()
        * w
        * stable_sum(
            drho.iter()
                .zip(u.values().iter().zip(u_ref.values()))
                .map(|(dr, (a, b))| -dr * (2.0 - a.norm_sqr() - b.norm_sqr())),
        );
    let coupling = if pot.is_zero() {
        0.0
    } else {
        let v = pot.sample(t, grid);
        -w * stable_sum(drho.iter().zip(v).map(|(dr, v)| v * dr))
    };
    Ok(kinetic + well + coupling)
}

/// `Re ∫ ∇d · conj(∇s)` where `d` vanishes on the boundary and `s = a + b`
/// carries twice the boundary values.
fn cross_kinetic(d: &Field, s: &Field, boundary: Option<&Boundary>) -> f64 {
    let grid = d.grid();
    let spectral = Spectral::new(grid);
    let mut dh = d.values().to_vec();
    let mut sh = s.values().to_vec();
    match grid.bc() {
        BoundaryKind::Periodic => {
            spectral.fft(&mut dh);
            spectral.fft(&mut sh);
            let total = stable_sum(
                dh.iter().zip(&sh).enumerate().map(|(i, (a, b))| grid.k_squared(i) * (a * b.conj()).re),
            );
            total * grid.cell_volume() / grid.len() as f64
        }
        BoundaryKind::Dirichlet => {
            // The ramp of s has a constant gradient, which integrates to zero
            // against ∇d; only the sine part of s contributes.
            let b = boundary.copied().unwrap_or_else(Boundary::zero);
            let b2 = Boundary::new(2.0 * b.left, 2.0 * b.right);
            let l = grid.half_width();
            sh.iter_mut().enumerate().for_each(|(j, z)| *z -= b2.ramp(grid.coord(j), l));
            spectral.idst(&mut dh);
            spectral.idst(&mut sh);
            l * stable_sum(dh.iter().zip(&sh).zip(grid.modes()).map(|((a, c), k)| k * k * (a * c.conj()).re))
        }
    }
}

/// Lattice generalized mass `h^dim Σ (1 - |u|²)`.
pub fn mass_generalized(u: &Field) -> f64 {
    u.grid().cell_volume() * stable_sum(u.values().iter().map(|z| 1.0 - z.norm_sqr()))
}

/// `h^dim Σ ∂_tV(t) (1 - |u|²)`, the source term of the energy balance law.
pub fn energy_power(u: &Field, pot: &Potential, t: f64) -> f64 {
    let grid = u.grid();
    grid.cell_volume()
        * stable_sum((0..grid.len()).map(|i| {
            let [x, y] = grid.position(i);
            pot.time_derivative(t, x, y) * (1.0 - u.values()[i].norm_sqr())
        }))
}

/// `norm(u - u_ref)`; the difference has zero Dirichlet data.
pub fn error_norm(u: &Field, u_ref: &Field, kind: NormKind) -> Result<f64> {
    let d = u.sub(u_ref)?;
    let zero = Boundary::zero();
    norm(&d, kind, Some(&zero))
}

/// Least-squares slope of `log(error)` against `log(τ)`.
pub fn fit_order(taus: &[f64], errors: &[f64]) -> Result<f64> {
    if taus.len() != errors.len() {
        return Err(Error::InvalidArgument("step and error lists differ in length".into()));
    }
    if taus.len() < 3 {
        return Err(Error::InvalidArgument("need at least three points to fit an order".into()));
    }
    if taus.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("steps and errors must be positive and finite".into()));
    }
    let n = taus.len() as f64;
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("steps must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexEvent {
    /// Lower-left corner of the plaquette along each axis.
    pub cell: (usize, usize),
    /// Plaquette center coordinates.
    pub center: (f64, f64),
    pub charge: i64,
    /// Mean of `|u|²` over the four corners.
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VortexReport {
    pub events: Vec<VortexEvent>,
    /// Sum of charges over every determinate plaquette (before filtering).
    pub net_winding: i64,
    /// Plaquettes skipped because a corner value is exactly zero.
    pub indeterminate: usize,
}

/// Plaquette windings of a periodic 2D field.
///
/// Each plaquette `(i, j) → (i+1, j) → (i+1, j+1) → (i, j+1)` accumulates the
/// principal-value phase increments along its edges; the charge is that sum
/// over `2π`, rounded. With `density_threshold`, only events whose mean corner
/// density lies below it are listed.
pub fn vortex_windings(u: &Field, density_threshold: Option<f64>) -> Result<VortexReport> {
    let grid = u.grid();
    if grid.dim() != 2 || grid.bc() != BoundaryKind::Periodic {
        return Err(Error::Unsupported("vortex detection needs a periodic 2D field".into()));
    }
    let n = grid.points();
    let h = grid.spacing();
    let vals = u.values();
    let at = |i: usize, j: usize| vals[(i % n) * n + (j % n)];
    let mut report = VortexReport::default();
    for i in 0..n {
        for j in 0..n {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if corners.iter().any(|z| z.norm_sqr() == 0.0) {
                report.indeterminate += 1;
                continue;
            }
            let circulation: f64 = (0..4).map(|e| (corners[(e + 1) % 4] / corners[e]).arg()).sum();
            let charge = (circulation / (2.0 * PI)).round() as i64;
            if charge == 0 {
                continue;
            }
            report.net_winding += charge;
            let density = corners.iter().map(|z| z.norm_sqr()).sum::<f64>() / 4.0;
            if density_threshold.is_none_or(|th| density < th) {
                report.events.push(VortexEvent {
                    cell: (i, j),
                    center: (grid.coord(i) + 0.5 * h, grid.coord(j) + 0.5 * h),
                    charge,
                    density,
                });
            }
        }
    }
    Ok(report)
}

/// One diagnostics record; CSV column order follows the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRow {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub err_x2: Option<f64>,
    pub norm_l2: f64,
    pub norm_h2: f64,
    pub vortex_count: Option<usize>,
    pub net_winding: Option<i64>,
}

impl DiagRow {
    pub const CSV_HEADER: &'static str = "t,energy,mass,err_X2,norm_L2,norm_H2,vortex_count,net_winding";

    /// One CSV line with 17 significant digits; missing values are left empty.
    pub fn csv_line(&self) -> String {
        fn f(x: f64) -> String {
            format!("{x:.16e}")
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            f(self.t),
            f(self.energy),
            f(self.mass),
            self.err_x2.map(f).unwrap_or_default(),
            f(self.norm_l2),
            f(self.norm_h2),
            self.vortex_count.map(|v| v.to_string()).unwrap_or_default(),
            self.net_winding.map(|v| v.to_string()).unwrap_or_default(),
        )
    }
}
