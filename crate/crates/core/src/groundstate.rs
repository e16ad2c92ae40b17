//! Ginzburg-Landau energy minimizers on periodic grids.
//!
//! The field is treated as `2 N^dim` real unknowns with the inner product
//! `⟨a, b⟩ = h^dim Σ Re(conj(a) b)`. In that inner product the gradient of the
//! discrete energy is
//! `G = 2(-(1/2m)Δu - (1/ε²)(1-|u|²)u - Vu)`.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::energy_gl;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BoundaryKind, Grid};
use crate::params::PhysParams;
use crate::potential::Potential;
use crate::transform::Spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    /// Stop once `‖G‖ <= grad_tol · max(1, ‖G0‖)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub lbfgs_memory: usize,
    /// Step shrink factor of the backtracking line search.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Also stop once the energy has dropped by less than
    /// `energy_stagnation · max(1, |E|)` over the last `lbfgs_memory`
    /// iterations, i.e. when progress is at round-off level.
    pub energy_stagnation: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iters: 5000,
            lbfgs_memory: 10,
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            energy_stagnation: 1e-14,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || self.lbfgs_memory == 0 || !(self.energy_stagnation >= 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be positive and memory at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidArgument("backtrack factor must lie in (0, 1)".into()));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::InvalidArgument("sufficient decrease must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    EnergyStagnation,
    MaxIterations,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    /// Gradient tolerance met, or energy stagnated at round-off level.
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub initial_grad_norm: f64,
    pub final_grad_norm: f64,
    /// Energy after every accepted iteration, starting with the initial guess.
    pub energy_history: Vec<f64>,
}

/// Energy and gradient with the potential frozen at `t = 0`.
pub struct EnergyFunctional {
    grid: Arc<Grid>,
    spectral: Spectral,
    potential: Potential,
    v0: Vec<f64>,
    params: PhysParams,
}

impl EnergyFunctional {
    pub fn new(grid: Arc<Grid>, potential: &Potential, params: &PhysParams) -> Result<Self> {
        if grid.bc() != BoundaryKind::Periodic {
            return Err(Error::Unsupported("energy minimization needs a periodic grid".into()));
        }
        params.validate()?;
        Ok(Self {
            spectral: Spectral::new(&grid),
            v0: potential.sample(0.0, &grid),
            potential: *potential,
            params: *params,
            grid,
        })
    }

    pub fn energy(&self, u: &Field) -> f64 {
        energy_gl(u, &self.potential, 0.0, &self.params, None)
    }

    pub fn gradient(&self, u: &Field) -> Field {
        let mut lap = u.values().to_vec();
        self.spectral.fft(&mut lap);
        for (idx, z) in lap.iter_mut().enumerate() {
            *z *= -self.grid.k_squared(idx);
        }
        self.spectral.ifft(&mut lap);
        let disp = self.params.dispersion();
        let coupling = self.params.coupling();
        let g = u
            .values()
            .iter()
            .zip(&lap)
            .zip(&self.v0)
            .map(|((&z, &l), &v)| 2.0 * (-disp * l - coupling * (1.0 - z.norm_sqr()) * z - v * z))
            .collect();
        Field::from_raw(self.grid.clone(), g)
    }

    pub fn energy_and_gradient(&self, u: &Field) -> (f64, Field) {
        (self.energy(u), self.gradient(u))
    }
}

/// `(E, G)` for `u` with `V(0, ·)`.
pub fn energy_and_gradient(u: &Field, pot: &Potential, params: &PhysParams) -> Result<(f64, Field)> {
    let f = EnergyFunctional::new(u.grid_arc().clone(), pot, params)?;
    Ok(f.energy_and_gradient(u))
}

/// Real inner product `h^dim Σ Re(conj(a) b)`.
pub fn real_inner(a: &[Complex64], b: &[Complex64], weight: f64) -> f64 {
    weight * a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum::<f64>()
}

/// Rotates `u` so that its spatial mean is real and positive.
pub fn normalize_phase(u: &mut Field) {
    let mean: Complex64 = u.values().iter().sum();
    if mean.norm() > 0.0 {
        let rot = mean.conj() / mean.norm();
        u.values_mut().iter_mut().for_each(|z| *z *= rot);
    }
}

/// L-BFGS with Armijo backtracking from `initial` (default `u ≡ 1`).
///
/// Returns the last accepted iterate; `converged` is false when `max_iters` ran out or
/// the line search stalled.
pub fn minimize(
    grid: &Arc<Grid>,
    pot: &Potential,
    params: &PhysParams,
    cfg: &MinimizeConfig,
    initial: Option<Field>,
) -> Result<(Field, MinimizeReport)> {
    cfg.validate()?;
    let functional = EnergyFunctional::new(grid.clone(), pot, params)?;
    let w = grid.cell_volume();
    let mut u = initial.unwrap_or_else(|| Field::constant(grid.clone(), Complex64::new(1.0, 0.0)));
    u.check_same_grid(&Field::zeros(grid.clone()))?;
    let (mut energy, mut grad) = functional.energy_and_gradient(&u);
    let g0 = real_inner(grad.values(), grad.values(), w).sqrt();
    let target = cfg.grad_tol * g0.max(1.0);
    let mut history: VecDeque<(Vec<Complex64>, Vec<Complex64>, f64)> = VecDeque::new();
    let mut energies = vec![energy];
    let mut gnorm = g0;
    let mut stop = (gnorm <= target).then_some(StopReason::GradientTolerance);
    let mut iterations = 0;

    while stop.is_none() {
        if iterations >= cfg.max_iters {
            stop = Some(StopReason::MaxIterations);
            break;
        }
        let mut dir = two_loop(grad.values(), &history, w);
        let mut slope = real_inner(grad.values(), &dir, w);
        if !(slope < 0.0) {
            history.clear();
            dir = grad.values().iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
        }
        // First iteration of a fresh history: scale the steepest-descent step
        // so that it moves the field by O(1) at most.
        let mut alpha = if history.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut accepted = None;
        while alpha > 1e-20 {
            let trial: Vec<Complex64> = u.values().iter().zip(&dir).map(|(z, d)| z + alpha * d).collect();
            let trial = Field::from_raw(grid.clone(), trial);
            let e = functional.energy(&trial);
            if e.is_finite() && e <= energy + cfg.sufficient_decrease * alpha * slope {
                accepted = Some((trial, e));
                break;
            }
            alpha *= cfg.backtrack;
        }
        let Some((next, e_next)) = accepted else {
            stop = Some(StopReason::LineSearchFailure);
            break;
        };
        let g_next = functional.gradient(&next);
        let s: Vec<Complex64> = next.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
        let y: Vec<Complex64> = g_next.values().iter().zip(grad.values()).map(|(a, b)| a - b).collect();
        let sy = real_inner(&s, &y, w);
        if sy > 1e-12 * real_inner(&y, &y, w).sqrt() * real_inner(&s, &s, w).sqrt() {
            if history.len() == cfg.lbfgs_memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        u = next;
        grad = g_next;
        energy = e_next;
        energies.push(energy);
        iterations += 1;
        gnorm = real_inner(grad.values(), grad.values(), w).sqrt();
        let window = cfg.lbfgs_memory;
        if gnorm <= target {
            stop = Some(StopReason::GradientTolerance);
        } else if energies.len() > window
            && energies[energies.len() - 1 - window] - energy <= cfg.energy_stagnation * energy.abs().max(1.0)
        {
            stop = Some(StopReason::EnergyStagnation);
        }
    }
    let stop_reason = stop.expect("loop exits with a reason");

    normalize_phase(&mut u);
    let report = MinimizeReport {
        converged: matches!(stop_reason, StopReason::GradientTolerance | StopReason::EnergyStagnation),
        stop_reason,
        iterations,
        initial_energy: energies[0],
        final_energy: energy,
        initial_grad_norm: g0,
        final_grad_norm: gnorm,
        energy_history: energies,
    };
    Ok((u, report))
}

/// L-BFGS two-loop recursion: returns `-H g`.
fn two_loop(g: &[Complex64], history: &VecDeque<(Vec<Complex64>, Vec<Complex64>, f64)>, w: f64) -> Vec<Complex64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * real_inner(s, &q, w);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = real_inner(s, y, w) / real_inner(y, y, w);
        q.iter_mut().for_each(|z| *z *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * real_inner(y, &q, w);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|z| *z = -*z);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn grid2(n: usize, l: f64) -> Arc<Grid> {
        Arc::new(make_grid(2, l, n, BoundaryKind::Periodic).unwrap())
    }

    #[test]
    fn uniform_one_is_the_zero_energy_minimum() {
        let g = grid2(16, 2.0);
        let u = Field::constant(g, Complex64::new(1.0, 0.0));
        let (e, grad) = energy_and_gradient(&u, &Potential::Zero, &PhysParams::default()).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(grad.max_abs(), 0.0);
    }

    #[test]
    fn vacuum_is_a_critical_point_with_positive_energy() {
        let g = grid2(8, 1.0);
        let u = Field::zeros(g.clone());
        let (e, grad) = energy_and_gradient(&u, &Potential::Zero, &PhysParams::default()).unwrap();
        assert_eq!(grad.max_abs(), 0.0);
        // (1/2ε²)(2L)^2 with ε = 1, L = 1
        assert!((e - 2.0).abs() < 1e-13);
    }

    #[test]
    fn zero_potential_minimizer_is_one_after_gauge() {
        let g = grid2(16, 2.0);
        let start = Field::constant(g.clone(), Complex64::from_polar(1.0, 0.7));
        let (u, rep) = minimize(&g, &Potential::Zero, &PhysParams::default(), &MinimizeConfig::default(), Some(start)).unwrap();
        assert!(rep.converged);
        assert!(u.values().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn dirichlet_grid_rejected() {
        let g = Arc::new(make_grid(1, 1.0, 8, BoundaryKind::Dirichlet).unwrap());
        assert!(EnergyFunctional::new(g, &Potential::Zero, &PhysParams::default()).is_err());
    }
}
