//! Lie-Trotter and Strang compositions and the time loop.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::background::soliton_solution;
use crate::diagnostics::{energy_gl, error_norm, mass_generalized, vortex_windings, DiagRow};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::flows::{flow_a, flow_b, FlowState, Form, LinearPropagator};
use crate::grid::{BoundaryKind, Grid};
use crate::ops::{norm, NormKind};
use crate::params::PhysParams;
use crate::potential::{Potential, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lie,
    Strang,
}

impl Scheme {
    /// Time-integral rule whose local error matches the scheme.
    pub fn default_rule(self) -> QuadratureRule {
        match self {
            Scheme::Lie => QuadratureRule::Left,
            Scheme::Strang => QuadratureRule::Midpoint,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Scheme::Lie => 1,
            Scheme::Strang => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lie => "lie",
            Scheme::Strang => "strang",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    #[default]
    U,
    V,
}

/// Blow-up guard: abort once `|u| > GUARD_FACTOR · max(1, ‖u0‖_∞)`.
pub const GUARD_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    #[serde(default)]
    pub form: FormKind,
    pub tau: f64,
    /// Requested horizon; rounded to a whole number of steps.
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub rule: Option<QuadratureRule>,
    /// Record diagnostics every `cadence` steps (and always at the last one).
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

fn default_cadence() -> usize {
    1
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, tau: f64, t_final: f64) -> Self {
        Self { scheme, form: FormKind::U, tau, t_final, rule: None, cadence: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidArgument(format!("step must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be non-negative, got {}", self.t_final)));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidArgument("cadence must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule.unwrap_or_else(|| self.scheme.default_rule())
    }

    /// Number of steps and the horizon actually reached, `n τ`.
    pub fn resolved_steps(&self) -> (usize, f64) {
        let n = (self.t_final / self.tau).round() as usize;
        (n, n as f64 * self.tau)
    }
}

/// `u^{n+1} = Φ_B^{τ, t_n} ∘ Φ_A^τ (u^n)`
pub fn lie_step(
    state: &mut FlowState,
    tau: f64,
    prop: &mut LinearPropagator,
    pot: &Potential,
    params: &PhysParams,
    rule: QuadratureRule,
) -> Result<()> {
    flow_a(state, tau, prop)?;
    flow_b(state, tau, pot, params, rule)
}

/// `u^{n+1} = Φ_A^{τ/2} ∘ Φ_B^{τ, t_n} ∘ Φ_A^{τ/2} (u^n)`; the potential
/// integral of the middle substep starts at `t_n`.
pub fn strang_step(
    state: &mut FlowState,
    tau: f64,
    prop: &mut LinearPropagator,
    pot: &Potential,
    params: &PhysParams,
    rule: QuadratureRule,
) -> Result<()> {
    flow_a(state, 0.5 * tau, prop)?;
    flow_b(state, tau, pot, params, rule)?;
    flow_a(state, 0.5 * tau, prop)
}

pub fn step(
    scheme: Scheme,
    state: &mut FlowState,
    tau: f64,
    prop: &mut LinearPropagator,
    pot: &Potential,
    params: &PhysParams,
    rule: QuadratureRule,
) -> Result<()> {
    match scheme {
        Scheme::Lie => lie_step(state, tau, prop, pot, params, rule),
        Scheme::Strang => strang_step(state, tau, prop, pot, params, rule),
    }
}

/// Hook invoked at every recorded step.
pub trait Observer {
    fn observe(&mut self, step: usize, state: &FlowState, row: &DiagRow) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(usize, &FlowState, &DiagRow) -> Result<()>,
{
    fn observe(&mut self, step: usize, state: &FlowState, row: &DiagRow) -> Result<()> {
        self(step, state, row)
    }
}

/// What goes into each [`DiagRow`].
#[derive(Default)]
pub struct DiagnosticsSpec<'a> {
    /// Reference field at time `t`, for the `X²` error column.
    pub reference: Option<Box<dyn FnMut(f64) -> Result<Field> + 'a>>,
    /// Count plaquette windings (periodic 2D only).
    pub vortices: bool,
    pub vortex_threshold: Option<f64>,
    /// Skip the L² and H² norm columns (they cost two extra transforms).
    pub skip_norms: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<usize>,
    pub rows: Vec<DiagRow>,
    pub final_state: FlowState,
    pub n_steps: usize,
    /// Horizon actually reached after rounding to whole steps.
    pub t_final: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

pub fn diagnostics_row(
    state: &FlowState,
    prop: &LinearPropagator,
    pot: &Potential,
    params: &PhysParams,
    spec: &mut DiagnosticsSpec<'_>,
) -> Result<DiagRow> {
    let u = state.physical();
    let boundary = prop.boundary();
    let err_x2 = match spec.reference.as_mut() {
        Some(reference) => Some(error_norm(&u, &reference(state.t)?, NormKind::X2)?),
        None => None,
    };
    let (norm_l2, norm_h2) = if spec.skip_norms {
        (f64::NAN, f64::NAN)
    } else {
        (norm(&u, NormKind::L2, boundary)?, norm(&u, NormKind::H2, boundary)?)
    };
    let (vortex_count, net_winding) = if spec.vortices {
        let report = vortex_windings(&u, spec.vortex_threshold)?;
        (Some(report.events.len()), Some(report.net_winding))
    } else {
        (None, None)
    };
    Ok(DiagRow {
        t: state.t,
        energy: energy_gl(&u, pot, state.t, params, boundary),
        mass: mass_generalized(&u),
        err_x2,
        norm_l2,
        norm_h2,
        vortex_count,
        net_winding,
    })
}

fn max_physical_modulus(state: &FlowState) -> f64 {
    match &state.form {
        Form::U(u) => u.values().iter().fold(0.0_f64, |m, z| if z.is_finite() { m.max(z.norm()) } else { f64::NAN }),
        Form::V { v, background } => v
            .values()
            .iter()
            .zip(background.values())
            .fold(0.0_f64, |m, (a, b)| if a.is_finite() { m.max((a + b).norm()) } else { f64::NAN }),
    }
}

/// Runs `n = round(T/τ)` steps, recording diagnostics at step 0, every
/// `cadence` steps and at the last step.
pub fn evolve(
    state0: FlowState,
    cfg: &SchemeConfig,
    prop: &mut LinearPropagator,
    pot: &Potential,
    params: &PhysParams,
    spec: &mut DiagnosticsSpec<'_>,
    mut observer: Option<&mut dyn Observer>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let (n_steps, t_final) = cfg.resolved_steps();
    let rule = cfg.rule();
    let limit = GUARD_FACTOR * max_physical_modulus(&state0).max(1.0);
    let mut state = state0;
    let mut steps = Vec::new();
    let mut rows = Vec::new();
    let mut record = |n: usize, state: &FlowState, prop: &LinearPropagator| -> Result<()> {
        let row = diagnostics_row(state, prop, pot, params, spec)?;
        if let Some(obs) = observer.as_mut() {
            obs.observe(n, state, &row)?;
        }
        steps.push(n);
        rows.push(row);
        Ok(())
    };
    record(0, &state, prop)?;
    for n in 1..=n_steps {
        let previous = state.physical();
        step(cfg.scheme, &mut state, cfg.tau, prop, pot, params, rule)?;
        let peak = max_physical_modulus(&state);
        if !(peak <= limit) {
            let reason = if peak.is_nan() {
                "non-finite field value".to_string()
            } else {
                format!("max |u| = {peak:.6e} exceeds guard {limit:.6e}")
            };
            return Err(Error::BlowUp { step: n, time: state.t, reason, last_valid: Box::new(previous) });
        }
        if n % cfg.cadence == 0 || n == n_steps {
            record(n, &state, prop)?;
        }
    }
    Ok(Trajectory { steps, rows, final_state: state, n_steps, t_final })
}

/// Problems with a reference solution for error measurements.
#[derive(Debug, Clone)]
pub enum ReferenceProblem {
    /// Exact traveling dark soliton of speed `c`.
    Soliton { c: f64, grid: Arc<Grid> },
    /// Fine-step Strang run from `initial`.
    Numerical {
        initial: Field,
        propagator_boundary: Option<crate::ops::Boundary>,
        potential: Potential,
        params: PhysParams,
        tau_ref: f64,
    },
}

/// Reference step used when no closed form is available.
pub const DEFAULT_TAU_REF: f64 = 5e-5;

impl ReferenceProblem {
    pub fn analytic(&self, t: f64) -> Result<Field> {
        match self {
            ReferenceProblem::Soliton { c, grid } => soliton_solution(*c, t, grid),
            ReferenceProblem::Numerical { .. } => Err(Error::Unsupported(
                "this problem has no closed-form solution".into(),
            )),
        }
    }
}

/// Evaluates references, caching fine-step numerical runs by time.
#[derive(Debug)]
pub struct ReferenceSolver {
    problem: ReferenceProblem,
    /// Keyed by the number of reference steps.
    cache: HashMap<u64, Field>,
}

impl ReferenceSolver {
    pub fn new(problem: ReferenceProblem) -> Self {
        Self { problem, cache: HashMap::new() }
    }

    pub fn problem(&self) -> &ReferenceProblem {
        &self.problem
    }

    pub fn at(&mut self, t: f64) -> Result<Field> {
        if let ReferenceProblem::Soliton { .. } = self.problem {
            return self.problem.analytic(t);
        }
        let key = match &self.problem {
            ReferenceProblem::Numerical { tau_ref, .. } => (t / tau_ref).round() as u64,
            ReferenceProblem::Soliton { .. } => unreachable!(),
        };
        if let Some(f) = self.cache.get(&key) {
            return Ok(f.clone());
        }
        let field = reference_solution(&self.problem, t)?;
        self.cache.insert(key, field.clone());
        Ok(field)
    }
}

/// Analytic sample when available, otherwise a Strang run with `tau_ref`
/// (the horizon must be a whole number of reference steps).
pub fn reference_solution(problem: &ReferenceProblem, t: f64) -> Result<Field> {
    match problem {
        ReferenceProblem::Soliton { .. } => problem.analytic(t),
        ReferenceProblem::Numerical { initial, propagator_boundary, potential, params, tau_ref } => {
            let n = (t / tau_ref).round();
            if ((n * tau_ref) - t).abs() > 1e-9 * t.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "reference time {t} is not a multiple of tau_ref = {tau_ref}"
                )));
            }
            let grid = initial.grid_arc().clone();
            if grid.bc() == BoundaryKind::Dirichlet && propagator_boundary.is_none() {
                return Err(Error::InvalidArgument("Dirichlet reference needs boundary values".into()));
            }
            let mut prop = LinearPropagator::new(grid, params, *propagator_boundary)?;
            let mut state = FlowState::u_form(initial.clone(), 0.0);
            let rule = Scheme::Strang.default_rule();
            for _ in 0..n as usize {
                strang_step(&mut state, *tau_ref, &mut prop, potential, params, rule)?;
            }
            Ok(state.physical())
        }
    }
}
