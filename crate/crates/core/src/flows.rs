//! Exact sub-flows of the splitting.
//!
//! `A`: free Schrödinger flow `i∂_t u = (1/2m)Δu`, solved exactly in Fourier
//! (periodic) or sine (Dirichlet) modes. `B`: pointwise phase rotation
//! `u ↦ exp(-i[τ(1-|u|²)/ε² + ∫V]) u`, which preserves `|u|`.
//!
//! Both flows act either on the full field `u` or on a perturbation `v` of a
//! fixed background `φ`; in the latter case
//! `A(v) = e^{-iτΔ}v + (e^{-iτΔ}φ - φ)` and `B(v) = B(φ + v) - φ`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{BoundaryKind, Grid};
use crate::ops::Boundary;
use crate::params::PhysParams;
use crate::potential::{Potential, QuadratureRule};
use crate::transform::Spectral;

const CACHE_SLOTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    U(Field),
    V { v: Field, background: Field },
}

/// A field together with its clock. Only the `B` flow advances the clock.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub form: Form,
    pub t: f64,
}

impl FlowState {
    pub fn u_form(u: Field, t: f64) -> Self {
        Self { form: Form::U(u), t }
    }

    pub fn v_form(v: Field, background: Field, t: f64) -> Result<Self> {
        v.check_same_grid(&background)?;
        Ok(Self { form: Form::V { v, background }, t })
    }

    pub fn grid(&self) -> &Grid {
        self.primary().grid()
    }

    /// The evolved unknown: `u` or `v`.
    pub fn primary(&self) -> &Field {
        match &self.form {
            Form::U(u) => u,
            Form::V { v, .. } => v,
        }
    }

    /// The physical field `u` (`φ + v` in v-form).
    pub fn physical(&self) -> Field {
        match &self.form {
            Form::U(u) => u.clone(),
            Form::V { v, background } => {
                v.add(background).expect("v-form state holds fields on one grid")
            }
        }
    }
}

/// Cached exponential multipliers for the free flow on one grid.
#[derive(Debug)]
pub struct LinearPropagator {
    grid: Arc<Grid>,
    dispersion: f64,
    boundary: Option<Boundary>,
    spectral: Spectral,
    ramp: Vec<Complex64>,
    multipliers: Vec<(u64, Arc<Vec<Complex64>>)>,
    background: Option<Field>,
    background_shift: Vec<(u64, Arc<Vec<Complex64>>)>,
}

impl LinearPropagator {
    /// `boundary` is required on Dirichlet grids and ignored on periodic ones.
    pub fn new(grid: Arc<Grid>, params: &PhysParams, boundary: Option<Boundary>) -> Result<Self> {
        params.validate()?;
        let (boundary, ramp) = match grid.bc() {
            BoundaryKind::Periodic => (None, Vec::new()),
            BoundaryKind::Dirichlet => {
                let b = boundary.ok_or_else(|| {
                    Error::InvalidArgument("Dirichlet propagation needs boundary values".into())
                })?;
                let l = grid.half_width();
                let ramp = (0..grid.points()).map(|j| b.ramp(grid.coord(j), l)).collect();
                (Some(b), ramp)
            }
        };
        Ok(Self {
            spectral: Spectral::new(&grid),
            grid,
            dispersion: params.dispersion(),
            boundary,
            ramp,
            multipliers: Vec::new(),
            background: None,
            background_shift: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn boundary(&self) -> Option<&Boundary> {
        self.boundary.as_ref()
    }

    /// Harmonic ramp between the Dirichlet boundary values (empty when periodic).
    pub fn ramp(&self) -> &[Complex64] {
        &self.ramp
    }

    /// Multipliers `exp(i |k|² τ / (2m))` per spectral mode.
    pub fn multipliers(&mut self, tau: f64) -> Arc<Vec<Complex64>> {
        let key = tau.to_bits();
        if let Some((_, m)) = self.multipliers.iter().find(|(k, _)| *k == key) {
            return m.clone();
        }
        let grid = &self.grid;
        let m: Arc<Vec<Complex64>> = Arc::new(
            (0..grid.len())
                .map(|idx| Complex64::from_polar(1.0, grid.k_squared(idx) * self.dispersion * tau))
                .collect(),
        );
        push_bounded(&mut self.multipliers, key, m.clone());
        m
    }

    /// Propagates data that vanishes on the boundary (`v` in v-form on
    /// Dirichlet grids; any field on periodic grids).
    fn propagate_homogeneous(&mut self, data: &mut [Complex64], tau: f64) {
        let m = self.multipliers(tau);
        match self.grid.bc() {
            BoundaryKind::Periodic => {
                self.spectral.fft(data);
                data.iter_mut().zip(m.iter()).for_each(|(z, w)| *z *= w);
                self.spectral.ifft(data);
            }
            BoundaryKind::Dirichlet => {
                self.spectral.dst(data);
                data.iter_mut().zip(m.iter()).for_each(|(z, w)| *z *= w);
                self.spectral.idst(data);
            }
        }
    }

    /// Propagates a full field `u`. On Dirichlet grids `u = r + w` with `r`
    /// the boundary ramp (`Δr = 0`) and only `w` evolves.
    fn propagate_full(&mut self, data: &mut [Complex64], tau: f64) {
        if self.grid.bc() == BoundaryKind::Dirichlet {
            data.iter_mut().zip(&self.ramp).for_each(|(z, r)| *z -= r);
            self.propagate_homogeneous(data, tau);
            data.iter_mut().zip(&self.ramp).for_each(|(z, r)| *z += r);
        } else {
            self.propagate_homogeneous(data, tau);
        }
    }

    /// `e^{-iτΔ}φ - φ` for the background attached to the last v-form call.
    fn background_shift(&mut self, background: &Field, tau: f64) -> Arc<Vec<Complex64>> {
        if self.background.as_ref() != Some(background) {
            self.background = Some(background.clone());
            self.background_shift.clear();
        }
        let key = tau.to_bits();
        if let Some((_, s)) = self.background_shift.iter().find(|(k, _)| *k == key) {
            return s.clone();
        }
        let mut data = background.values().to_vec();
        self.propagate_full(&mut data, tau);
        data.iter_mut().zip(background.values()).for_each(|(z, p)| *z -= p);
        let s = Arc::new(data);
        push_bounded(&mut self.background_shift, key, s.clone());
        s
    }

    fn check_grid(&self, f: &Field) -> Result<()> {
        if f.grid() != self.grid.as_ref() {
            return Err(Error::ShapeMismatch("propagator and field grids differ".into()));
        }
        Ok(())
    }
}

fn push_bounded(cache: &mut Vec<(u64, Arc<Vec<Complex64>>)>, key: u64, value: Arc<Vec<Complex64>>) {
    if cache.len() == CACHE_SLOTS {
        cache.remove(0);
    }
    cache.push((key, value));
}

fn check_step(tau: f64) -> Result<()> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be non-negative and finite, got {tau}")));
    }
    Ok(())
}

/// Free flow over `τ >= 0`. The clock is unchanged.
pub fn flow_a(state: &mut FlowState, tau: f64, prop: &mut LinearPropagator) -> Result<()> {
    check_step(tau)?;
    flow_a_signed(state, tau, prop)
}

/// Free flow for any real `τ`, including backward steps.
pub fn flow_a_signed(state: &mut FlowState, tau: f64, prop: &mut LinearPropagator) -> Result<()> {
    match &mut state.form {
        Form::U(u) => {
            prop.check_grid(u)?;
            prop.propagate_full(u.values_mut(), tau);
        }
        Form::V { v, background } => {
            prop.check_grid(v)?;
            let shift = prop.background_shift(background, tau);
            prop.propagate_homogeneous(v.values_mut(), tau);
            v.values_mut().iter_mut().zip(shift.iter()).for_each(|(z, s)| *z += s);
        }
    }
    Ok(())
}

/// Nonlinear-potential flow over `τ >= 0` starting at the state's clock;
/// advances the clock by `τ`.
pub fn flow_b(
    state: &mut FlowState,
    tau: f64,
    pot: &Potential,
    params: &PhysParams,
    rule: QuadratureRule,
) -> Result<()> {
    check_step(tau)?;
    flow_b_signed(state, tau, pot, params, rule)
}

/// [`flow_b`] for any real `τ`; a negative step moves the clock backwards and
/// integrates the potential over `[t + τ, t]` with reversed sign.
pub fn flow_b_signed(
    state: &mut FlowState,
    tau: f64,
    pot: &Potential,
    params: &PhysParams,
    rule: QuadratureRule,
) -> Result<()> {
    let grid = state.grid();
    if grid.bc() == BoundaryKind::Dirichlet && !pot.is_zero() {
        return Err(Error::Unsupported(
            "Dirichlet grids are only supported with a zero potential".into(),
        ));
    }
    let potential_phase = if pot.is_zero() {
        None
    } else if tau >= 0.0 {
        Some(pot.time_integral(state.t, tau, rule, grid)?)
    } else {
        let back = pot.time_integral(state.t + tau, -tau, rule, grid)?;
        Some(back.into_iter().map(|x| -x).collect())
    };
    let coupling = params.coupling() * tau;
    let rotate = |z: Complex64, vint: f64| -> Complex64 {
        let phase = coupling * (1.0 - z.norm_sqr()) + vint;
        z * Complex64::from_polar(1.0, -phase)
    };
    match &mut state.form {
        Form::U(u) => {
            let vals = u.values_mut();
            match &potential_phase {
                Some(p) => vals.iter_mut().zip(p).for_each(|(z, &w)| *z = rotate(*z, w)),
                None => vals.iter_mut().for_each(|z| *z = rotate(*z, 0.0)),
            }
        }
        Form::V { v, background } => {
            let phi = background.values();
            let vals = v.values_mut();
            for (i, z) in vals.iter_mut().enumerate() {
                let w = potential_phase.as_ref().map_or(0.0, |p| p[i]);
                *z = rotate(phi[i] + *z, w) - phi[i];
            }
        }
    }
    state.t += tau;
    Ok(())
}

/// `max |u - (φ + v)|` between a u-form and a v-form state on the same clock.
pub fn uv_equivalence_check(u_state: &FlowState, v_state: &FlowState) -> Result<f64> {
    let u = match &u_state.form {
        Form::U(u) => u,
        Form::V { .. } => return Err(Error::InvalidArgument("first state must be in u-form".into())),
    };
    let (v, background) = match &v_state.form {
        Form::V { v, background } => (v, background),
        Form::U(_) => return Err(Error::InvalidArgument("second state must be in v-form".into())),
    };
    u.check_same_grid(v)?;
    if u_state.t != v_state.t {
        return Err(Error::InvalidArgument(format!(
            "clocks differ: {} vs {}",
            u_state.t, v_state.t
        )));
    }
    Ok(u
        .values()
        .iter()
        .zip(v.values().iter().zip(background.values()))
        .fold(0.0_f64, |m, (a, (b, p))| m.max((a - (p + b)).norm())))
}
