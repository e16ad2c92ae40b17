//! Lie-Trotter and Strang time-splitting for the Gross-Pitaevskii equation
//!
//! ```text
//! i ∂_t u = (1/2m) Δu + (1/ε²)(1 - |u|²) u + V(t, x) u,    |u| → 1 at infinity,
//! ```
//!
//! on uniform 1D/2D grids, together with the diagnostics used to check the
//! schemes: Ginzburg-Landau energy, generalized mass, Zhidkov-type `X²` error
//! norms, convergence-order fits and plaquette vortex windings.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flows;
pub mod grid;
pub mod groundstate;
pub mod integrators;
pub mod ops;
pub mod params;
pub mod potential;
pub mod snapshot;
pub mod transform;

pub use background::{eval_background, soliton_solution, Background};
pub use diagnostics::{
    energy_gap, energy_gl, error_norm, fit_order, mass_generalized, vortex_windings, DiagRow,
    VortexEvent, VortexReport,
};
pub use error::{Error, Result};
pub use field::Field;
pub use flows::{flow_a, flow_b, uv_equivalence_check, FlowState, Form, LinearPropagator};
pub use grid::{make_grid, BoundaryKind, Grid};
pub use integrators::{evolve, lie_step, strang_step, Scheme, SchemeConfig, Trajectory};
pub use ops::{derivative, norm, Boundary, NormKind};
pub use params::PhysParams;
pub use potential::{eval_potential, potential_time_integral, Potential, QuadratureRule};

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
