//! JSON run configuration.
//!
//! Every field except `scenario` is optional; missing values are filled from
//! the scenario preset by [`RunConfig::resolve`]. The resolved configuration is
//! what gets written to `run_metadata.json`.

use std::fs;
use std::path::{Path, PathBuf};

use gpsplit_core::groundstate::MinimizeConfig;
use gpsplit_core::integrators::FormKind;
use gpsplit_core::{Background, BoundaryKind, Complex64, PhysParams, Potential, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SolitonConvergence,
    SolitonConservation,
    PerturbedConvergence,
    VortexCaseI,
    VortexCaseIi,
    Custom,
}

impl Scenario {
    pub fn is_sweep(self) -> bool {
        matches!(self, Scenario::SolitonConvergence | Scenario::PerturbedConvergence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
    pub bc: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// The background profile itself.
    Background,
    /// Background minus `amplitude · exp(-|x|²)`.
    PerturbedSoliton {
        #[serde(default = "half")]
        amplitude: f64,
    },
    /// Energy minimizer with the potential frozen at `t = 0`.
    GroundState,
    Constant { value: Complex64 },
    /// Background plus `count` complex Gaussian bumps with seeded random
    /// centers and phases.
    RandomBumps { count: usize, amplitude: f64, width: f64 },
    Snapshot { path: PathBuf },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    pub grid: Option<GridSpec>,
    pub params: Option<PhysParams>,
    pub background: Option<Background>,
    pub potential: Option<Potential>,
    pub initial: Option<InitialCondition>,
    /// Schemes to run (sweeps and conservation runs use all of them).
    pub schemes: Option<Vec<Scheme>>,
    pub form: Option<FormKind>,
    /// Step sizes; a single entry for single-trajectory runs.
    pub taus: Option<Vec<f64>>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub tau_ref: Option<f64>,
    pub cadence: Option<usize>,
    pub snapshot_every: Option<usize>,
    pub vortices: Option<bool>,
    pub vortex_threshold: Option<f64>,
    pub minimize: Option<MinimizeConfig>,
    pub spatial_check: Option<bool>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Fully specified run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub params: PhysParams,
    pub background: Background,
    pub potential: Potential,
    pub initial: InitialCondition,
    pub schemes: Vec<Scheme>,
    pub form: FormKind,
    pub taus: Vec<f64>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub tau_ref: Option<f64>,
    pub cadence: usize,
    pub snapshot_every: Option<usize>,
    pub vortices: bool,
    pub vortex_threshold: Option<f64>,
    pub minimize: MinimizeConfig,
    pub spatial_check: bool,
    pub output: PathBuf,
    pub seed: u64,
}

pub const SOLITON_SPEED: f64 = 1.3;
pub const CONVERGENCE_TAUS: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        Self { scenario: Some(scenario), ..Self::default() }
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let scenario = self
            .scenario
            .ok_or_else(|| HarnessError::Config("missing required field `scenario`".into()))?;
        let mut r = preset(scenario);
        let custom = scenario == Scenario::Custom;
        let need = |name: &str| HarnessError::Config(format!("custom runs must set `{name}`"));

        if let Some(g) = self.grid {
            r.grid = g;
        } else if custom {
            return Err(need("grid"));
        }
        if let Some(p) = self.params {
            r.params = p;
        }
        if let Some(b) = self.background {
            r.background = b;
        }
        if let Some(p) = self.potential {
            r.potential = p;
        }
        if let Some(i) = &self.initial {
            r.initial = i.clone();
        }
        if let Some(s) = &self.schemes {
            r.schemes = s.clone();
        }
        if let Some(f) = self.form {
            r.form = f;
        }
        if let Some(t) = &self.taus {
            r.taus = t.clone();
        } else if custom {
            return Err(need("taus"));
        }
        if let Some(t) = self.t_final {
            r.t_final = t;
        } else if custom {
            return Err(need("T"));
        }
        if self.tau_ref.is_some() {
            r.tau_ref = self.tau_ref;
        }
        if let Some(c) = self.cadence {
            r.cadence = c;
        } else if custom {
            r.cadence = if r.grid.dim == 2 { 50 } else { 1 };
        }
        if self.snapshot_every.is_some() {
            r.snapshot_every = self.snapshot_every;
        }
        if let Some(v) = self.vortices {
            r.vortices = v;
        } else if custom {
            r.vortices = r.grid.dim == 2 && r.grid.bc == BoundaryKind::Periodic;
        }
        if self.vortex_threshold.is_some() {
            r.vortex_threshold = self.vortex_threshold;
        }
        if let Some(m) = &self.minimize {
            r.minimize = m.clone();
        }
        if let Some(s) = self.spatial_check {
            r.spatial_check = s;
        }
        if let Some(o) = &self.output {
            r.output = o.clone();
        }
        if let Some(s) = self.seed {
            r.seed = s;
        }
        r.validate()?;
        Ok(r)
    }
}

fn preset(scenario: Scenario) -> ResolvedConfig {
    let soliton_grid = GridSpec { dim: 1, half_width: 60.0, points: 1024, bc: BoundaryKind::Dirichlet };
    let vortex_grid = GridSpec { dim: 2, half_width: 5.0, points: 256, bc: BoundaryKind::Periodic };
    let base = ResolvedConfig {
        scenario,
        grid: soliton_grid,
        params: PhysParams::default(),
        background: Background::DarkSoliton { c: SOLITON_SPEED },
        potential: Potential::Zero,
        initial: InitialCondition::Background,
        schemes: vec![Scheme::Lie, Scheme::Strang],
        form: FormKind::U,
        taus: CONVERGENCE_TAUS.to_vec(),
        t_final: 1.0,
        tau_ref: None,
        cadence: 1,
        snapshot_every: None,
        vortices: false,
        vortex_threshold: None,
        minimize: MinimizeConfig::default(),
        spatial_check: true,
        output: PathBuf::from(format!("out/{}", scenario_name(scenario))),
        seed: 0,
    };
    let vortex = |potential: Potential, t_final: f64| ResolvedConfig {
        grid: vortex_grid,
        params: PhysParams { eps: 0.2, mass: 15.0 },
        background: Background::constant_one(),
        potential,
        initial: InitialCondition::GroundState,
        schemes: vec![Scheme::Strang],
        taus: vec![1e-3],
        t_final,
        cadence: 50,
        snapshot_every: Some(100),
        vortices: true,
        spatial_check: false,
        ..base.clone()
    };
    match scenario {
        Scenario::SolitonConvergence | Scenario::Custom => base,
        Scenario::PerturbedConvergence => ResolvedConfig {
            initial: InitialCondition::PerturbedSoliton { amplitude: 0.5 },
            tau_ref: Some(5e-5),
            ..base
        },
        Scenario::SolitonConservation => ResolvedConfig {
            taus: vec![1e-2, 5e-3, 2.5e-3],
            spatial_check: false,
            ..base
        },
        Scenario::VortexCaseI => {
            vortex(Potential::MovingGaussian { v0: 50.0, gamma: 10.0, a: 1.0 }, 1.0)
        }
        Scenario::VortexCaseIi => vortex(
            Potential::RotatingGaussian { v0: 50.0, gamma: 10.0, a: 1.0, r0: 0.5 },
            4.0,
        ),
    }
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::SolitonConvergence => "soliton_convergence",
        Scenario::SolitonConservation => "soliton_conservation",
        Scenario::PerturbedConvergence => "perturbed_convergence",
        Scenario::VortexCaseI => "vortex_case_i",
        Scenario::VortexCaseIi => "vortex_case_ii",
        Scenario::Custom => "custom",
    }
}

impl ResolvedConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        self.params.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.background.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.schemes.is_empty() {
            return bad("`schemes` must not be empty".into());
        }
        if self.taus.is_empty() {
            return bad("`taus` must not be empty".into());
        }
        if self.taus.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return bad(format!("every step must lie in (0, 1], got {:?}", self.taus));
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("the step sweep must be strictly decreasing, got {:?}", self.taus));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(format!("`T` must be non-negative, got {}", self.t_final));
        }
        if self.cadence == 0 || self.snapshot_every == Some(0) {
            return bad("`cadence` and `snapshot_every` must be at least 1".into());
        }
        if let Some(every) = self.snapshot_every {
            if every % self.cadence != 0 {
                return bad(format!(
                    "`snapshot_every` ({every}) must be a multiple of `cadence` ({})",
                    self.cadence
                ));
            }
        }
        if let Some(t) = self.tau_ref {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("`tau_ref` must lie in (0, 1], got {t}"));
            }
        }
        let g = &self.grid;
        gpsplit_core::make_grid(g.dim, g.half_width, g.points, g.bc)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        match self.scenario {
            Scenario::SolitonConvergence | Scenario::PerturbedConvergence | Scenario::SolitonConservation => {
                if g.dim != 1 {
                    return bad(format!("{} runs are one-dimensional", scenario_name(self.scenario)));
                }
                if !matches!(self.background, Background::DarkSoliton { .. }) {
                    return bad("soliton scenarios need a dark_soliton background".into());
                }
                if self.scenario.is_sweep() && self.taus.len() < 3 {
                    return bad("a convergence sweep needs at least three steps".into());
                }
                if self.scenario == Scenario::SolitonConvergence
                    && (!self.potential.is_zero() || self.params != PhysParams::default())
                {
                    return bad("the exact soliton reference needs V = 0, eps = 1, m = 1/2".into());
                }
            }
            Scenario::VortexCaseI | Scenario::VortexCaseIi => {
                if g.dim != 2 || g.bc != BoundaryKind::Periodic {
                    return bad("vortex scenarios need a periodic 2D grid".into());
                }
                if self.taus.len() != 1 {
                    return bad("vortex scenarios take a single step size".into());
                }
            }
            Scenario::Custom => {}
        }
        if g.bc == BoundaryKind::Dirichlet && !self.potential.is_zero() {
            return bad("Dirichlet grids support only a zero potential".into());
        }
        if self.initial == InitialCondition::GroundState && g.bc != BoundaryKind::Periodic {
            return bad("ground-state initial data needs a periodic grid".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for s in [
            Scenario::SolitonConvergence,
            Scenario::SolitonConservation,
            Scenario::PerturbedConvergence,
            Scenario::VortexCaseI,
            Scenario::VortexCaseIi,
        ] {
            RunConfig::for_scenario(s).resolve().unwrap();
        }
    }

    #[test]
    fn custom_requires_grid_and_steps() {
        assert!(RunConfig::for_scenario(Scenario::Custom).resolve().is_err());
    }

    #[test]
    fn non_decreasing_sweep_rejected() {
        let mut c = RunConfig::for_scenario(Scenario::SolitonConvergence);
        c.taus = Some(vec![1e-2, 1e-2, 5e-3]);
        assert!(c.resolve().is_err());
    }

    #[test]
    fn convergence_rejects_2d() {
        let mut c = RunConfig::for_scenario(Scenario::SolitonConvergence);
        c.grid = Some(GridSpec { dim: 2, half_width: 5.0, points: 64, bc: BoundaryKind::Periodic });
        assert!(c.resolve().is_err());
    }

    #[test]
    fn parses_json_with_overrides() {
        let text = r#"{
            "scenario": "vortex_case_i",
            "grid": {"dim": 2, "L": 5.0, "N": 64, "bc": "periodic"},
            "potential": {"kind": "moving_gaussian", "v0": 0.0, "gamma": 10.0, "a": 1.0},
            "T": 0.1
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.grid.points, 64);
        assert_eq!(r.params.mass, 15.0);
        assert_eq!(r.t_final, 0.1);
        assert!(serde_json::from_str::<RunConfig>(r#"{"scenario": "custom", "bogus": 1}"#).is_err());
    }
}
