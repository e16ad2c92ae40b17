//! Scenario runners: convergence sweeps, conservation runs, vortex cases,
//! custom trajectories and ground-state computation.

use std::path::Path;
use std::sync::Arc;

use gpsplit_core::diagnostics::{energy_gap, vortex_windings, VortexReport};
use gpsplit_core::groundstate::{minimize, MinimizeReport};
use gpsplit_core::integrators::{
    evolve, DiagnosticsSpec, FormKind, Observer, ReferenceProblem, ReferenceSolver, SchemeConfig,
    Trajectory,
};
use gpsplit_core::snapshot::read_snapshot;
use gpsplit_core::{
    error_norm, eval_background, eval_potential, fit_order, make_grid, Background, Boundary,
    BoundaryKind, Complex64, DiagRow, Field, FlowState, Grid, LinearPropagator, NormKind, Scheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{GridSpec, InitialCondition, ResolvedConfig, Scenario};
use crate::error::{HarnessError, Result};
use crate::output;

/// Grid, background and boundary data shared by every run of a config.
pub struct Setup {
    pub grid: Arc<Grid>,
    pub background: Field,
    pub boundary: Option<Boundary>,
}

pub fn setup(cfg: &ResolvedConfig, spec: &GridSpec) -> Result<Setup> {
    let grid = Arc::new(make_grid(spec.dim, spec.half_width, spec.points, spec.bc)?);
    let background = eval_background(&cfg.background, &grid)?;
    let boundary = (grid.bc() == BoundaryKind::Dirichlet).then(|| cfg.background.limits());
    Ok(Setup { grid, background, boundary })
}

/// Initial field `u0`; the ground state also returns its optimizer report.
pub fn initial_field(cfg: &ResolvedConfig, s: &Setup) -> Result<(Field, Option<MinimizeReport>)> {
    let grid = &s.grid;
    let bg = &s.background;
    Ok(match &cfg.initial {
        InitialCondition::Background => (bg.clone(), None),
        InitialCondition::PerturbedSoliton { amplitude } => {
            let bump = Field::from_fn(grid.clone(), |x, y| Complex64::new(amplitude * (-(x * x + y * y)).exp(), 0.0));
            (bg.sub(&bump)?, None)
        }
        InitialCondition::Constant { value } => (Field::constant(grid.clone(), *value), None),
        InitialCondition::GroundState => {
            let (u, report) = minimize(grid, &cfg.potential, &cfg.params, &cfg.minimize, None)?;
            (u, Some(report))
        }
        InitialCondition::RandomBumps { count, amplitude, width } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let l = grid.half_width();
            let bumps: Vec<(f64, f64, Complex64)> = (0..*count)
                .map(|_| {
                    let cx = rng.gen_range(-0.5 * l..0.5 * l);
                    let cy = if grid.dim() == 2 { rng.gen_range(-0.5 * l..0.5 * l) } else { 0.0 };
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    (cx, cy, Complex64::from_polar(*amplitude, phase))
                })
                .collect();
            let w2 = width * width;
            let noise = Field::from_fn(grid.clone(), |x, y| {
                bumps
                    .iter()
                    .map(|(cx, cy, a)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / w2).exp())
                    .sum()
            });
            (bg.add(&noise)?, None)
        }
        InitialCondition::Snapshot { path } => {
            let (_, f) = read_snapshot(path)?;
            if f.grid() != grid.as_ref() {
                return Err(HarnessError::Config(format!(
                    "{}: snapshot grid differs from the configured grid",
                    path.display()
                )));
            }
            (f, None)
        }
    })
}

pub fn initial_state(form: FormKind, u0: &Field, s: &Setup) -> Result<FlowState> {
    Ok(match form {
        FormKind::U => FlowState::u_form(u0.clone(), 0.0),
        FormKind::V => FlowState::v_form(u0.sub(&s.background)?, s.background.clone(), 0.0)?,
    })
}

fn scheme_config(cfg: &ResolvedConfig, scheme: Scheme, tau: f64) -> SchemeConfig {
    SchemeConfig {
        scheme,
        form: cfg.form,
        tau,
        t_final: cfg.t_final,
        rule: None,
        cadence: cfg.cadence,
    }
}

// ---------------------------------------------------------------------------
// Convergence sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub tau: f64,
    pub n_steps: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub err_x2: f64,
    pub energy_err: f64,
    pub mass_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSlopes {
    pub scheme: Scheme,
    pub x2_slope: f64,
    pub energy_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialCheck {
    pub points: usize,
    pub doubled_points: usize,
    /// `|e_N - e_2N|` for Strang at the smallest step.
    pub spatial_error_estimate: f64,
    pub smallest_splitting_error: f64,
    /// Estimate at least 100x below the smallest splitting error.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub slopes: Vec<SchemeSlopes>,
    pub reference: String,
    pub spatial_check: Option<SpatialCheck>,
}

impl ConvergenceReport {
    pub fn slopes_for(&self, scheme: Scheme) -> Option<&SchemeSlopes> {
        self.slopes.iter().find(|s| s.scheme == scheme)
    }
}

fn reference_problem(cfg: &ResolvedConfig, s: &Setup, u0: &Field) -> Result<ReferenceProblem> {
    match (cfg.tau_ref, &cfg.initial, cfg.background) {
        (None, InitialCondition::Background, Background::DarkSoliton { c })
            if cfg.potential.is_zero() && cfg.params == Default::default() =>
        {
            Ok(ReferenceProblem::Soliton { c, grid: s.grid.clone() })
        }
        (tau_ref, ..) => Ok(ReferenceProblem::Numerical {
            initial: u0.clone(),
            propagator_boundary: s.boundary,
            potential: cfg.potential,
            params: cfg.params,
            tau_ref: tau_ref.unwrap_or(gpsplit_core::integrators::DEFAULT_TAU_REF),
        }),
    }
}

struct SweepRun {
    row: ConvergenceRow,
    diagnostics: Vec<DiagRow>,
}

fn sweep_member(
    cfg: &ResolvedConfig,
    s: &Setup,
    u0: &Field,
    reference: &Field,
    scheme: Scheme,
    tau: f64,
) -> Result<SweepRun> {
    let sc = scheme_config(cfg, scheme, tau);
    let mut prop = LinearPropagator::new(s.grid.clone(), &cfg.params, s.boundary)?;
    let mut spec = DiagnosticsSpec { skip_norms: true, ..Default::default() };
    let traj = evolve(initial_state(cfg.form, u0, s)?, &sc, &mut prop, &cfg.potential, &cfg.params, &mut spec, None)?;
    let u_final = traj.final_state.physical();
    let m0 = traj.rows[0].mass;
    let mass_err = traj.rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let err_x2 = error_norm(&u_final, reference, NormKind::X2)?;
    let energy_err = energy_gap(&u_final, reference, &cfg.potential, traj.t_final, &cfg.params, s.boundary.as_ref())?.abs();
    Ok(SweepRun {
        row: ConvergenceRow { scheme, tau, n_steps: traj.n_steps, t_final: traj.t_final, err_x2, energy_err, mass_err },
        diagnostics: traj.rows,
    })
}

fn check_horizon(t_ref: f64, t: f64) -> Result<()> {
    if (t_ref - t).abs() > 1e-12 * t.max(1.0) {
        return Err(HarnessError::Config(format!(
            "step {t} does not divide the horizon; every sweep member must reach T = {t_ref}"
        )));
    }
    Ok(())
}

/// τ-sweep at fixed `T` for every configured scheme, with errors measured
/// against the exact soliton or a fine-step Strang reference.
pub fn run_soliton_convergence(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<ConvergenceReport> {
    let s = setup(cfg, &cfg.grid)?;
    let (u0, _) = initial_field(cfg, &s)?;
    let problem = reference_problem(cfg, &s, &u0)?;
    let t_ref = scheme_config(cfg, cfg.schemes[0], cfg.taus[0]).resolved_steps().1;
    let reference = ReferenceSolver::new(problem.clone()).at(t_ref)?;
    let jobs: Vec<(Scheme, f64)> =
        cfg.schemes.iter().flat_map(|&sch| cfg.taus.iter().map(move |&t| (sch, t))).collect();
    for &(sch, tau) in &jobs {
        check_horizon(t_ref, scheme_config(cfg, sch, tau).resolved_steps().1)?;
    }
    let runs: Vec<SweepRun> = jobs
        .par_iter()
        .map(|&(sch, tau)| sweep_member(cfg, &s, &u0, &reference, sch, tau))
        .collect::<Result<_>>()?;

    let mut slopes = Vec::new();
    for &sch in &cfg.schemes {
        let sel: Vec<&ConvergenceRow> = runs.iter().map(|r| &r.row).filter(|r| r.scheme == sch).collect();
        let taus: Vec<f64> = sel.iter().map(|r| r.tau).collect();
        let x2: Vec<f64> = sel.iter().map(|r| r.err_x2).collect();
        let en: Vec<f64> = sel.iter().map(|r| r.energy_err).collect();
        slopes.push(SchemeSlopes {
            scheme: sch,
            x2_slope: fit_order(&taus, &x2)?,
            energy_slope: fit_order(&taus, &en).unwrap_or(f64::NAN),
        });
    }

    let spatial_check = if cfg.spatial_check {
        Some(spatial_check(cfg, &runs)?)
    } else {
        None
    };

    let report = ConvergenceReport {
        rows: runs.iter().map(|r| r.row.clone()).collect(),
        slopes,
        reference: match problem {
            ReferenceProblem::Soliton { .. } => "exact".into(),
            ReferenceProblem::Numerical { tau_ref, .. } => format!("strang tau_ref={tau_ref:e}"),
        },
        spatial_check,
    };
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_text(&dir.join("convergence.csv"), &convergence_csv(&report))?;
        for run in &runs {
            let name = format!("{}_tau{:e}", run.row.scheme.name(), run.row.tau);
            output::write_json(&dir.join("runs").join(format!("{name}.json")), &run.row)?;
            output::write_diagnostics(&dir.join("runs").join(format!("{name}.csv")), &run.diagnostics)?;
        }
    }
    Ok(report)
}

/// Repeats the smallest-step Strang run (or the smallest-step run of the last
/// scheme) on a grid with twice the points.
fn spatial_check(cfg: &ResolvedConfig, runs: &[SweepRun]) -> Result<SpatialCheck> {
    let probe = runs
        .iter()
        .filter(|r| r.row.scheme == Scheme::Strang)
        .min_by(|a, b| a.row.tau.total_cmp(&b.row.tau))
        .or_else(|| runs.iter().min_by(|a, b| a.row.tau.total_cmp(&b.row.tau)))
        .expect("sweep has runs");
    let doubled = GridSpec { points: 2 * cfg.grid.points + usize::from(cfg.grid.bc == BoundaryKind::Dirichlet), ..cfg.grid };
    let s2 = setup(cfg, &doubled)?;
    let (u0, _) = initial_field(cfg, &s2)?;
    let reference = ReferenceSolver::new(reference_problem(cfg, &s2, &u0)?).at(probe.row.t_final)?;
    let fine = sweep_member(cfg, &s2, &u0, &reference, probe.row.scheme, probe.row.tau)?;
    let estimate = (fine.row.err_x2 - probe.row.err_x2).abs();
    let smallest = runs.iter().map(|r| r.row.err_x2).fold(f64::INFINITY, f64::min);
    Ok(SpatialCheck {
        points: cfg.grid.points,
        doubled_points: doubled.points,
        spatial_error_estimate: estimate,
        smallest_splitting_error: smallest,
        passed: estimate * 100.0 <= smallest,
    })
}

pub const CONVERGENCE_HEADER: &str = "scheme,tau,err_X2,energy_err,mass_err";

/// Sweep rows followed by one `fit:<scheme>` row per scheme holding the
/// fitted X² and energy slopes in the error columns.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let f = output::fmt_f64;
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for r in &report.rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.scheme.name(), f(r.tau), f(r.err_x2), f(r.energy_err), f(r.mass_err)));
    }
    for s in &report.slopes {
        out.push_str(&format!("fit:{},,{},{},\n", s.scheme.name(), f(s.x2_slope), f(s.energy_slope)));
    }
    out
}

// ---------------------------------------------------------------------------
// Conservation runs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationRow {
    pub scheme: Scheme,
    pub tau: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub max_energy_drift: f64,
    pub final_energy_drift: f64,
    pub max_mass_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub rows: Vec<ConservationRow>,
}

pub fn run_soliton_conservation(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<ConservationReport> {
    let s = setup(cfg, &cfg.grid)?;
    let (u0, _) = initial_field(cfg, &s)?;
    let jobs: Vec<(Scheme, f64)> =
        cfg.schemes.iter().flat_map(|&sch| cfg.taus.iter().map(move |&t| (sch, t))).collect();
    let runs: Vec<(ConservationRow, Trajectory)> = jobs
        .par_iter()
        .map(|&(scheme, tau)| -> Result<_> {
            let sc = scheme_config(cfg, scheme, tau);
            let mut prop = LinearPropagator::new(s.grid.clone(), &cfg.params, s.boundary)?;
            let mut spec = DiagnosticsSpec::default();
            let traj = evolve(initial_state(cfg.form, &u0, &s)?, &sc, &mut prop, &cfg.potential, &cfg.params, &mut spec, None)?;
            let (e0, m0) = (traj.rows[0].energy, traj.rows[0].mass);
            let drift = |f: &dyn Fn(&DiagRow) -> f64| traj.rows.iter().map(f).fold(0.0, f64::max);
            let row = ConservationRow {
                scheme,
                tau,
                t_final: traj.t_final,
                max_energy_drift: drift(&|r| (r.energy - e0).abs()),
                final_energy_drift: (traj.rows.last().unwrap().energy - e0).abs(),
                max_mass_drift: drift(&|r| (r.mass - m0).abs()),
            };
            Ok((row, traj))
        })
        .collect::<Result<_>>()?;
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        let f = output::fmt_f64;
        let mut summary = String::from("scheme,tau,T,max_energy_drift,final_energy_drift,max_mass_drift\n");
        for (row, traj) in &runs {
            summary.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.scheme.name(),
                f(row.tau),
                f(row.t_final),
                f(row.max_energy_drift),
                f(row.final_energy_drift),
                f(row.max_mass_drift)
            ));
            let name = format!("diagnostics_{}_tau{:e}.csv", row.scheme.name(), row.tau);
            output::write_diagnostics(&dir.join(name), &traj.rows)?;
        }
        output::write_text(&dir.join("conservation_summary.csv"), &summary)?;
    }
    Ok(ConservationReport { rows: runs.into_iter().map(|(r, _)| r).collect() })
}

// ---------------------------------------------------------------------------
// Single trajectories (vortex cases and custom runs)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexFrame {
    pub step: usize,
    pub t: f64,
    pub report: VortexReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub scheme: Scheme,
    pub tau: f64,
    pub n_steps: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub rows: Vec<DiagRow>,
    pub frames: Vec<VortexFrame>,
    pub groundstate: Option<MinimizeReport>,
}

struct FrameRecorder<'a> {
    out: Option<&'a Path>,
    snapshot_every: Option<usize>,
    vortices: bool,
    threshold: Option<f64>,
    cfg: &'a ResolvedConfig,
    frames: Vec<VortexFrame>,
    events_csv: String,
}

impl Observer for FrameRecorder<'_> {
    fn observe(&mut self, step: usize, state: &FlowState, _row: &DiagRow) -> gpsplit_core::Result<()> {
        let u = state.physical();
        if self.vortices {
            let report = vortex_windings(&u, self.threshold)?;
            for e in &report.events {
                self.events_csv.push_str(&output::vortex_line(step, state.t, e));
                self.events_csv.push('\n');
            }
            self.frames.push(VortexFrame { step, t: state.t, report });
        }
        if let (Some(dir), Some(every)) = (self.out, self.snapshot_every) {
            if step.is_multiple_of(every) {
                let write = |prefix: &str, f: &Field| {
                    output::write_field(dir, prefix, step, state.t, f).map_err(|e| match e {
                        HarnessError::Core(c) => c,
                        other => gpsplit_core::Error::InvalidArgument(other.to_string()),
                    })
                };
                write("u", &u)?;
                if !self.cfg.potential.is_zero() {
                    write("V", &eval_potential(&self.cfg.potential, state.t, u.grid_arc()))?;
                }
            }
        }
        Ok(())
    }
}

/// Runs the first configured scheme at the first configured step and writes
/// diagnostics, snapshots and vortex events.
pub fn run_trajectory(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<TrajectoryReport> {
    let s = setup(cfg, &cfg.grid)?;
    let (u0, groundstate) = initial_field(cfg, &s)?;
    if let (Some(dir), Some(report)) = (out, &groundstate) {
        output::write_json(&dir.join("groundstate_report.json"), report)?;
        output::write_field(dir, "groundstate", 0, 0.0, &u0)?;
    }
    let scheme = cfg.schemes[0];
    let tau = cfg.taus[0];
    let sc = scheme_config(cfg, scheme, tau);
    let mut prop = LinearPropagator::new(s.grid.clone(), &cfg.params, s.boundary)?;
    let vortices = cfg.vortices && s.grid.dim() == 2 && s.grid.bc() == BoundaryKind::Periodic;
    let mut spec = DiagnosticsSpec { vortices, vortex_threshold: cfg.vortex_threshold, ..Default::default() };
    let mut recorder = FrameRecorder {
        out,
        snapshot_every: cfg.snapshot_every,
        vortices,
        threshold: cfg.vortex_threshold,
        cfg,
        frames: Vec::new(),
        events_csv: format!("{}\n", output::VORTEX_HEADER),
    };
    let result = evolve(
        initial_state(cfg.form, &u0, &s)?,
        &sc,
        &mut prop,
        &cfg.potential,
        &cfg.params,
        &mut spec,
        Some(&mut recorder),
    );
    let (n_steps, t_final) = sc.resolved_steps();
    let traj = match result {
        Ok(t) => t,
        Err(gpsplit_core::Error::BlowUp { step, time, reason, last_valid }) => {
            // Keep whatever was recorded so the failure can be inspected.
            if let Some(dir) = out {
                output::write_field(dir, "last_valid", step - 1, time - tau, &last_valid)?;
                if vortices {
                    output::write_text(&dir.join("vortex_events.csv"), &recorder.events_csv)?;
                }
            }
            return Err(gpsplit_core::Error::BlowUp { step, time, reason, last_valid }.into());
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(dir) = out {
        output::write_outputs(&traj, dir)?;
        if vortices {
            output::write_text(&dir.join("vortex_events.csv"), &recorder.events_csv)?;
        }
    }
    Ok(TrajectoryReport {
        scheme,
        tau,
        n_steps,
        t_final,
        rows: traj.rows,
        frames: recorder.frames,
        groundstate,
    })
}

pub fn run_vortex_case(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<TrajectoryReport> {
    if !matches!(cfg.scenario, Scenario::VortexCaseI | Scenario::VortexCaseIi) {
        return Err(HarnessError::Config("not a vortex scenario".into()));
    }
    run_trajectory(cfg, out)
}

/// Energy minimizer with the potential frozen at `t = 0`.
pub fn run_groundstate(cfg: &ResolvedConfig, out: Option<&Path>) -> Result<(Field, MinimizeReport)> {
    let grid = Arc::new(make_grid(cfg.grid.dim, cfg.grid.half_width, cfg.grid.points, cfg.grid.bc)?);
    let (u, report) = minimize(&grid, &cfg.potential, &cfg.params, &cfg.minimize, None)?;
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_field(dir, "groundstate", 0, 0.0, &u)?;
        output::write_json(&dir.join("groundstate_report.json"), &report)?;
    }
    Ok((u, report))
}
