//! Experiment harness for the split-step Gross–Pitaevskii solvers: JSON run
//! configurations, scenario runners and artifact writers.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::Path;

use serde::Serialize;

pub use config::{ResolvedConfig, RunConfig, Scenario};
pub use error::{HarnessError, Result};

/// Summary returned by [`run`]; also written into `run_metadata.json`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunSummary {
    Convergence(scenarios::ConvergenceReport),
    Conservation(scenarios::ConservationReport),
    Trajectory(TrajectorySummary),
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub n_steps: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub final_energy: f64,
    pub final_mass: f64,
    pub max_vortex_count: usize,
    pub final_net_winding: Option<i64>,
}

#[derive(Serialize)]
struct Versions {
    gpsplit: &'static str,
    gpsplit_core: &'static str,
}

#[derive(Serialize)]
struct Metadata<'a> {
    versions: Versions,
    config: &'a ResolvedConfig,
    /// Horizon actually reached, `round(T/τ) τ`, per run.
    #[serde(rename = "T_actual")]
    t_actual: Vec<f64>,
    /// Grid-doubling check; `null` when the run did not perform one.
    spatial_check: Option<&'a scenarios::SpatialCheck>,
    summary: &'a RunSummary,
}

/// Executes a resolved configuration, writing every artifact under `out`.
pub fn run(cfg: &ResolvedConfig, out: &Path) -> Result<RunSummary> {
    output::ensure_dir(out)?;
    let summary = match cfg.scenario {
        Scenario::SolitonConvergence | Scenario::PerturbedConvergence => {
            RunSummary::Convergence(scenarios::run_soliton_convergence(cfg, Some(out))?)
        }
        Scenario::SolitonConservation => {
            RunSummary::Conservation(scenarios::run_soliton_conservation(cfg, Some(out))?)
        }
        Scenario::VortexCaseI | Scenario::VortexCaseIi | Scenario::Custom => {
            let rep = scenarios::run_trajectory(cfg, Some(out))?;
            let last = rep.rows.last().expect("trajectory records the final step");
            RunSummary::Trajectory(TrajectorySummary {
                n_steps: rep.n_steps,
                t_final: rep.t_final,
                final_energy: last.energy,
                final_mass: last.mass,
                max_vortex_count: rep.frames.iter().map(|f| f.report.events.len()).max().unwrap_or(0),
                final_net_winding: rep.frames.last().map(|f| f.report.net_winding),
            })
        }
    };
    write_metadata(cfg, &summary, out)?;
    Ok(summary)
}

pub fn write_metadata(cfg: &ResolvedConfig, summary: &RunSummary, out: &Path) -> Result<()> {
    let (t_actual, spatial_check) = match summary {
        RunSummary::Convergence(r) => (r.rows.iter().map(|r| r.t_final).collect(), r.spatial_check.as_ref()),
        RunSummary::Conservation(r) => (r.rows.iter().map(|r| r.t_final).collect(), None),
        RunSummary::Trajectory(r) => (vec![r.t_final], None),
    };
    let meta = Metadata {
        versions: Versions { gpsplit: env!("CARGO_PKG_VERSION"), gpsplit_core: gpsplit_core::VERSION },
        config: cfg,
        t_actual,
        spatial_check,
        summary,
    };
    output::write_json(&out.join("run_metadata.json"), &meta)
}
