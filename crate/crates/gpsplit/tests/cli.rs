//! End-to-end runs of the `gpsplit` binary: exit codes and artifact formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gpsplit_core::snapshot::read_snapshot;
use gpsplit_core::DiagRow;

fn gpsplit(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gpsplit"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("GPSPLIT_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

const SMALL_OBSTACLE: &str = r#"{
    "scenario": "custom",
    "grid": {"dim": 2, "L": 3.0, "N": 32, "bc": "periodic"},
    "params": {"eps": 0.5, "mass": 1.0},
    "background": {"kind": "constant"},
    "potential": {"kind": "moving_gaussian", "v0": 5.0, "gamma": 3.0, "a": 1.0},
    "initial": {"kind": "random_bumps", "count": 3, "amplitude": 0.2, "width": 0.5},
    "schemes": ["strang"],
    "taus": [0.01],
    "T": 0.2,
    "cadence": 5,
    "snapshot_every": 10,
    "seed": 42
}"#;

#[test]
fn custom_run_writes_documented_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.json", SMALL_OBSTACLE);
    let out = tmp.path().join("out");
    let res = gpsplit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), DiagRow::CSV_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // Steps 0, 5, ..., 20.
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r.len(), 8);
        assert!(r[3].is_empty(), "no reference, so no error column");
        assert!(!r[6].is_empty() && r[7] == "0");
    }
    let t_last: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert!((t_last - 0.2).abs() < 1e-12);

    let events = fs::read_to_string(out.join("vortex_events.csv")).unwrap();
    assert_eq!(events.lines().next().unwrap(), "step,t,i,j,x,y,charge,density");

    for step in [0, 10, 20] {
        let stem = out.join("fields").join(format!("u_{step:07}"));
        let (header, field) = read_snapshot(&stem.with_extension("json")).unwrap();
        assert_eq!((header.dim, header.n, header.bc), (2, 32, gpsplit_core::BoundaryKind::Periodic));
        assert_eq!(header.dtype, "c128");
        assert_eq!(header.order, "row-major");
        assert_eq!(field.len(), 32 * 32);
        assert_eq!(fs::metadata(stem.with_extension("bin")).unwrap().len(), 32 * 32 * 16);
        assert!(out.join("fields").join(format!("V_{step:07}.json")).exists());
    }
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run_metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["T"], 0.2);
    assert_eq!(meta["config"]["seed"], 42);
    assert_eq!(meta["summary"]["n_steps"], 20);
    assert_eq!(meta["T_actual"][0], 0.2);
    assert!(meta["spatial_check"].is_null());
}

#[test]
fn empty_trajectory_has_only_the_initial_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "empty.json",
        r#"{"scenario": "custom", "grid": {"dim": 1, "L": 5.0, "N": 64, "bc": "periodic"},
            "background": {"kind": "constant"}, "taus": [0.1], "T": 0.0}"#,
    );
    let out = tmp.path().join("out");
    let res = gpsplit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.0000000000000000e0,"));
}

#[test]
fn sweep_writes_summary_and_per_step_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.json",
        r#"{"scenario": "soliton_convergence", "grid": {"dim": 1, "L": 60.0, "N": 1023, "bc": "dirichlet"},
            "taus": [0.04, 0.02, 0.01], "T": 0.4}"#,
    );
    let out = tmp.path().join("sweep");
    let res = gpsplit(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "scheme,tau,err_X2,energy_err,mass_err");
    assert_eq!(csv.lines().filter(|l| l.starts_with("fit:")).count(), 2);
    assert_eq!(fs::read_dir(out.join("runs")).unwrap().count(), 12);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run_metadata.json")).unwrap()).unwrap();
    let t_actual = meta["T_actual"].as_array().unwrap();
    assert_eq!(t_actual.len(), 6);
    assert!(t_actual.iter().all(|t| (t.as_f64().unwrap() - 0.4).abs() < 1e-12));
    assert_eq!(meta["config"]["grid"]["N"], 1023);
    assert_eq!(meta["spatial_check"]["doubled_points"], 2047);

    // Steps that round to different horizons cannot share a reference.
    let uneven = write_config(
        tmp.path(),
        "uneven.json",
        r#"{"scenario": "soliton_convergence", "grid": {"dim": 1, "L": 60.0, "N": 255, "bc": "dirichlet"},
            "taus": [0.04, 0.02, 0.01], "T": 0.3}"#,
    );
    assert_eq!(gpsplit(&["sweep", uneven.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn diagnostics_are_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.json", SMALL_OBSTACLE);
    let mut outputs = Vec::new();
    for (k, threads) in [1, 4, 4].into_iter().enumerate() {
        let out = tmp.path().join(format!("out{k}"));
        let res = gpsplit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some(threads));
        assert!(res.status.success());
        outputs.push((
            fs::read(out.join("diagnostics.csv")).unwrap(),
            fs::read(out.join("fields").join("u_0000020.bin")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn invalid_configuration_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_tau = write_config(
        tmp.path(),
        "bad.json",
        r#"{"scenario": "custom", "grid": {"dim": 1, "L": 5.0, "N": 64, "bc": "periodic"}, "taus": [2.0], "T": 1.0}"#,
    );
    let res = gpsplit(&["run", bad_tau.to_str().unwrap()], None);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("(0, 1]"));

    let unknown = write_config(tmp.path(), "unknown.json", r#"{"scenario": "custom", "colour": 1}"#);
    assert_eq!(gpsplit(&["run", unknown.to_str().unwrap()], None).status.code(), Some(2));

    let dirichlet_2d = write_config(
        tmp.path(),
        "d2.json",
        r#"{"scenario": "custom", "grid": {"dim": 2, "L": 5.0, "N": 64, "bc": "dirichlet"}, "taus": [0.1], "T": 1.0}"#,
    );
    assert_eq!(gpsplit(&["run", dirichlet_2d.to_str().unwrap()], None).status.code(), Some(2));

    let sweep = write_config(tmp.path(), "sweep.json", r#"{"scenario": "soliton_convergence"}"#);
    assert_eq!(gpsplit(&["run", sweep.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn blow_up_guard_exits_with_code_3() {
    // A narrow peak of height 30, dispersed backwards in time with the free
    // flow, refocuses during the run and exceeds ten times the initial maximum.
    use gpsplit_core::flows::flow_a_signed;
    use gpsplit_core::{make_grid, BoundaryKind, Complex64, Field, FlowState, LinearPropagator, PhysParams};
    use std::sync::Arc;

    let tmp = tempfile::tempdir().unwrap();
    let grid = Arc::new(make_grid(1, 40.0, 4096, BoundaryKind::Periodic).unwrap());
    let params = PhysParams::new(100.0, 0.5).unwrap();
    let peak = Field::from_fn(grid.clone(), |x, _| Complex64::new(30.0 * (-(x / 0.05).powi(2)).exp(), 0.0));
    let mut prop = LinearPropagator::new(grid, &params, None).unwrap();
    let mut state = FlowState::u_form(peak, 0.0);
    flow_a_signed(&mut state, -0.125, &mut prop).unwrap();
    assert!(state.primary().max_abs() < 2.5);
    let stem = tmp.path().join("dispersed");
    gpsplit_core::snapshot::write_snapshot(state.primary(), &stem, None).unwrap();

    let cfg = write_config(
        tmp.path(),
        "blow.json",
        &format!(
            r#"{{
                "scenario": "custom",
                "grid": {{"dim": 1, "L": 40.0, "N": 4096, "bc": "periodic"}},
                "params": {{"eps": 100.0, "mass": 0.5}},
                "initial": {{"kind": "snapshot", "path": {:?}}},
                "schemes": ["lie"],
                "taus": [0.005],
                "T": 0.5
            }}"#,
            stem.with_extension("json")
        ),
    );
    let out = tmp.path().join("out");
    let res = gpsplit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("blow-up"));
    let last_valid: Vec<_> = fs::read_dir(out.join("fields"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("last_valid_") && n.ends_with(".json"))
        .collect();
    assert_eq!(last_valid.len(), 1);
    let (header, field) = read_snapshot(&out.join("fields").join(&last_valid[0])).unwrap();
    assert!(header.t.unwrap() < 0.125 + 1e-9);
    assert!(field.max_abs() <= 10.0 * 2.5);
}

#[test]
fn groundstate_verb_writes_snapshot_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "gs.json",
        r#"{
            "scenario": "custom",
            "grid": {"dim": 2, "L": 2.0, "N": 32, "bc": "periodic"},
            "params": {"eps": 0.5, "mass": 1.0},
            "potential": {"kind": "static_gaussian", "v0": -5.0, "gamma": 2.0},
            "taus": [0.01],
            "T": 0.0
        }"#,
    );
    let out = tmp.path().join("gs");
    let res = gpsplit(&["groundstate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("groundstate_report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    let (_, u) = read_snapshot(&out.join("fields").join("groundstate_0000000.json")).unwrap();
    // A negative amplitude repels the condensate: density dips at the center.
    let center = u.values()[16 * 32 + 16].norm_sqr();
    let far = u.values()[0].norm_sqr();
    assert!(center < far);
}

#[test]
fn conservation_run_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cons.json",
        r#"{"scenario": "soliton_conservation", "grid": {"dim": 1, "L": 60.0, "N": 511, "bc": "dirichlet"},
            "taus": [0.02, 0.01], "T": 0.5}"#,
    );
    let out = tmp.path().join("cons");
    let res = gpsplit(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = fs::read_to_string(out.join("conservation_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    for line in summary.lines().skip(1) {
        let mass: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(mass < 1e-10);
    }
    assert!(out.join("diagnostics_strang_tau1e-2.csv").exists());
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            gpsplit::RunConfig::from_path(&path)
                .and_then(|c| c.resolve())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 6);
}
