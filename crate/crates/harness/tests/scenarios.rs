mod schema_check;

use std::fs;
use std::path::Path;

use nanowire_core::fokker_planck::fp_coefficients;
use nanowire_core::KineticParams;
use nanowire_harness::config::ScenarioConfig;
use nanowire_harness::output::CsvData;
use nanowire_harness::{emit_plots, parse_config, run_scenario_in, run_sweep, HarnessError};
use serde_json::Value;

fn config(text: &str) -> ScenarioConfig {
    parse_config(text, Path::new("test.toml")).unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn check_schema(dir: &Path) {
    let schema: Value = serde_json::from_str(
        &fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/summary.schema.json")).unwrap(),
    )
    .unwrap();
    let errs = schema_check::validate(&schema, &schema, &summary(dir), "$");
    assert!(errs.is_empty(), "{errs:#?}");
}

#[test]
fn ode_summary_reports_critical_concentration() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario_in(&config(""), dir.path()).unwrap();
    let s = summary(dir.path());
    let k = s["critical_concentration"].as_f64().unwrap();
    assert!((k - 0.29117071994136824).abs() < 1e-15);
    assert_eq!(s["eigenvalues"]["at_initial"]["lambda2"].as_f64(), Some(-3916.0));
    assert_eq!(s["eigenvalues"]["at_initial"]["class"], "stable, not asymptotically");
    let final_n = s["result"]["final_n"].as_f64().unwrap();
    assert!((final_n - k).abs() / k < 1e-2);
    let csv = CsvData::read(&dir.path().join("ode.csv")).unwrap();
    assert_eq!(csv.column("t").unwrap().last(), Some(&5.0));
    check_schema(dir.path());
    assert!(!dir.path().join("timing.json").exists() || s["files"].as_array().unwrap().iter().all(|f| f != "timing.json"));
}

#[test]
fn fp_summary_matches_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario_in(&config("solver = \"fp\"\n[fp]\ngrid_size = 512\ntimes = [0.2, 0.4]\n"), dir.path()).unwrap();
    let s = summary(dir.path());
    let c = fp_coefficients(&KineticParams::reference()).unwrap();
    assert_eq!(s["elongation_rate"].as_f64(), Some(c.drift));
    assert_eq!(s["diffusion_coefficient"].as_f64(), Some(c.diffusion));
    let snaps = s["result"]["runs"][0]["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 2);
    let density = CsvData::read(&dir.path().join("density.csv")).unwrap();
    assert_eq!(density.column("p").unwrap().len(), 2 * 512);
    check_schema(dir.path());
}

#[test]
fn every_solver_writes_schema_valid_summaries() {
    for text in [
        "solver = \"ssa\"\n[ssa]\nseed = 3\ntrajectories = 50\nsamples = 5\n[params]\nn0 = 40.0\n",
        "solver = \"master\"\n[master]\nsamples = 3\n[params]\nn0 = 40.0\n",
        "solver = \"phase\"\n",
    ] {
        let dir = tempfile::tempdir().unwrap();
        run_scenario_in(&config(text), dir.path()).unwrap();
        check_schema(dir.path());
    }
}

#[test]
fn validate_emits_comparison_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("solver = \"validate\"\n[validate]\nseed = 11\ntrajectories = 10000\n");
    run_scenario_in(&cfg, dir.path()).unwrap();
    let table = CsvData::read(&dir.path().join("validation.csv")).unwrap();
    let names = table.strings("check").unwrap();
    for n in ["ssa_vs_master_tv", "master_vs_fp_tv", "fp_pde_l2"] {
        assert!(names.iter().any(|c| c == n), "{n} missing");
    }
    assert!(table.column("passed").unwrap().iter().all(|&p| p == 1.0));
    let report = fs::read_to_string(dir.path().join("validation_report.md")).unwrap();
    assert!(report.contains("7.272727"));
    check_schema(dir.path());
}

#[test]
fn three_scenarios_give_three_panels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("solver = \"fp\"\n[fp]\ngrid_size = 128\ntimes = [0.1]\nscenarios = [\"growth\", \"balanced\", \"collapse\"]\n");
    run_scenario_in(&cfg, dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join("scenarios.svg")).unwrap();
    for name in ["growth", "balanced", "collapse"] {
        assert!(svg.contains(&format!(">{name}</text>")));
    }
    assert!(svg.starts_with("<svg") && svg.contains("width=\"1440\""));
}

#[test]
fn phase_plot_without_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario_in(&config("solver = \"phase\"\n[phase]\ninitial_points = []\n"), dir.path()).unwrap();
    let svg = fs::read_to_string(dir.path().join("phase.svg")).unwrap();
    assert!(svg.contains("nullcline"));
    assert!(!svg.contains("trajectory 1"));
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn plots_regenerate_identically() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario_in(&config("solver = \"phase\"\n"), dir.path()).unwrap();
    let before = fs::read(dir.path().join("phase.svg")).unwrap();
    emit_plots(dir.path()).unwrap();
    assert_eq!(fs::read(dir.path().join("phase.svg")).unwrap(), before);
}

#[test]
fn missing_columns_are_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ode.csv"), "t,n\n0,1\n").unwrap();
    match emit_plots(dir.path()) {
        Err(HarnessError::MissingColumn { column, .. }) => assert_eq!(column, "n_exact"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn count_interpretation_feeds_the_stochastic_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "solver = \"ssa\"\ninterpretation = \"count\"\n[ssa]\nseed = 1\ntrajectories = 10\nsamples = 2\n[params]\nn0 = 60.0\nvolume_factor = 2.0\n",
    );
    run_scenario_in(&cfg, dir.path()).unwrap();
    let s = summary(dir.path());
    assert_eq!(s["params"]["n0"].as_f64(), Some(30.0));
    let e = CsvData::read(&dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(e.column("n_free_mean").unwrap()[0], 60.0);
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let runs = run_sweep(&config("[ode]\nt_end = 1.0\n"), "k_plus", &[0.5, 1.0, 2.0], dir.path()).unwrap();
    assert_eq!(runs.len(), 3);
    for v in ["0.5", "1", "2"] {
        assert!(dir.path().join(format!("k_plus={v}")).join("summary.json").exists());
    }
    let index = CsvData::read(&dir.path().join("sweep.csv")).unwrap();
    let k = index.column("critical_concentration").unwrap();
    assert!(k[0] > k[1] && k[1] > k[2]);
}
