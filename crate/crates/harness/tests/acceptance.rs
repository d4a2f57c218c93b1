//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nanowire_core::KineticParams;
use nanowire_harness::config::ValidateOptions;
use nanowire_harness::report::{self, Check};
use nanowire_harness::{parse_config, run_scenario_in};

const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_checks(checks: &[&Check], elapsed: f64, limit: Option<f64>) -> Outcome {
    let mut passed = checks.iter().all(|c| c.passed);
    let mut parts: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.3e} (<= {:.1e})", c.name, c.value, c.threshold))
        .collect();
    if let Some(limit) = limit {
        passed &= elapsed < limit;
        parts.push(format!("{elapsed:.2} s (< {limit} s)"));
    }
    Outcome { passed, detail: parts.join(", ") }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    Outcome { passed: false, detail: format!("error: {e}") }
}

fn steady_state(p: &KineticParams) -> Outcome {
    let t = Instant::now();
    match report::check_steady_state(p) {
        Ok(c) => from_checks(&[&c], t.elapsed().as_secs_f64(), Some(1.0)),
        Err(e) => failed(e),
    }
}

fn oracle_equivalence(opts: &ValidateOptions) -> Outcome {
    let t = Instant::now();
    match report::check_ssa_vs_master(opts, SEED) {
        Ok((mean, tv)) => from_checks(&[&mean, &tv], t.elapsed().as_secs_f64(), Some(60.0)),
        Err(e) => failed(e),
    }
}

fn fokker_planck(p: &KineticParams) -> Outcome {
    let t = Instant::now();
    match report::check_fp_pde(p, 1024) {
        Ok((l2, moments)) => from_checks(&[&l2, &moments], t.elapsed().as_secs_f64(), Some(10.0)),
        Err(e) => failed(e),
    }
}

fn lattice(opts: &ValidateOptions) -> Outcome {
    match report::check_master_vs_fp(opts.lattice_n_total) {
        Ok((c, rows)) => {
            let modes = rows.iter().map(|r| r.mode_offset()).max().unwrap_or(0);
            let mut o = from_checks(&[&c], 0.0, None);
            o.detail.push_str(&format!(", worst mode offset {modes}"));
            o.passed &= modes <= 1;
            o
        }
        Err(e) => failed(e),
    }
}

fn drift_signs() -> Outcome {
    match report::check_scenarios(SEED, 2000) {
        Ok((c, rows)) => {
            let mut o = from_checks(&[&c], 0.0, None);
            let signs: Vec<String> = rows
                .iter()
                .map(|r| format!("{}/{} {:+.2e}", r.layer, r.scenario, r.drift))
                .collect();
            o.detail.push_str(&format!(" [{}]", signs.join(", ")));
            o
        }
        Err(e) => failed(e),
    }
}

fn phase_plane(p: &KineticParams) -> Outcome {
    match report::check_phase(p) {
        Ok((conv, residual)) => from_checks(&[&conv, &residual], 0.0, None),
        Err(e) => failed(e),
    }
}

fn eigen(p: &KineticParams) -> Outcome {
    match report::check_eigenvalues(p) {
        Ok(c) => from_checks(&[&c], 0.0, None),
        Err(e) => failed(e),
    }
}

fn mean_position(p: &KineticParams, opts: &ValidateOptions) -> Outcome {
    match report::check_mean_position(p, opts) {
        Ok((c, inv)) => {
            let mut o = from_checks(&[&c], 0.0, None);
            o.detail.push_str(&format!(
                ", required net rate {:.4} 1/s, concentration reading {:.4} uM",
                inv.required_net_rate, inv.concentration_reading
            ));
            o.passed &= (inv.required_net_rate - 80.0 / 11.0).abs() < 1e-9;
            o
        }
        Err(e) => failed(e),
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().is_some_and(|n| n != "timing.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let configs = [
        "solver = \"ode\"\n",
        "solver = \"ssa\"\n[ssa]\nseed = 7\ntrajectories = 200\n[params]\nn0 = 60.0\n",
        "solver = \"master\"\n[params]\nn0 = 60.0\n",
        "solver = \"fp\"\n[fp]\nscenarios = [\"growth\", \"balanced\", \"collapse\"]\n",
        "solver = \"phase\"\n",
    ];
    let mut compared = 0;
    for text in configs {
        let cfg = match parse_config(text, Path::new("acceptance.toml")) {
            Ok(c) => c,
            Err(e) => return failed(e),
        };
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                run_scenario_in(&cfg, dir.path()).map(|_| snapshot(dir.path()))
            })
            .collect();
        match (&runs[0], &runs[1]) {
            (Ok(a), Ok(b)) if a == b => compared += a.len(),
            (Ok(a), Ok(b)) => {
                let diff: Vec<_> = a.iter().zip(b).filter(|(x, y)| x != y).map(|(x, _)| x.0.clone()).collect();
                return failed(format!("{cfg:?} differs in {diff:?}", cfg = cfg.solver));
            }
            (Err(e), _) | (_, Err(e)) => return failed(e),
        }
    }
    Outcome { passed: true, detail: format!("{compared} files identical across 5 solvers") }
}

fn main() -> ExitCode {
    let p = KineticParams::reference();
    let opts = ValidateOptions { seed: Some(SEED), ..ValidateOptions::default() };
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 9] = [
        ("1 steady state", Box::new(|| steady_state(&p))),
        ("2 ssa vs master", Box::new(|| oracle_equivalence(&opts))),
        ("3 fokker-planck", Box::new(|| fokker_planck(&p))),
        ("4 master vs fokker-planck", Box::new(|| lattice(&opts))),
        ("5 drift signs", Box::new(drift_signs)),
        ("6 phase plane", Box::new(|| phase_plane(&p))),
        ("7 eigenvalues", Box::new(|| eigen(&p))),
        ("8 mean position law", Box::new(|| mean_position(&p, &opts))),
        ("9 determinism", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.passed {
            failures += 1;
        }
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 9 criteria passed", 9 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
