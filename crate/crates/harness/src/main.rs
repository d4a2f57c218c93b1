use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nanowire_harness::config::SolverKind;
use nanowire_harness::{emit_plots, load_config, run_scenario, run_sweep, HarnessError};

#[derive(Parser)]
#[command(name = "nanowire", version, about = "Simulate and validate polymer nanowire self-assembly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver selected in a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cross-layer validation suite with a config's parameters.
    Validate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the stochastic checks, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerate SVG figures from the CSV files in a result directory.
    Plot { dir: PathBuf },
    /// Run a config once per value of one parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let r = run_scenario(&cfg)?;
            println!("{}: wrote {} files to {}", cfg.solver.name(), r.summary.files.len() + 2, r.dir.display());
        }
        Command::Validate { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            cfg.solver = SolverKind::Validate;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if seed.is_some() {
                cfg.validate.seed = seed;
            }
            let r = run_scenario(&cfg)?;
            if let nanowire_harness::run::SolverResult::Validate(report) = &r.summary.result {
                for c in &report.checks {
                    println!(
                        "{:<24} {:>13.6e} <= {:<9.1e} {}",
                        c.name,
                        c.value,
                        c.threshold,
                        if c.passed { "pass" } else { "FAIL" }
                    );
                }
                if !report.all_passed {
                    return Err(HarnessError::Validation(format!(
                        "validation checks failed; see {}",
                        r.dir.join("validation_report.md").display()
                    )));
                }
            }
        }
        Command::Plot { dir } => {
            let files = emit_plots(&dir)?;
            println!("wrote {} plots to {}", files.len(), dir.display());
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = load_config(&config)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let runs = run_sweep(&cfg, &param, &values, &out)?;
            println!("{} runs written under {}", runs.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
