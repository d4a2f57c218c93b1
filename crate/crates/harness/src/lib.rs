//! Configuration, scenario runs, validation and plotting for the
//! nanowire channel models.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{load_config, parse_config, ScenarioConfig, SolverKind};
pub use error::{HarnessError, Result};
pub use plot::emit_plots;
pub use run::{run_scenario, run_scenario_in, RunOutput};
pub use sweep::run_sweep;
