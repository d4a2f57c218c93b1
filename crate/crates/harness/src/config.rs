//! Scenario configuration files.
//!
//! A scenario is one TOML document. Every key is optional; an empty file
//! runs the mean-field kinetics at the reference parameters.

use std::path::{Path, PathBuf};

use nanowire_core::fokker_planck::{CoefficientMode, CoefficientRule};
use nanowire_core::master::MasterScheme;
use nanowire_core::scenario::RateScenario;
use nanowire_core::stability::{PhaseForm, PhaseGrid};
use nanowire_core::KineticParams;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Ode,
    Ssa,
    Master,
    Fp,
    Phase,
    Validate,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ode => "ode",
            Self::Ssa => "ssa",
            Self::Master => "master",
            Self::Fp => "fp",
            Self::Phase => "phase",
            Self::Validate => "validate",
        }
    }
}

/// How `params.n0` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// `n0` is a concentration in µM; counts are `n0 * volume_factor`.
    #[default]
    Concentration,
    /// `n0` is a molecule count; the concentration is `n0 / volume_factor`.
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeOptions {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            dt: nanowire_core::kinetics::DEFAULT_DT,
            stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsaOptions {
    pub seed: Option<u64>,
    pub trajectories: u64,
    pub t_end: f64,
    /// Evenly spaced sample times over `[0, t_end]`.
    pub samples: usize,
}

impl Default for SsaOptions {
    fn default() -> Self {
        Self {
            seed: None,
            trajectories: 1000,
            t_end: 0.01,
            samples: 51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MasterOptions {
    pub t_end: f64,
    pub samples: usize,
    pub scheme: MasterScheme,
    pub max_states: usize,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self {
            t_end: 0.01,
            samples: 11,
            scheme: MasterScheme::TrBdf2,
            max_states: nanowire_core::master::DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpOptions {
    pub grid_size: usize,
    pub times: Vec<f64>,
    pub mode: CoefficientMode,
    pub rule: CoefficientRule,
    pub courant: f64,
    /// Width of the emitted pulse, m. Defaults to 8 grid cells.
    pub sigma0: Option<f64>,
    /// Runs each listed rate regime instead of the configured rates.
    pub scenarios: Vec<RateScenario>,
}

impl Default for FpOptions {
    fn default() -> Self {
        Self {
            grid_size: 1024,
            times: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            mode: CoefficientMode::Frozen,
            rule: CoefficientRule::Printed,
            courant: 0.1,
            sigma0: None,
            scenarios: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub form: PhaseForm,
    pub grid: Option<PhaseGrid>,
    /// `[n, a]` pairs in µM; five points along the `n` axis by default.
    pub initial_points: Option<Vec<[f64; 2]>>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            dt: nanowire_core::kinetics::DEFAULT_DT,
            stride: 100,
            form: PhaseForm::Coupled,
            grid: None,
            initial_points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateOptions {
    pub seed: Option<u64>,
    pub trajectories: u64,
    /// Free monomers and receiver length of the SSA/master check.
    pub small_n_total: u32,
    pub small_max_length: u32,
    /// Free monomers of the master/drift-diffusion check.
    pub lattice_n_total: u32,
    pub fp_grid_size: usize,
    /// Distance and time used to invert the mean-position law, m and s.
    pub target_distance: f64,
    pub target_time: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: None,
            trajectories: 10_000,
            small_n_total: 50,
            small_max_length: 30,
            lattice_n_total: 200,
            fp_grid_size: 1024,
            target_distance: 4e-6,
            target_time: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub solver: SolverKind,
    /// Relative paths resolve against the config file's directory.
    pub output_dir: PathBuf,
    pub interpretation: Interpretation,
    pub plots: bool,
    pub params: KineticParams,
    pub ode: OdeOptions,
    pub ssa: SsaOptions,
    pub master: MasterOptions,
    pub fp: FpOptions,
    pub phase: PhaseConfig,
    pub validate: ValidateOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            solver: SolverKind::Ode,
            output_dir: PathBuf::from("results"),
            interpretation: Interpretation::Concentration,
            plots: true,
            params: KineticParams::reference(),
            ode: OdeOptions::default(),
            ssa: SsaOptions::default(),
            master: MasterOptions::default(),
            fp: FpOptions::default(),
            phase: PhaseConfig::default(),
            validate: ValidateOptions::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parameters in the units every layer expects (µM, with
    /// `volume_factor` counts per µM).
    pub fn effective_params(&self) -> KineticParams {
        let mut p = self.params;
        if self.interpretation == Interpretation::Count {
            p.n0 /= p.volume_factor;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let v = |msg: String| Err(HarnessError::Validation(msg));
        self.params
            .validate()
            .map_err(|e| HarnessError::Validation(e.to_string()))?;
        self.effective_params()
            .validate()
            .map_err(|e| HarnessError::Validation(e.to_string()))?;
        if self.output_dir.as_os_str().is_empty() {
            return v("output_dir must not be empty".into());
        }
        match self.solver {
            SolverKind::Ode => {
                if !(self.ode.dt > 0.0) || !(self.ode.t_end >= 0.0) || self.ode.stride == 0 {
                    return v("ode: need dt > 0, t_end >= 0, stride >= 1".into());
                }
            }
            SolverKind::Ssa => {
                if self.ssa.seed.is_none() {
                    return v("ssa.seed is required when solver = \"ssa\"".into());
                }
                if self.ssa.trajectories == 0 || self.ssa.samples == 0 || !(self.ssa.t_end >= 0.0) {
                    return v("ssa: need trajectories >= 1, samples >= 1, t_end >= 0".into());
                }
            }
            SolverKind::Master => {
                if self.master.samples == 0 || !(self.master.t_end >= 0.0) {
                    return v("master: need samples >= 1, t_end >= 0".into());
                }
            }
            SolverKind::Fp => {
                if self.fp.times.is_empty() || self.fp.times.iter().any(|&t| !(t > 0.0)) {
                    return v("fp.times must be a nonempty list of positive times".into());
                }
                if self.fp.times.windows(2).any(|w| w[1] < w[0]) {
                    return v("fp.times must be sorted".into());
                }
            }
            SolverKind::Phase => {
                if !(self.phase.dt > 0.0) || !(self.phase.t_end >= 0.0) || self.phase.stride == 0 {
                    return v("phase: need dt > 0, t_end >= 0, stride >= 1".into());
                }
                if let Some(pts) = &self.phase.initial_points {
                    if pts.iter().flatten().any(|&c| !(c >= 0.0)) {
                        return v("phase.initial_points must be nonnegative".into());
                    }
                }
            }
            SolverKind::Validate => {
                if self.validate.seed.is_none() {
                    return v("validate.seed is required when solver = \"validate\"".into());
                }
                if self.validate.trajectories == 0 {
                    return v("validate.trajectories must be >= 1".into());
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a config document. `origin` labels diagnostics.
pub fn parse_config(text: &str, origin: &Path) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file. A relative `output_dir` is rebased onto the file's
/// directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut cfg = parse_config(&text, path)?;
    if cfg.output_dir.is_relative() {
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output_dir = base.join(&cfg.output_dir);
    }
    Ok(cfg)
}
