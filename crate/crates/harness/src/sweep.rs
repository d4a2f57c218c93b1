//! Parameter sweeps: one scenario per value, run concurrently, each into
//! its own subdirectory.

use std::path::Path;

use nanowire_core::KineticParams;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, fmt_float, Table};
use crate::run::{run_scenario_in, RunOutput};

/// `params` with the field `name` set to `value`.
pub fn with_param(params: &KineticParams, name: &str, value: f64) -> Result<KineticParams> {
    let bad = |msg: String| HarnessError::Validation(msg);
    let mut table = toml::Table::try_from(params).map_err(|e| bad(e.to_string()))?;
    let slot = table
        .get_mut(name)
        .ok_or_else(|| bad(format!("unknown parameter `{name}`")))?;
    *slot = match slot {
        toml::Value::Integer(_) => {
            if value.fract() != 0.0 || value < 0.0 || value > u32::MAX as f64 {
                return Err(bad(format!("`{name}` takes a nonnegative integer, got {value}")));
            }
            toml::Value::Integer(value as i64)
        }
        _ => toml::Value::Float(value),
    };
    let p: KineticParams = table.try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
    p.validate().map_err(|e| bad(e.to_string()))?;
    Ok(p)
}

/// Runs `cfg` once per value of `param`, writing into
/// `<out>/<param>=<value>/`, and a `sweep.csv` index into `out`.
pub fn run_sweep(cfg: &ScenarioConfig, param: &str, values: &[f64], out: &Path) -> Result<Vec<RunOutput>> {
    if values.is_empty() {
        return Err(HarnessError::Validation("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            c.params = with_param(&cfg.params, param, v)?;
            c.validate()?;
            Ok((v, c))
        })
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out)?;
    let runs = configs
        .par_iter()
        .map(|(v, c)| run_scenario_in(c, &out.join(format!("{param}={}", fmt_float(*v)))))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["value", "critical_concentration", "elongation_rate", "diffusion_coefficient"]);
    for ((v, _), r) in configs.iter().zip(&runs) {
        let s = &r.summary;
        t.push(&[*v, s.critical_concentration, s.elongation_rate, s.diffusion_coefficient]);
    }
    t.write(&out.join("sweep.csv"))?;
    Ok(runs)
}
