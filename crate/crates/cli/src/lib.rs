//! Experiment driver for the `nfvlab` command-line tool.

pub mod config;
pub mod presets;
pub mod run;
pub mod table;

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub use config::ExperimentConfig;
pub use run::{run, write_outputs, Outcome};

/// Loads a config from a preset and/or a file, then applies `--set`
/// overrides and an optional seed override.
pub fn load_config(
    preset: Option<&str>,
    path: Option<&Path>,
    sets: &[String],
    seed: Option<u64>,
) -> Result<ExperimentConfig> {
    let mut value: Value = match (preset, path) {
        (Some(_), Some(_)) => bail!("give either --preset or --config, not both"),
        (Some(name), None) => presets::get(name).with_context(|| {
            format!("unknown preset `{name}` (known: {})", presets::NAMES.join(", "))
        })?,
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        (None, None) => bail!("no configuration: give --preset NAME or --config PATH"),
    };
    if value.get("scenario").is_none() {
        if let Some(inner) = value.get("config") {
            value = inner.clone();
        }
    }
    for s in sets {
        config::apply_set(&mut value, s)?;
    }
    if let Some(seed) = seed {
        value["seed"] = seed.into();
    }
    ExperimentConfig::from_value(value)
}
