//! Experiment configuration: JSON schema, `--set` overrides, validation.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use nfvlab_core::{BitMatrix, CodeKind, DecoderSpec, NfvCode, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    FupAnalyze,
    FupSimulate,
    QueueAnalyze,
    QueueSimulate,
    CodeInfo,
}

/// One code under study: a named construction, optionally with its own `N`,
/// or a generator read from a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeEntry {
    Kind(CodeKind),
    Sized {
        kind: CodeKind,
        servers: usize,
    },
    Matrix {
        matrix_file: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Explicit grid; excludes `start`/`stop`/`points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ServiceRateMode {
    /// Per-server rate `ν` taken as `nu`, or `mu` when `nu` is absent.
    #[default]
    Nu,
    /// `ν = (N − d_min + 1) μ / n`, the substitution that reproduces the
    /// printed mean-delay formula.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSection {
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default)]
    pub service_rate_mode: ServiceRateMode,
    #[serde(default = "default_frames")]
    pub frames: usize,
    /// User-code rates to sweep; defaults to `system.rate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub abort_in_service: bool,
}

fn default_frames() -> usize {
    200_000
}
fn yes() -> bool {
    true
}
fn default_servers() -> usize {
    8
}
fn default_trials() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub system: SystemParams,
    #[serde(default = "default_servers")]
    pub servers: usize,
    pub schemes: Vec<SchemeEntry>,
    #[serde(default)]
    pub decoder: DecoderSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<TimeGrid>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue: Option<QueueSection>,
}

/// A scheme resolved to a concrete code.
#[derive(Debug, Clone)]
pub struct ResolvedScheme {
    /// Column prefix.
    pub label: String,
    pub kind: Option<CodeKind>,
    pub code: NfvCode,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending key on failure.
    /// A run manifest is accepted too (its `config` member is used).
    pub fn from_value(mut value: Value) -> Result<Self> {
        if let Some(inner) = value.get("config").filter(|_| value.get("scenario").is_none()) {
            value = inner.clone();
        }
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config key `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        let positive = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("config key `{name}`: must be finite and > 0, got {v}");
            }
            Ok(())
        };
        positive("system.rate", s.rate)?;
        positive("system.mu2", s.mu2)?;
        if s.rate > 1.0 {
            bail!("config key `system.rate`: must be <= 1, got {}", s.rate);
        }
        if !(0.0..0.5).contains(&s.delta) {
            bail!("config key `system.delta`: must lie in [0, 0.5), got {}", s.delta);
        }
        if !(s.inv_mu1 >= 0.0 && s.inv_mu1.is_finite()) {
            bail!("config key `system.inv_mu1`: must be finite and >= 0");
        }
        if !(s.a >= 0.0 && s.a.is_finite()) {
            bail!("config key `system.a`: must be finite and >= 0");
        }
        if s.frame_bits == 0 {
            bail!("config key `system.frame_bits`: must be positive");
        }
        if self.schemes.is_empty() {
            bail!("config key `schemes`: at least one scheme is required");
        }
        if self.trials == 0 {
            bail!("config key `trials`: must be at least 1");
        }
        match self.scenario {
            Scenario::FupAnalyze | Scenario::FupSimulate => {
                self.grid_values()?;
            }
            Scenario::QueueAnalyze | Scenario::QueueSimulate => {
                let q = self
                    .queue
                    .as_ref()
                    .context("config key `queue`: required for queue scenarios")?;
                if q.lambdas.is_empty() {
                    bail!("config key `queue.lambdas`: must not be empty");
                }
                for &l in &q.lambdas {
                    positive("queue.lambdas", l)?;
                }
                if let Some(r) = &q.rates {
                    if r.is_empty() {
                        bail!("config key `queue.rates`: must not be empty");
                    }
                    for &x in r {
                        positive("queue.rates", x)?;
                    }
                }
                if q.frames == 0 {
                    bail!("config key `queue.frames`: must be at least 1");
                }
                match (q.service_rate_mode, q.mu, q.nu) {
                    (ServiceRateMode::Printed, None, _) => {
                        bail!("config key `queue.mu`: required when service_rate_mode = printed")
                    }
                    (ServiceRateMode::Printed, Some(_), Some(_)) => {
                        bail!("config key `queue.nu`: not used when service_rate_mode = printed")
                    }
                    (ServiceRateMode::Nu, None, None) => {
                        bail!("config key `queue.nu`: set `nu` or `mu`")
                    }
                    _ => {}
                }
                if let Some(m) = q.mu {
                    positive("queue.mu", m)?;
                }
                if let Some(n) = q.nu {
                    positive("queue.nu", n)?;
                }
            }
            Scenario::CodeInfo => {}
        }
        Ok(())
    }

    pub fn grid_values(&self) -> Result<Vec<f64>> {
        let g = self
            .time_grid
            .as_ref()
            .context("config key `time_grid`: required for fup scenarios")?;
        let values = match (&g.values, g.start, g.stop, g.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(p)) => {
                if p == 0 {
                    Vec::new()
                } else if p == 1 {
                    vec![a]
                } else {
                    (0..p)
                        .map(|i| a + (b - a) * i as f64 / (p - 1) as f64)
                        .collect()
                }
            }
            _ => bail!("config key `time_grid`: give either `values` or all of `start`, `stop`, `points`"),
        };
        if values.is_empty() {
            bail!("config key `time_grid`: grid is empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            bail!("config key `time_grid`: values must be finite");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            bail!("config key `time_grid`: values must be strictly increasing");
        }
        Ok(values)
    }

    pub fn resolve_schemes(&self) -> Result<Vec<ResolvedScheme>> {
        let mut out: Vec<ResolvedScheme> = Vec::new();
        for entry in &self.schemes {
            let r = match entry {
                SchemeEntry::Kind(kind) => ResolvedScheme {
                    label: kind.name().to_string(),
                    kind: Some(*kind),
                    code: NfvCode::from_kind(*kind, self.servers)?,
                },
                SchemeEntry::Sized { kind, servers } => ResolvedScheme {
                    label: format!("{}_n{servers}", kind.name()),
                    kind: Some(*kind),
                    code: NfvCode::from_kind(*kind, *servers)?,
                },
                SchemeEntry::Matrix { matrix_file, name } => {
                    let text = std::fs::read_to_string(matrix_file)
                        .with_context(|| format!("reading {}", matrix_file.display()))?;
                    let g = BitMatrix::parse_file(&text)
                        .with_context(|| format!("parsing {}", matrix_file.display()))?;
                    let label = name.clone().unwrap_or_else(|| {
                        matrix_file
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| "matrix".into())
                    });
                    ResolvedScheme {
                        code: NfvCode::new(label.clone(), g)?,
                        label,
                        kind: None,
                    }
                }
            };
            if out.iter().any(|o| o.label == r.label) {
                bail!("config key `schemes`: duplicate scheme `{}`", r.label);
            }
            out.push(r);
        }
        Ok(out)
    }
}

/// Applies `key.path=value`; the value is parsed as JSON, else taken as a
/// string.
pub fn apply_set(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("--set expects KEY=VALUE, got `{assignment}`"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            bail!("--set: empty path segment in `{key}`");
        }
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .with_context(|| format!("--set: `{part}` is not an array index in `{key}`"))?;
                let slot = items
                    .get_mut(idx)
                    .with_context(|| format!("--set: index {idx} out of range in `{key}`"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => bail!("--set: `{key}` descends into a non-object value"),
        };
    }
    unreachable!("loop returns on the last segment")
}

/// The same system at another user-code rate.
pub fn system_for(base: &SystemParams, rate: f64) -> SystemParams {
    SystemParams { rate, ..*base }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "scenario": "fup_analyze",
            "system": {"frame_bits": 504, "rate": 0.5, "delta": 0.01, "inv_mu1": 0.0, "mu2": 10.0, "a": 1.0},
            "schemes": ["parallel", {"kind": "repetition", "servers": 3}],
            "time_grid": {"start": 100.0, "stop": 200.0, "points": 3}
        })
    }

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_value(base()).unwrap();
        assert_eq!(c.servers, 8);
        assert_eq!(c.trials, 100_000);
        assert_eq!(c.grid_values().unwrap(), vec![100.0, 150.0, 200.0]);
        let s = c.resolve_schemes().unwrap();
        assert_eq!(s[1].label, "repetition_n3");
    }

    #[test]
    fn unknown_key_is_named() {
        let mut v = base();
        v["system"]["delt"] = json!(0.1);
        let err = ExperimentConfig::from_value(v).unwrap_err().to_string();
        assert!(err.contains("system") && err.contains("delt"), "{err}");
        let mut v = base();
        v["trials"] = json!("many");
        let err = ExperimentConfig::from_value(v).unwrap_err().to_string();
        assert!(err.contains("`trials`"), "{err}");
    }

    #[test]
    fn grids_validated() {
        let mut v = base();
        v["time_grid"] = json!({"values": []});
        assert!(ExperimentConfig::from_value(v).is_err());
        let mut v = base();
        v["time_grid"] = json!({"values": [1.0, 1.0]});
        assert!(ExperimentConfig::from_value(v).is_err());
        let mut v = base();
        v["time_grid"] = json!({"values": [1.0], "start": 0.0});
        assert!(ExperimentConfig::from_value(v).is_err());
    }

    #[test]
    fn set_overrides() {
        let mut v = base();
        apply_set(&mut v, "system.delta=0.02").unwrap();
        apply_set(&mut v, "schemes.0=spc").unwrap();
        apply_set(&mut v, "decoder.kind=normal_approximation").unwrap();
        let c = ExperimentConfig::from_value(v.clone()).unwrap();
        assert_eq!(c.system.delta, 0.02);
        assert_eq!(c.schemes[0], SchemeEntry::Kind(CodeKind::Spc));
        assert_eq!(c.decoder, DecoderSpec::NormalApproximation);
        assert!(apply_set(&mut v, "nokey").is_err());
        assert!(apply_set(&mut v, "system.rate.x=1").is_err());
    }

    #[test]
    fn manifest_is_accepted() {
        let m = json!({"tool": "nfvlab", "config": base()});
        assert!(ExperimentConfig::from_value(m).is_ok());
    }
}
