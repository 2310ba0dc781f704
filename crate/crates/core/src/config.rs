//! Run configuration: a flat key/value file (TOML, or JSON for manifests)
//! overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::engine::{ScenarioKind, SimConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("input path missing or not found{}", .0.as_ref().map(|p| format!(": {}", p.display())).unwrap_or_default())]
    MissingInputPath(Option<PathBuf>),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

const KEYS: &[&str] = &[
    "eta",
    "tau",
    "fee_rate",
    "initial_balance",
    "n_houses",
    "pr",
    "horizon",
    "seed",
    "seeds",
    "target_generation_ratio",
    "targets",
    "base_load_min",
    "base_load_max",
    "input",
    "output",
    "scenarios",
];

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub input: PathBuf,
    pub output: PathBuf,
    pub scenarios: Vec<ScenarioKind>,
    pub seeds: Vec<u64>,
    pub targets: Vec<f64>,
}

/// Values given on the command line. Empty lists and `None` leave the file
/// value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub tau: Option<usize>,
    pub fee_rate: Option<f64>,
    pub initial_balance: Option<f64>,
    pub n_houses: Option<usize>,
    pub pr: Option<f64>,
    pub horizon: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub scenarios: Vec<ScenarioKind>,
    pub seeds: Vec<u64>,
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// Reads `file` (if any), applies `overrides`, fills defaults and validates.
///
/// Relative paths inside the file resolve against the file's directory.
pub fn parse_config(file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let (map, base) = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (parse_map(&text, Format::from_path(path))?, base)
        }
        None => (Map::new(), PathBuf::new()),
    };
    let mut cfg = resolve(&map, &base)?;
    apply(&mut cfg, overrides);
    validate(&cfg)?;
    // absolute paths keep the manifest valid wherever it is read from
    cfg.input = fs::canonicalize(&cfg.input).map_err(|_| ConfigError::MissingInputPath(Some(cfg.input.clone())))?;
    cfg.output = std::path::absolute(&cfg.output).map_err(|e| invalid("output", e.to_string()))?;
    Ok(cfg)
}

/// Same as [`parse_config`] for in-memory text; no input-path existence check.
pub fn parse_config_str(text: &str, format: Format, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let map = parse_map(text, format)?;
    let mut cfg = resolve(&map, Path::new(""))?;
    apply(&mut cfg, overrides);
    validate_values(&cfg)?;
    Ok(cfg)
}

fn parse_map(text: &str, format: Format) -> Result<Map<String, Value>, ConfigError> {
    let value = match format {
        Format::Json => serde_json::from_str::<Value>(text).map_err(|e| ConfigError::Parse(e.to_string()))?,
        Format::Toml => {
            let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
            serde_json::to_value(table).map_err(|e| ConfigError::Parse(e.to_string()))?
        }
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(ConfigError::Parse("top level must be a key/value table".into())),
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64().ok_or_else(|| invalid(key, format!("expected a number, got {v}")))
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| invalid(key, format!("expected a non-negative integer, got {v}")))
}

fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
    v.as_u64().ok_or_else(|| invalid(key, format!("expected a non-negative integer, got {v}")))
}

fn as_path(key: &str, v: &Value, base: &Path) -> Result<PathBuf, ConfigError> {
    let s = v.as_str().ok_or_else(|| invalid(key, format!("expected a path string, got {v}")))?;
    let p = PathBuf::from(s);
    Ok(if p.is_relative() { base.join(p) } else { p })
}

fn as_list<'a>(key: &str, v: &'a Value) -> Result<&'a Vec<Value>, ConfigError> {
    v.as_array().ok_or_else(|| invalid(key, format!("expected a list, got {v}")))
}

fn resolve(map: &Map<String, Value>, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig {
        sim: SimConfig::default(),
        input: PathBuf::new(),
        output: base.join("out"),
        scenarios: ScenarioKind::ALL.to_vec(),
        seeds: vec![SimConfig::default().seed],
        targets: Vec::new(),
    };
    let mut seeds_set = false;
    let mut targets_set = false;
    for (key, v) in map {
        match key.as_str() {
            "eta" => cfg.sim.eta = as_f64(key, v)?,
            "tau" => cfg.sim.tau = as_usize(key, v)?,
            "fee_rate" => cfg.sim.fee_rate = as_f64(key, v)?,
            "initial_balance" => cfg.sim.initial_balance = as_f64(key, v)?,
            "n_houses" => cfg.sim.n_houses = as_usize(key, v)?,
            "pr" => cfg.sim.pr = as_f64(key, v)?,
            "horizon" => cfg.sim.horizon = Some(as_usize(key, v)?),
            "base_load_min" => cfg.sim.profile_params.base_load_min = as_f64(key, v)?,
            "base_load_max" => cfg.sim.profile_params.base_load_max = as_f64(key, v)?,
            "input" => cfg.input = as_path(key, v, base)?,
            "output" => cfg.output = as_path(key, v, base)?,
            "seed" if !seeds_set => cfg.seeds = vec![as_u64(key, v)?],
            "seed" => {}
            "seeds" => {
                cfg.seeds = as_list(key, v)?.iter().map(|s| as_u64(key, s)).collect::<Result<_, _>>()?;
                seeds_set = true;
            }
            "target_generation_ratio" if !targets_set => cfg.targets = vec![as_f64(key, v)?],
            "target_generation_ratio" => {}
            "targets" => {
                cfg.targets = as_list(key, v)?.iter().map(|s| as_f64(key, s)).collect::<Result<_, _>>()?;
                targets_set = true;
            }
            "scenarios" => {
                cfg.scenarios = as_list(key, v)?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .ok_or_else(|| invalid(key, format!("expected a scenario name, got {s}")))?
                            .parse::<ScenarioKind>()
                            .map_err(|e| invalid(key, e.to_string()))
                    })
                    .collect::<Result<_, _>>()?;
            }
            other => {
                debug_assert!(!KEYS.contains(&other));
                return Err(ConfigError::UnknownKey(other.to_string()));
            }
        }
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, o: &Overrides) {
    macro_rules! take {
        ($field:ident => $target:expr) => {
            if let Some(v) = o.$field.clone() {
                $target = v;
            }
        };
    }
    take!(eta => cfg.sim.eta);
    take!(tau => cfg.sim.tau);
    take!(fee_rate => cfg.sim.fee_rate);
    take!(initial_balance => cfg.sim.initial_balance);
    take!(n_houses => cfg.sim.n_houses);
    take!(pr => cfg.sim.pr);
    take!(input => cfg.input);
    take!(output => cfg.output);
    if o.horizon.is_some() {
        cfg.sim.horizon = o.horizon;
    }
    if !o.scenarios.is_empty() {
        cfg.scenarios = o.scenarios.clone();
    }
    if !o.seeds.is_empty() {
        cfg.seeds = o.seeds.clone();
    }
    if !o.targets.is_empty() {
        cfg.targets = o.targets.clone();
    }
    cfg.sim.seed = cfg.seeds.first().copied().unwrap_or(cfg.sim.seed);
    cfg.sim.target_generation_ratio = cfg.targets.first().copied();
}

fn validate_values(cfg: &RunConfig) -> Result<(), ConfigError> {
    let s = &cfg.sim;
    if !(0.0..=1.0).contains(&s.eta) {
        return Err(invalid("eta", format!("{} is outside [0, 1]", s.eta)));
    }
    if s.tau < 1 {
        return Err(invalid("tau", "must be at least 1"));
    }
    if !(0.0..1.0).contains(&s.fee_rate) {
        return Err(invalid("fee_rate", format!("{} is outside [0, 1)", s.fee_rate)));
    }
    if !s.initial_balance.is_finite() {
        return Err(invalid("initial_balance", "must be finite"));
    }
    if s.n_houses < 1 {
        return Err(invalid("n_houses", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&s.pr) {
        return Err(invalid("pr", format!("{} is outside [0, 1]", s.pr)));
    }
    if s.horizon == Some(0) {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let p = &s.profile_params;
    if !(p.base_load_min > 0.0 && p.base_load_min <= p.base_load_max && p.base_load_max.is_finite()) {
        return Err(invalid("base_load_min", "need 0 < base_load_min <= base_load_max"));
    }
    if cfg.scenarios.is_empty() {
        return Err(invalid("scenarios", "at least one scenario required"));
    }
    if cfg.seeds.is_empty() {
        return Err(invalid("seeds", "at least one seed required"));
    }
    if let Some(t) = cfg.targets.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(invalid("targets", format!("{t} is not a positive ratio")));
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    validate_values(cfg)?;
    if cfg.input.as_os_str().is_empty() {
        return Err(ConfigError::MissingInputPath(None));
    }
    if !cfg.input.is_file() {
        return Err(ConfigError::MissingInputPath(Some(cfg.input.clone())));
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    eta: f64,
    tau: usize,
    fee_rate: f64,
    initial_balance: f64,
    n_houses: usize,
    pr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    base_load_min: f64,
    base_load_max: f64,
    input: &'a Path,
    output: &'a Path,
    scenarios: Vec<&'static str>,
    seeds: &'a [u64],
    targets: &'a [f64],
}

impl RunConfig {
    /// Serializes the resolved config with the same keys [`parse_config`]
    /// reads, so the manifest can be fed back in as a config.
    pub fn to_manifest_json(&self) -> String {
        let m = Manifest {
            eta: self.sim.eta,
            tau: self.sim.tau,
            fee_rate: self.sim.fee_rate,
            initial_balance: self.sim.initial_balance,
            n_houses: self.sim.n_houses,
            pr: self.sim.pr,
            horizon: self.sim.horizon,
            base_load_min: self.sim.profile_params.base_load_min,
            base_load_max: self.sim.profile_params.base_load_max,
            input: &self.input,
            output: &self.output,
            scenarios: self.scenarios.iter().map(|s| s.key()).collect(),
            seeds: &self.seeds,
            targets: &self.targets,
        };
        serde_json::to_string_pretty(&m).expect("manifest serializes")
    }
}
