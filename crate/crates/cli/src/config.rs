//! JSON configuration files: schema tags, seed overrides, grid caps and the
//! canonical hash recorded in manifests.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use sqg_core::experiments::{InitialDatumSpec, SweepSpec, DEFAULT_MAX_GRID};
use sqg_core::SolverConfig;

pub const RUN_SCHEMA: &str = "sqg.run.v1";
pub const SWEEP_SCHEMA: &str = "sqg.sweep.v1";
pub const RATES_SCHEMA: &str = "sqg.rates.v1";
pub const MAX_GRID_ENV: &str = "SQG_MAX_GRID";

const RANDOM_KINDS: [&str; 2] = ["random_band", "mollified_rough"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<sqg_core::Error> for ConfigError {
    fn from(e: sqg_core::Error) -> Self {
        Self(e.to_string())
    }
}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub datum: InitialDatumSpec,
    pub solver: SolverConfig,
}

fn default_true() -> bool {
    true
}

fn default_t_end() -> f64 {
    1.0
}

fn default_max_grid() -> usize {
    DEFAULT_MAX_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    /// Integrability exponents, each `≥ 4/3`.
    pub ps: Vec<f64>,
    pub nus: Vec<f64>,
    #[serde(default = "default_true")]
    pub linear: bool,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_max_grid")]
    pub max_grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: SweepSpec,
    /// Horizons of the small-time dissipation profile.
    pub deltas: Vec<f64>,
}

/// A parsed file: the effective JSON (after overrides) and its hash.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub config: T,
    pub effective: Value,
    pub hash: String,
}

/// SHA-256 of the compact JSON with object keys sorted.
pub fn canonical_hash(value: &Value) -> String {
    // serde_json's default map is ordered by key
    let canonical = serde_json::to_string(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn read_object(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(err(format!("{}: top level must be a JSON object", path.display()))),
        Err(e) => Err(err(format!("{}: {e}", path.display()))),
    }
}

fn check_schema(obj: &mut Map<String, Value>, expected: &str) -> Result<(), ConfigError> {
    match obj.remove("schema") {
        Some(Value::String(s)) if s == expected => Ok(()),
        Some(Value::String(s)) => Err(err(format!("schema {s:?} does not match {expected:?}"))),
        Some(_) => Err(err("schema must be a string")),
        None => Err(err(format!("missing schema field (expected {expected:?})"))),
    }
}

fn override_seed(obj: &mut Map<String, Value>, seed: Option<u64>) {
    let Some(seed) = seed else { return };
    if let Some(Value::Object(datum)) = obj.get_mut("datum") {
        let random = datum
            .get("kind")
            .and_then(Value::as_str)
            .is_some_and(|k| RANDOM_KINDS.contains(&k));
        if random {
            datum.insert("seed".into(), Value::from(seed));
        }
    }
}

fn decode<T: DeserializeOwned>(obj: Map<String, Value>) -> Result<T, ConfigError> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| err(e.to_string()))
}

fn finish<T>(config: T, mut obj: Map<String, Value>, schema: &str) -> Loaded<T> {
    obj.insert("schema".into(), Value::from(schema));
    let effective = Value::Object(obj);
    let hash = canonical_hash(&effective);
    Loaded { config, effective, hash }
}

/// Cap from `SQG_MAX_GRID`, if set.
pub fn grid_cap_from(raw: Option<String>) -> Result<Option<usize>, ConfigError> {
    match raw {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 4 => Ok(Some(n)),
            _ => Err(err(format!("{MAX_GRID_ENV} must be an integer >= 4, got {s:?}"))),
        },
    }
}

pub fn grid_cap() -> Result<Option<usize>, ConfigError> {
    grid_cap_from(std::env::var(MAX_GRID_ENV).ok())
}

pub fn load_run(path: &Path, seed: Option<u64>, cap: Option<usize>) -> Result<Loaded<RunConfig>, ConfigError> {
    let mut obj = read_object(path)?;
    check_schema(&mut obj, RUN_SCHEMA)?;
    override_seed(&mut obj, seed);
    let cfg: RunConfig = decode(obj.clone())?;
    cfg.solver.validate()?;
    if let Some(cap) = cap {
        if cfg.solver.grid_n > cap {
            return Err(err(format!(
                "grid_n = {} exceeds {MAX_GRID_ENV} = {cap}",
                cfg.solver.grid_n
            )));
        }
    }
    Ok(finish(cfg, obj, RUN_SCHEMA))
}

pub fn load_sweep(path: &Path, seed: Option<u64>, cap: Option<usize>) -> Result<Loaded<SweepConfig>, ConfigError> {
    let mut obj = read_object(path)?;
    check_schema(&mut obj, SWEEP_SCHEMA)?;
    override_seed(&mut obj, seed);
    let mut spec_obj = obj.clone();
    let deltas = match spec_obj.remove("deltas") {
        None => None,
        Some(v) => Some(serde_json::from_value::<Vec<f64>>(v).map_err(|e| err(format!("deltas: {e}")))?),
    };
    let mut spec: SweepSpec = decode(spec_obj)?;
    if let Some(cap) = cap {
        spec.max_grid = spec.max_grid.min(cap);
    }
    spec.validate()?;
    let t = spec.t_end;
    let deltas = deltas.unwrap_or_else(|| vec![t / 8.0, t / 4.0, t / 2.0, t]);
    if let Some(d) = deltas.iter().find(|&&d| !(0.0..=t).contains(&d)) {
        return Err(err(format!("delta = {d} outside [0, t_end = {t}]")));
    }
    Ok(finish(SweepConfig { spec, deltas }, obj, SWEEP_SCHEMA))
}

pub fn load_rates(path: &Path, cap: Option<usize>) -> Result<Loaded<RatesConfig>, ConfigError> {
    let mut obj = read_object(path)?;
    check_schema(&mut obj, RATES_SCHEMA)?;
    let mut cfg: RatesConfig = decode(obj.clone())?;
    if let Some(cap) = cap {
        cfg.max_grid = cfg.max_grid.min(cap);
    }
    if cfg.ps.is_empty() {
        return Err(err("ps must list at least one exponent"));
    }
    for &p in &cfg.ps {
        sqg_core::experiments::predicted_slope(p)?;
        rate_spec(&cfg, p).validate()?;
    }
    if cfg.nus.len() < 4 {
        return Err(err(format!("a rate fit needs at least 4 viscosities, got {}", cfg.nus.len())));
    }
    Ok(finish(cfg, obj, RATES_SCHEMA))
}

pub fn rate_spec(cfg: &RatesConfig, p: f64) -> SweepSpec {
    let mut spec = sqg_core::experiments::rate_sweep_spec(p, &cfg.nus, cfg.linear, cfg.t_end);
    spec.max_grid = cfg.max_grid;
    spec
}
