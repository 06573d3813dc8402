//! JSON run configuration with `key=value` overrides.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scenarios::ScenarioId;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Time grid overrides; missing fields fall back to the scenario defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub n_points: Option<usize>,
    /// Largest integrator substep.
    pub max_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub plot: bool,
    /// Absolute tolerance on bound margins; each scenario has its own default.
    #[serde(default)]
    pub margin_tol: Option<f64>,
    /// Re-solve the multipliers independently at every point on a thread pool.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { plot: false, margin_tol: None, parallel: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub output: OutputOptions,
}

impl ScenarioConfig {
    /// Config with every parameter at its default.
    pub fn new(scenario: ScenarioId) -> Self {
        Self { scenario, params: Map::new(), grid: GridSpec::default(), output: OutputOptions::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key=value` override. Bare keys address `params`; `grid.*` and
    /// `output.*` address the other sections.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, value) = parse_override(spec)?;
        let mut doc = serde_json::to_value(&*self)?;
        let (section, key) = match path.as_slice() {
            [key] => ("params", key.as_str()),
            [section, key] => (section.as_str(), key.as_str()),
            _ => return config_err(format!("override key {spec:?} is nested too deeply")),
        };
        if !matches!(section, "params" | "grid" | "output") {
            return config_err(format!("unknown config section {section:?}"));
        }
        doc[section]
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("section {section} is not an object")))?
            .insert(key.to_string(), value);
        *self = serde_json::from_value(doc).map_err(|e| Error::Config(format!("override {spec:?}: {e}")))?;
        Ok(())
    }

    pub fn apply_overrides<'a>(&mut self, specs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        specs.into_iter().try_for_each(|s| self.apply_override(s))
    }

    /// Resolves `params` into a typed record, rejecting unknown keys.
    pub fn typed_params<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.params.clone()))
            .map_err(|e| Error::Config(format!("{} params: {e}", self.scenario.as_str())))
    }
}

/// Splits `key=value`; the value is read as JSON when possible, else as a string.
pub fn parse_override(spec: &str) -> Result<(Vec<String>, Value)> {
    let Some((key, raw)) = spec.split_once('=') else {
        return config_err(format!("override {spec:?} must look like key=value"));
    };
    let key = key.trim();
    if key.is_empty() {
        return config_err(format!("override {spec:?} has an empty key"));
    }
    let path: Vec<String> = key.split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
        return config_err(format!("invalid override key {key:?}"));
    }
    let raw = raw.trim();
    let value = match serde_json::from_str::<Value>(raw) {
        Ok(v @ (Value::Number(_) | Value::Bool(_) | Value::Null)) => v,
        _ if raw.eq_ignore_ascii_case("pi") => Value::from(std::f64::consts::PI),
        _ => Value::String(raw.to_string()),
    };
    Ok((path, value))
}
