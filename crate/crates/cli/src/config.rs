//! Run configuration: one JSON document holding plan fields, optionally
//! layered over a built-in preset, plus output options.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};
use vpe_core::experiments::{preset, ExperimentPlan, Prepared};
use vpe_core::vpe::Mode;

use crate::error::CliError;

/// Keys handled here rather than by the plan.
const PRESET_KEY: &str = "preset";
const OUTPUT_KEY: &str = "output";

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub plan: ExperimentPlan,
    pub output: OutputOptions,
}

/// Command-line overrides applied after the document is merged.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sampled: Option<bool>,
    pub shots: Option<usize>,
}

/// Recursive object merge; any non-object in `patch` replaces the base value.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

fn config_error(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config(format!("invalid config at {path}: {}", message.into()))
}

fn preset_value(name: &str) -> Result<Value, CliError> {
    let plan =
        preset(name).ok_or_else(|| config_error(PRESET_KEY, format!("unknown preset '{name}'")))?;
    serde_json::to_value(&plan).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Parses a config document.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| config_error("$", e.to_string()))?;
    let Value::Object(mut fields) = doc else {
        return Err(config_error("$", "expected a JSON object"));
    };
    let output = match fields.remove(OUTPUT_KEY) {
        Some(v) => {
            serde_json::from_value(v).map_err(|e| config_error(OUTPUT_KEY, e.to_string()))?
        }
        None => OutputOptions::default(),
    };
    let mut base = match fields.remove(PRESET_KEY) {
        Some(Value::String(name)) => preset_value(&name)?,
        Some(_) => return Err(config_error(PRESET_KEY, "must be a preset name")),
        None => Value::Object(Map::new()),
    };
    merge(&mut base, Value::Object(fields));
    let plan = ExperimentPlan::from_json(&base.to_string())?;
    Ok(RunConfig { plan, output })
}

/// Reads `source` as a config file, or as a preset name when no such file exists.
pub fn load(source: &str) -> Result<RunConfig, CliError> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        return parse(&text);
    }
    if preset(source).is_some() {
        return parse(&format!(
            "{{\"{PRESET_KEY}\": {}}}",
            Value::String(source.into())
        ));
    }
    Err(CliError::Config(format!(
        "'{source}' is neither a config file nor a preset name"
    )))
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = o.seed {
            self.plan.seed = seed;
        }
        let current = match self.plan.mode {
            Mode::Sampled { shots } => Some(shots),
            Mode::Exact => None,
        };
        let sampled = o.sampled.unwrap_or(current.is_some() || o.shots.is_some());
        self.plan.mode = if sampled {
            let shots = o
                .shots
                .or(current)
                .ok_or_else(|| config_error("mode.shots", "sampled mode needs --shots"))?;
            Mode::Sampled { shots }
        } else {
            if o.shots.is_some() {
                return Err(config_error("mode", "--shots conflicts with --mode exact"));
            }
            Mode::Exact
        };
        Ok(())
    }

    /// Full check: structure, system, decomposition and ansatz.
    pub fn check(&self) -> Result<Prepared, CliError> {
        Ok(self.plan.check()?)
    }
}
