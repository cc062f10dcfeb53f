//! Run configuration: `key = value` files merged with command-line flags.
//!
//! Both sources are reduced to the same key/value form and resolved by one
//! function, so a flag and a file entry with the same key are interpreted
//! identically. Flags win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qudit_coloring::{AlphaSchedule, FixStrategy, GraphFormat, Hyperparameters, Method};
use serde::Serialize;
use thiserror::Error;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "QUDIT_WORKERS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin} line {line}: expected `key = value`, got `{text}`")]
    Syntax { origin: String, line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("`{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("no input graph given")]
    MissingInput,
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    /// I/O problems are reported separately from invalid settings.
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

/// Where results go. Unset paths are skipped, except stats, which default
/// to stdout.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct OutputPaths {
    pub stats: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub histogram: Option<PathBuf>,
    pub coloring: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: Option<GraphFormat>,
    pub hyperparameters: Hyperparameters,
    pub outputs: OutputPaths,
    pub workers: usize,
    pub verbosity: u8,
    /// Timing fields are zeroed so repeated runs produce identical files.
    pub no_timing: bool,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

pub const KEYS: &[&str] = &[
    "graph",
    "format",
    "method",
    "colors",
    "steps",
    "gamma",
    "alpha",
    "eta",
    "f",
    "f_tilde",
    "h",
    "runs",
    "patience",
    "fix",
    "seed",
    "inclusive_endpoint",
    "workers",
    "output",
    "trajectory",
    "histogram",
    "coloring",
    "verbosity",
    "no_timing",
];

/// Parses `key = value` lines; `#` starts a comment. Keys are normalized to
/// lowercase with `-` read as `_`.
pub fn parse_config_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: origin.to_string(),
                line: idx + 1,
                text: raw.trim().to_string(),
            });
        };
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn parse_value<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::TypeMismatch {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::TypeMismatch {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a boolean",
        }),
    }
}

/// Merges an optional config file with flag overrides and resolves the
/// result. Unset fields keep the solver defaults.
pub fn load_config(file: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let mut merged = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            parse_config_text(&text, &path.display().to_string())?
        }
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        merged.insert(key, v.clone());
    }
    resolve(&merged)
}

/// Builds a validated [`RunConfig`] from merged key/value pairs.
pub fn resolve(values: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let method = match values.get("method") {
        Some(v) => v.parse::<Method>().map_err(|_| ConfigError::TypeMismatch {
            key: "method".into(),
            value: v.clone(),
            expected: "`qdlqa` or `qdgd`",
        })?,
        None => Method::Qdlqa,
    };
    let mut hp = Hyperparameters::new(method, 0);
    let mut outputs = OutputPaths::default();
    let mut input = None;
    let mut format = None;
    let mut workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let mut verbosity = 0;
    let mut no_timing = false;
    let mut warnings = Vec::new();

    for (key, value) in values {
        let k = key.as_str();
        match k {
            "method" => {}
            "graph" => input = Some(PathBuf::from(value)),
            "format" => {
                format = Some(parse_value::<GraphFormat>(k, value, "`dimacs` or `edgelist`")?);
            }
            "colors" => hp.num_colors = parse_value(k, value, "an integer")?,
            "steps" => hp.steps = parse_value(k, value, "an integer")?,
            "gamma" => hp.gamma = parse_value(k, value, "a number")?,
            "alpha" => hp.alpha = parse_value::<AlphaSchedule>(k, value, "an integer or `exp:<rate>:<cap>`")?,
            "eta" => hp.eta = parse_value(k, value, "a number")?,
            "f" => hp.f = parse_value(k, value, "a number")?,
            "f_tilde" => hp.f_tilde = parse_value(k, value, "a number")?,
            "h" => hp.h = parse_value(k, value, "a number")?,
            "runs" => hp.runs = parse_value(k, value, "an integer")?,
            "patience" => hp.patience = parse_value(k, value, "an integer")?,
            "fix" => {
                hp.fix_strategy =
                    parse_value::<FixStrategy>(k, value, "`max-degree`, `degree-one`, `none` or a node index")?
            }
            "seed" => hp.master_seed = parse_value(k, value, "an unsigned integer")?,
            "inclusive_endpoint" => hp.inclusive_endpoint = parse_bool(k, value)?,
            "workers" => workers = parse_value(k, value, "an integer")?,
            "output" => outputs.stats = Some(PathBuf::from(value)),
            "trajectory" => outputs.trajectory = Some(PathBuf::from(value)),
            "histogram" => outputs.histogram = Some(PathBuf::from(value)),
            "coloring" => outputs.coloring = Some(PathBuf::from(value)),
            "verbosity" => verbosity = parse_value(k, value, "an integer")?,
            "no_timing" => no_timing = parse_bool(k, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
    }

    let ignored: &[&str] = match method {
        Method::Qdlqa => &["patience", "f_tilde"],
        Method::Qdgd => &["alpha", "f", "inclusive_endpoint"],
    };
    for key in ignored {
        if values.contains_key(*key) {
            warnings.push(format!("`{key}` has no effect with method {method}; ignored"));
        }
    }

    if !values.contains_key("colors") {
        return Err(ConfigError::Invalid("colors must be given".into()));
    }
    hp.validate().map_err(|e| ConfigError::Invalid(strip_prefix(&e.to_string())))?;

    Ok(RunConfig {
        input: input.ok_or(ConfigError::MissingInput)?,
        format,
        hyperparameters: hp,
        outputs,
        workers,
        verbosity,
        no_timing,
        warnings,
    })
}

fn strip_prefix(msg: &str) -> String {
    msg.strip_prefix("invalid hyperparameter: ").unwrap_or(msg).to_string()
}
