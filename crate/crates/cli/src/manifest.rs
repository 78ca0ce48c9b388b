//! Run manifests: enough to rerun a command and get the same bytes back.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Every flag of the command after defaults were applied.
    pub flags: Map<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    /// Derived figures such as topology or normalization; not needed to rerun.
    pub summary: Value,
}

impl RunManifest {
    pub fn new(command: &str, flags: &impl Serialize, seed: Option<u64>, outputs: Vec<PathBuf>, summary: Value) -> Self {
        let flags = match serde_json::to_value(flags).expect("flags serialize") {
            Value::Object(map) => map,
            _ => unreachable!("flags are a struct"),
        };
        RunManifest {
            command: command.to_string(),
            flags,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            summary,
        }
    }

    /// `<out>.manifest.json` next to the primary output.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(out);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::schema(path, e))
    }

    /// Command-line arguments equivalent to this manifest, with `--out`
    /// optionally replaced.
    pub fn to_args(&self, out: Option<&Path>) -> Result<Vec<String>, String> {
        let mut args = vec!["matdiff".to_string(), self.command.clone()];
        for (key, value) in &self.flags {
            let flag = format!("--{}", key.replace('_', "-"));
            let value = match (key.as_str(), out) {
                ("out", Some(o)) => Value::String(o.to_string_lossy().into_owned()),
                _ => value.clone(),
            };
            match value {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => args.push(flag),
                Value::Array(items) if items.is_empty() => {}
                Value::Array(items) => {
                    args.push(flag);
                    for item in items {
                        args.push(scalar(&item)?);
                    }
                }
                v => {
                    args.push(flag);
                    args.push(scalar(&v)?);
                }
            }
        }
        Ok(args)
    }
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("unsupported flag value {other}")),
    }
}
