//! JSON run configuration merged under command-line flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Comma-separated list of floats on the command line; a number, an array
/// or a comma-separated string in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

impl fmt::Display for FloatList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl<'de> Deserialize<'de> for FloatList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(f64),
            Many(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::One(v) => Ok(FloatList(vec![v])),
            Raw::Many(v) => Ok(FloatList(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FloatList {
    /// Broadcast a single entry to `k` axes; otherwise the length must be `k`.
    pub fn per_axis(&self, key: &str, k: usize) -> Result<Vec<f64>, CliError> {
        match self.0.len() {
            1 => Ok(vec![self.0[0]; k]),
            n if n == k => Ok(self.0.clone()),
            n => Err(CliError::config(key, format!("expected 1 or {k} entries, got {n}"))),
        }
    }
}

/// Top-level contents of a config file: command keys plus `threads`.
pub struct ConfigFile {
    pub threads: Option<usize>,
    entries: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(mut entries) = value else {
            return Err(CliError::Config(format!(
                "config {} must hold a JSON object",
                path.display()
            )));
        };
        let threads = match entries.remove("threads") {
            None => None,
            Some(v) => Some(
                serde_json::from_value::<usize>(v)
                    .map_err(|e| CliError::config("threads", e.to_string()))?,
            ),
        };
        Ok(Self { threads, entries })
    }

    /// Deserialize the command's keys, checking them one at a time so that a
    /// failure names the offending key.
    pub fn command_args<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        for (key, value) in &self.entries {
            let mut single = Map::new();
            single.insert(key.clone(), value.clone());
            serde_json::from_value::<T>(Value::Object(single))
                .map_err(|e| CliError::config(key, e.to_string()))?;
        }
        serde_json::from_value(Value::Object(self.entries.clone()))
            .map_err(|e| CliError::Config(format!("config: {e}")))
    }
}

/// Fill every unset field of `$flags` from `$file`.
macro_rules! merge_fields {
    ($flags:expr, $file:expr; $($field:ident),+ $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )+
    };
}
pub(crate) use merge_fields;
