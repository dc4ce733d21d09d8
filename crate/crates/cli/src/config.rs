//! Config files (TOML or JSON) merged under command-line flags.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Reads a flat key/value table. The format follows the extension: `.json` is JSON,
/// anything else is TOML.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid JSON in {}: {e}", path.display())))?
    } else {
        let table: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid TOML in {}: {e}", path.display())))?;
        serde_json::to_value(table).map_err(|e| CliError::Usage(e.to_string()))?
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Usage(format!(
            "config {} must be a table of keys",
            path.display()
        ))),
    }
}

/// Overlays the flags that were given on top of the file's keys and deserializes the result.
///
/// `flags` must serialize with kebab-case keys and omit unset options; `allowed` lists the
/// keys a config file may use.
pub fn merge<T>(flags: &T, file: Option<&Path>, allowed: &BTreeSet<String>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let mut merged = match file {
        Some(path) => load_file(path)?,
        None => Map::new(),
    };
    if let Some(bad) = merged.keys().find(|k| !allowed.contains(*k)) {
        return Err(CliError::Usage(format!("unknown config key `{bad}`")));
    }
    let Value::Object(given) =
        serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))?
    else {
        unreachable!("argument structs serialize to objects");
    };
    merged.extend(given.into_iter().filter(|(_, v)| !v.is_null()));
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
}

/// Long flag names of a clap command, which double as config keys.
pub fn flag_names(cmd: &clap::Command) -> BTreeSet<String> {
    cmd.get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "config")
        .map(str::to_owned)
        .collect()
}

/// A list entry: a single integer or an inclusive range `lo-hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: u64,
    pub hi: u64,
}

impl Span {
    pub fn expand(items: &[Span]) -> Vec<u64> {
        let mut out = Vec::new();
        for s in items {
            out.extend(s.lo..=s.hi);
        }
        out
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("`{s}` is not an integer or a range lo-hi"))
        };
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(Span { lo, hi })
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}

impl Serialize for Span {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.lo == self.hi {
            s.serialize_u64(self.lo)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Span { lo: v, hi: v }),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        let items: Vec<Span> = ["1-3", "7"].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(Span::expand(&items), [1, 2, 3, 7]);
        assert!("3-1".parse::<Span>().is_err());
        assert!("x".parse::<Span>().is_err());
        let json: Vec<Span> = serde_json::from_str(r#"[2, "4-5"]"#).unwrap();
        assert_eq!(Span::expand(&json), [2, 4, 5]);
        assert_eq!(serde_json::to_string(&json).unwrap(), r#"[2,"4-5"]"#);
    }
}
