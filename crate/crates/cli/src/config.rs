use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::Serialize;
use serde_json::Value;

use dioph_core::numeric::{parse_bits, DEFAULT_CAP_BITS, DEFAULT_START_BITS};

use crate::params::{Param, ParamKind};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?} (json, csv)")),
        }
    }
}

/// Fully resolved settings of one run. `output` and `jobs` do not change the
/// report, so they are not echoed.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub precision_bits: u32,
    pub max_precision_bits: u32,
    pub format: Format,
    pub params: BTreeMap<String, String>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

const GLOBAL_KEYS: [&str; 7] = ["command", "seed", "precision-bits", "max-precision-bits", "format", "output", "jobs"];

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

/// The document as a flat key -> string map, plus every problem found.
pub fn load_config(path: &Path) -> Result<BTreeMap<String, (String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(vec![format!("cannot read config {}: {e}", path.display())]))?;
    parse_config(&text)
}

/// Keys are normalized (`n_max` and `n-max` are the same key); each entry
/// keeps the spelling used in the file for diagnostics.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, (String, String)>, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("config: {e}")]))?;
    let Value::Object(map) = doc else {
        return Err(CliError::Validation(vec!["config must be a JSON object".into()]));
    };
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (key, v) in map {
        let text = match &v {
            Value::String(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Number(n) if n.is_u64() || n.is_i64() => n.to_string(),
            Value::Number(_) => {
                errors.push(format!("config key {key:?}: non-integer numbers must be given as strings"));
                continue;
            }
            _ => {
                errors.push(format!("config key {key:?}: expected a string, integer or boolean"));
                continue;
            }
        };
        out.insert(normalize(&key), (key, text));
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Validation(errors))
    }
}

fn from_cli(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

fn cli_value(m: &ArgMatches, id: &str, kind: ParamKind) -> Option<String> {
    if !from_cli(m, id) {
        return None;
    }
    match kind {
        ParamKind::Flag => Some(m.get_flag(id).to_string()),
        ParamKind::Value => m.get_one::<String>(id).cloned(),
    }
}

/// Merges flags over the config file over defaults, reporting every
/// invalid field at once.
pub fn resolve(
    command: &str,
    specs: &[Param],
    global: &ArgMatches,
    sub: &ArgMatches,
    env_cap: Option<String>,
) -> Result<RunConfig, CliError> {
    let mut errors = Vec::new();
    let mut file = BTreeMap::new();
    if let Some(path) = global.get_one::<String>("config") {
        file = load_config(Path::new(path))?;
    }
    for (norm, (raw, _)) in &file {
        if !GLOBAL_KEYS.contains(&norm.as_str()) && !specs.iter().any(|p| p.name == norm) {
            errors.push(format!("unknown config key {raw:?}"));
        }
    }
    if let Some((_, c)) = file.get("command") {
        if c != command {
            errors.push(format!("config is for command {c:?}, not {command:?}"));
        }
    }

    let global_value = |id: &str| -> Option<String> {
        global.get_one::<String>(id).filter(|_| from_cli(global, id)).cloned().or_else(|| file.get(id).map(|(_, v)| v.clone()))
    };

    let seed = match global_value("seed") {
        Some(s) => s.parse::<u64>().map_err(|_| errors.push(format!("seed: {s:?} is not a 64-bit unsigned integer"))).ok(),
        None => Some(0),
    };
    let bits = |raw: Option<String>, default: u32, what: &str, errors: &mut Vec<String>| match raw {
        Some(s) => parse_bits(&s).map_err(|e| errors.push(format!("{what}: {e}"))).ok(),
        None => Some(default),
    };
    let precision_bits = bits(global_value("precision-bits"), DEFAULT_START_BITS, "precision-bits", &mut errors);
    let cap_raw = global_value("max-precision-bits").or(env_cap);
    let max_precision_bits = bits(cap_raw, DEFAULT_CAP_BITS, "max-precision-bits", &mut errors);
    if let (Some(s), Some(c)) = (precision_bits, max_precision_bits) {
        if s > c {
            errors.push(format!("precision-bits {s} exceeds max-precision-bits {c}"));
        }
    }
    let format = match global_value("format") {
        Some(f) => f.parse::<Format>().map_err(|e| errors.push(e)).ok(),
        None => Some(Format::Json),
    };
    let jobs = match global_value("jobs") {
        Some(j) => match j.parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => {
                errors.push(format!("jobs: {j:?} is not a positive integer"));
                None
            }
        },
        None => None,
    };
    let output = global_value("output").map(PathBuf::from);

    let mut params = BTreeMap::new();
    for p in specs {
        let v = cli_value(sub, p.name, p.kind).or_else(|| file.get(p.name).map(|(_, v)| v.clone()));
        let v = match (v, p.kind) {
            (Some(v), ParamKind::Flag) => match v.as_str() {
                "true" | "false" => Some(v),
                other => {
                    errors.push(format!("{}: expected true or false, got {other:?}", p.name));
                    None
                }
            },
            (Some(v), ParamKind::Value) => Some(v),
            (None, ParamKind::Flag) => Some("false".to_string()),
            (None, ParamKind::Value) => p.default.map(str::to_string),
        };
        if let Some(v) = v {
            params.insert(p.name.to_string(), v);
        }
    }

    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    Ok(RunConfig {
        command: command.to_string(),
        seed: seed.expect("checked"),
        precision_bits: precision_bits.expect("checked"),
        max_precision_bits: max_precision_bits.expect("checked"),
        format: format.expect("checked"),
        params,
        output,
        jobs,
    })
}

/// Typed access to resolved parameters, collecting every problem.
pub struct Params<'a> {
    map: &'a BTreeMap<String, String>,
    pub errors: Vec<String>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a BTreeMap<String, String>) -> Self {
        Params { map, errors: Vec::new() }
    }

    pub fn raw(&self, name: &str) -> Option<&'a str> {
        self.map.get(name).map(String::as_str)
    }

    pub fn opt<T: FromStr>(&mut self, name: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(name)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("--{name} {raw:?}: {e}"));
                None
            }
        }
    }

    pub fn req<T: FromStr>(&mut self, name: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(name).is_none() {
            self.errors.push(format!("--{name} is required"));
            return None;
        }
        self.opt(name)
    }

    pub fn flag(&self, name: &str) -> bool {
        self.raw(name) == Some("true")
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(self.errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_values_are_normalized() {
        let m = parse_config(r#"{"n_max": 30, "alpha": "3/2", "oracle": true}"#).unwrap();
        assert_eq!(m["n-max"], ("n_max".to_string(), "30".to_string()));
        assert_eq!(m["oracle"].1, "true");
    }

    #[test]
    fn config_rejects_floats_and_non_objects() {
        let Err(CliError::Validation(errs)) = parse_config(r#"{"alpha": 1.5, "theta": [1]}"#) else { panic!() };
        assert_eq!(errs.len(), 2);
        assert!(parse_config("[1, 2]").is_err());
        assert!(parse_config("{").is_err());
    }
}
