//! Config files are flattened into flags and spliced into the argument
//! list right after the subcommand, so they go through the same parser.

use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("config key `{0}` does not match any flag of this subcommand")]
    UnknownKey(String),
    #[error("config key `{key}` has unsupported value {value}")]
    Value { key: String, value: String },
    #[error("config file given but no subcommand")]
    NoSubcommand,
}

/// Removes `--config FILE` / `--config=FILE` from `args`.
pub fn take_config_path(args: &mut Vec<OsString>) -> Option<OsString> {
    let pos = args
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="))?;
    let flag = args.remove(pos);
    match flag.to_string_lossy().strip_prefix("--config=") {
        Some(path) => Some(path.into()),
        None if pos < args.len() => Some(args.remove(pos)),
        None => None,
    }
}

fn flag_value(key: &str, value: &toml::Value) -> Result<Option<String>, ConfigError> {
    let bad = || ConfigError::Value {
        key: key.into(),
        value: value.to_string(),
    };
    Ok(Some(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(_) => return Err(bad()),
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>, _> = items
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    toml::Value::String(s) => Ok(s.clone()),
                    _ => Err(bad()),
                })
                .collect();
            if items.is_empty() {
                return Ok(None);
            }
            parts?.join(",")
        }
        _ => return Err(bad()),
    }))
}

/// Returns `args` with the config entries inserted as flags. Keys already
/// given on the command line are skipped.
pub fn splice(args: Vec<OsString>, path: &Path, cmd: &Command) -> Result<Vec<OsString>, ConfigError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: shown.clone(),
        source,
    })?;
    let table: toml::Table = toml::from_str(&text).map_err(|source| ConfigError::Parse { path: shown, source })?;

    // walk down the subcommand chain to find where the flags belong
    let mut sub = cmd;
    let mut insert_at = None;
    for (i, a) in args.iter().enumerate().skip(1) {
        let name = a.to_string_lossy();
        if name.starts_with('-') {
            continue;
        }
        match sub.find_subcommand(name.as_ref()) {
            Some(next) => {
                sub = next;
                insert_at = Some(i + 1);
            }
            None => break,
        }
    }
    let insert_at = insert_at.ok_or(ConfigError::NoSubcommand)?;

    let given: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut extra = Vec::new();
    for (raw_key, value) in &table {
        let key = raw_key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| ConfigError::UnknownKey(raw_key.clone()))?;
        let flag = format!("--{key}");
        if given.iter().any(|g| *g == flag || g.starts_with(&format!("{flag}="))) {
            continue;
        }
        match (arg.get_action(), value) {
            (ArgAction::SetTrue, toml::Value::Boolean(b)) => {
                if *b {
                    extra.push(OsString::from(flag));
                }
            }
            (ArgAction::SetTrue, _) => {
                return Err(ConfigError::Value {
                    key,
                    value: value.to_string(),
                })
            }
            _ => {
                if let Some(v) = flag_value(&key, value)? {
                    extra.push(OsString::from(format!("{flag}={v}")));
                }
            }
        }
    }
    let mut out = args;
    out.splice(insert_at..insert_at, extra);
    Ok(out)
}
