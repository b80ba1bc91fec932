use std::fs;
use std::io::Read;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Read a JSON document from a path, or stdin for "-".
pub fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Parse(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Accept either a bare document or one wrapped under `key`, as written by
/// another subcommand.
pub fn unwrap_key(value: Value, key: &str) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key(key) => map.remove(key).expect("checked"),
        other => other,
    }
}

pub fn parse<T: DeserializeOwned>(value: Value, what: &str) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn load<T: DeserializeOwned>(path: &Path, key: &str) -> Result<T, CliError> {
    parse(unwrap_key(read_value(path)?, key), key)
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

pub fn write_file<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("library types serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Primary output object; `meta` is appended last by the caller.
#[derive(Default)]
pub struct Output(pub Map<String, Value>);

impl Output {
    pub fn with<T: Serialize>(mut self, key: &str, v: &T) -> Self {
        self.0.insert(key.into(), to_value(v));
        self
    }
}
