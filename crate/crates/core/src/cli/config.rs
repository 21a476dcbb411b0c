//! Scenario configuration documents: versioned JSON with strict schema checks.

use std::path::Path;

use serde_json::Value;

use super::CliError;
use crate::sim::Scenario;

pub const CONFIG_VERSION: u64 = 1;

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| e.context(&format!("config {}", path.display())))
}

/// Parses a configuration document; every problem carries a JSON pointer.
pub fn parse_config(text: &str) -> Result<Scenario, CliError> {
    let mut doc: Value =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("not valid JSON: {e}")))?;
    let root = doc
        .as_object_mut()
        .ok_or_else(|| CliError::usage("/: configuration must be a JSON object"))?;
    match root.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(CONFIG_VERSION) => {}
        Some(other) => {
            return Err(CliError::usage(format!(
                "/version: unsupported configuration version {other}, expected {CONFIG_VERSION}"
            )))
        }
        None => return Err(CliError::usage("/version: missing configuration version")),
    }
    let scenario: Scenario = serde_path_to_error::deserialize(doc).map_err(|e| {
        let pointer = json_pointer(e.path());
        CliError::usage(format!("{pointer}: {}", e.into_inner()))
    })?;
    scenario.validate().map_err(CliError::from)?;
    Ok(scenario)
}

/// Canonical document text: sorted keys, defaults written out, version included.
pub fn canonical_config(scenario: &Scenario) -> String {
    let mut value = serde_json::to_value(scenario).expect("scenario serialization cannot fail");
    value
        .as_object_mut()
        .expect("scenario serializes to an object")
        .insert("version".into(), CONFIG_VERSION.into());
    serde_json::to_string_pretty(&value).expect("serialization cannot fail")
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}
