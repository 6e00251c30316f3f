//! Run configurations: defaults, overlaid by a JSON file, overlaid by flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Deep-merges `overlay` into `base`. Objects merge key by key; anything else
/// replaces the slot.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Defaults overlaid by the file at `path`. A config echo written by an
/// earlier run is accepted as is: its `run` member is used.
///
/// The defaults always pass through JSON, so a run from defaults and a run
/// from its own echo see identical values.
pub fn resolve<T: Serialize + DeserializeOwned>(defaults: &T, path: Option<&Path>) -> Result<T, CliError> {
    let mut base = serde_json::to_value(defaults).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let mut overlay: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        if let Value::Object(map) = &mut overlay {
            if map.contains_key("metadata") {
                if let Some(run) = map.remove("run") {
                    overlay = run;
                }
            }
        }
        merge(&mut base, overlay);
    }
    serde_path_to_error::deserialize(base).map_err(|e| {
        let key = e.path().to_string();
        CliError::Config {
            key: if key == "." { "config".into() } else { key },
            reason: e.into_inner().to_string(),
        }
    })
}

/// Collects output files in write order and records them for the echo.
pub struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, data)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Serialize)]
pub struct Metadata<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub argv: Vec<String>,
    pub outputs: Vec<String>,
}

/// Config echo: everything needed to repeat the run. No timestamps, so
/// identical invocations produce identical files.
#[derive(Serialize)]
pub struct Echo<'a, T: Serialize> {
    pub metadata: Metadata<'a>,
    pub run: &'a T,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn merge_is_deep() {
        let mut base = json!({"a": {"x": 1, "y": 2}, "b": 3});
        merge(&mut base, json!({"a": {"y": 5}, "c": 4}));
        assert_eq!(base, json!({"a": {"x": 1, "y": 5}, "b": 3, "c": 4}));
    }

    #[test]
    fn null_slot_takes_object() {
        let mut base = json!({"a": null});
        merge(&mut base, json!({"a": {"k": 1}}));
        assert_eq!(base, json!({"a": {"k": 1}}));
    }
}
