//! Plain-text run configuration: `key = value` lines with optional
//! `[section]` headers. Keys are the long flag names; command-line flags
//! always win over config values.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(content: &str) -> Result<RunConfig, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                if !rest.ends_with(']') {
                    return Err(format!("config line {}: unterminated section", i + 1));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, String> {
        let path = path.as_ref();
        let content = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        RunConfig::parse(&content)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}
