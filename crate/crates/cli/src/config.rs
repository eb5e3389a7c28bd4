//! Flat `key=value` config files. Flags take precedence over the file,
//! which takes precedence over built-in defaults.

use std::collections::HashMap;
use std::path::Path;

pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self { values: HashMap::new() }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => {
                    values.insert(key.trim().to_string(), value.trim().to_string());
                }
                None => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{}:{}: expected key=value", path.display(), lineno + 1),
                    ));
                }
            }
        }
        Ok(Self { values })
    }

    /// Resolve one option: explicit flag, then file value, then default.
    pub fn resolve<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> T {
        if let Some(v) = flag {
            return v;
        }
        if let Some(raw) = self.values.get(key) {
            if let Ok(v) = raw.parse() {
                return v;
            }
            eprintln!("warning: ignoring unparsable config value {key}={raw}");
        }
        default
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}
