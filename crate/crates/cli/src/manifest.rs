//! Run manifests: every output directory gets a `manifest.json` recording
//! the exact command, resolved configuration, tool version, the critical
//! radius used, and per-stage timings. Output files reference the manifest
//! (JSON by a `manifest` field, CSV by a leading comment line).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use excyl_core::dispersion::CriticalRadius;
use serde::Serialize;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub threads: usize,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<CriticalRadius>,
    pub timings_ms: BTreeMap<String, u128>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value) -> Self {
        let command: Vec<String> = std::env::args().collect();
        Self {
            command: command.join(" "),
            tool_version: excyl_core::VERSION.to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            threads: rayon::current_num_threads(),
            config,
            lambda_star: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, stage: &str, elapsed: std::time::Duration) {
        self.timings_ms.insert(stage.to_string(), elapsed.as_millis());
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes"))
    }
}

/// CSV header block: a comment line referencing the manifest, then the
/// column row. The column rows are pinned by golden tests.
pub fn csv_with_manifest_ref(columns: &str) -> String {
    format!("# manifest: {MANIFEST_FILE}\n{columns}\n")
}
