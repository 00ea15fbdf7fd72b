//! Run manifests: every file output carries a sidecar recording the
//! command, its full parameter set, the master seed, and the tool version.
//! `weylsim replay --manifest <file>` re-executes the recorded command and
//! reproduces the output bit-identically (the manifest's wall-clock
//! duration is informational and excluded from the reproducibility
//! contract).

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub master_seed: u64,
    pub version: String,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, params: &P, master_seed: u64) -> Self {
        Self {
            command: command.to_string(),
            params: serde_json::to_value(params).expect("serializable parameters"),
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
        }
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration_seconds = seconds;
        self
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable manifest");
        s.push('\n');
        s
    }

    pub fn load(path: &str) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}
