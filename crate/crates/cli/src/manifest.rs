use std::path::{Path, PathBuf};

use anyhow::Result;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub output_paths: Vec<String>,
    pub exit_code: i32,
    pub error: Option<String>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, parameters: Value) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: String::new(),
            output_paths: Vec::new(),
            exit_code: 0,
            error: None,
        }
    }

    pub fn finish(&mut self, outputs: &[PathBuf], exit_code: i32, error: Option<String>) {
        self.finished_at = now();
        self.output_paths = outputs.iter().map(|p| p.display().to_string()).collect();
        self.exit_code = exit_code;
        self.error = error;
    }

    /// `<out>.manifest.json` when there is a primary output file.
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
