use serde::{Deserialize, Serialize};

use crate::run::Run;

pub const MANIFEST: &str = "manifest.json";
pub const TOOL_VERSION: &str = concat!("mixrad ", env!("CARGO_PKG_VERSION"));

/// Everything needed to re-run a command and get the same bytes back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: Run,
    /// `None` for runs that draw no random numbers.
    pub seed: Option<u64>,
    /// Relative to the directory holding the manifest.
    pub artifact_paths: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(run: Run, artifact_paths: Vec<String>) -> Self {
        Self { seed: run.seed(), run, artifact_paths, tool_version: TOOL_VERSION.to_string() }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
