//! Run manifest written next to every set of outputs.

use serde::Serialize;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub config_path: Option<String>,
    pub out_dir: String,
    pub seed_override: Option<u64>,
    /// Seeds actually used by the noise sources, after any override.
    pub noise_seeds: Vec<u64>,
    /// UTC. Taken from `SOURCE_DATE_EPOCH` when set, so reruns can be
    /// byte-identical.
    pub timestamp: String,
    pub outputs: Vec<String>,
    /// The configuration exactly as read.
    pub config_text: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            argv: argv.iter().skip(1).cloned().collect(),
            config_path: None,
            out_dir: out_dir.display().to_string(),
            seed_override: None,
            noise_seeds: Vec::new(),
            timestamp: timestamp(),
            outputs: Vec::new(),
            config_text: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are plain values")
    }
}

fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        });
    OffsetDateTime::from_unix_timestamp(secs)
        .ok()
        .and_then(|t| t.format(&Rfc3339).ok())
        .unwrap_or_else(|| secs.to_string())
}
