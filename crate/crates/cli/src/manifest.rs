use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one invocation: everything needed to reproduce its stdout.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub subcommand: &'a str,
    pub config: serde_json::Value,
    pub tool_version: &'static str,
    pub seed: u64,
    pub wall_time_ms: u128,
    pub output_sha256: String,
}

impl<'a> RunManifest<'a> {
    pub fn new(subcommand: &'a str, config: serde_json::Value, seed: u64, elapsed: Duration, output: &str) -> Self {
        let digest = Sha256::digest(output.as_bytes());
        Self {
            subcommand,
            config,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            wall_time_ms: elapsed.as_millis(),
            output_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }

    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = serde_json::to_string(self).expect("manifest serializes");
        match path {
            Some(p) => std::fs::write(p, text + "\n"),
            None => {
                eprintln!("{text}");
                Ok(())
            }
        }
    }
}
