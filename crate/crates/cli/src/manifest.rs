//! Every subcommand that writes files drops a `manifest.json` next to them:
//! the command, the fully resolved configuration, the seed, sha-256 hashes
//! of the inputs, the produced files, and the wall-clock duration.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{io_err, Result};

pub struct ManifestBuilder {
    command: String,
    config: Value,
    seed: Option<u64>,
    inputs: Vec<(String, String)>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: Value) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let digest = Sha256::digest(&bytes);
        self.inputs.push((path.display().to_string(), format!("{digest:x}")));
        Ok(self)
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(self, dir: &Path) -> Result<()> {
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "config": self.config,
            "input_hashes": Value::Object(
                self.inputs.into_iter().map(|(k, v)| (k, Value::String(v))).collect()
            ),
            "outputs": self.outputs,
            "duration_seconds": self.started.elapsed().as_secs_f64(),
        });
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_contains_expected_fields() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, b"hello").unwrap();
        let mut b = ManifestBuilder::new("simulate", json!({"rho": 1.0}))
            .seed(7)
            .input(&input)
            .unwrap();
        b.output("truth.csv");
        b.write(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "simulate");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["config"]["rho"], 1.0);
        assert_eq!(v["outputs"][0], "truth.csv");
        // sha256("hello")
        assert_eq!(
            v["input_hashes"][input.display().to_string()],
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
        assert!(v["duration_seconds"].as_f64().unwrap() >= 0.0);
    }
}
