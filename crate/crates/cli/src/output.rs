//! Report files. Every JSON document embeds the resolved config and a
//! sha256 of its own canonical content; there is no timestamp, so identical
//! inputs give byte-identical files.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub struct Output {
    dir: Option<PathBuf>,
    command: &'static str,
    config: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

impl Output {
    pub fn new(dir: Option<PathBuf>, command: &'static str, cfg: &RunConfig) -> Output {
        let config = serde_json::to_value(cfg).expect("config serializes");
        Output { dir, command, config }
    }

    /// Wraps `results` with the command and config, then adds the hash of
    /// that wrapper. Object keys are sorted, so the bytes are canonical.
    pub fn document(&self, results: &impl Serialize) -> Value {
        let body = json!({
            "command": self.command,
            "config": self.config,
            "results": serde_json::to_value(results).expect("results serialize"),
        });
        let hash = sha256_hex(&serde_json::to_vec(&body).expect("json"));
        let mut doc = body;
        doc["content_hash"] = Value::String(format!("sha256:{hash}"));
        doc
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
        Ok(Some(path))
    }

    pub fn write_json(&self, name: &str, results: &impl Serialize) -> Result<Option<PathBuf>, CliError> {
        let mut text = serde_json::to_string_pretty(&self.document(results)).expect("json");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// One compact JSON object per line.
    pub fn write_jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<String, CliError> {
        let mut text = String::new();
        for r in rows {
            text.push_str(&serde_json::to_string(r).expect("json"));
            text.push('\n');
        }
        self.write(name, text.as_bytes())?;
        Ok(sha256_hex(text.as_bytes()))
    }

    pub fn write_csv(&self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<String, CliError> {
        let mut text = String::from(header);
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())?;
        Ok(sha256_hex(text.as_bytes()))
    }
}
