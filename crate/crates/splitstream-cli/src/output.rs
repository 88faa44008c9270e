//! Provenance-stamped output writing.
//!
//! Every artifact starts with (or embeds) the tool version, the subcommand,
//! the seed, and a hash of the resolved parameters. No timestamps: rerunning
//! a command with the same configuration must produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Short hash of the resolved parameter set.
pub fn config_hash(resolved: &impl Serialize) -> String {
    let canonical = serde_json::to_string(resolved).expect("serializable params");
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(command: &'static str, seed: u64, resolved: &impl Serialize) -> Self {
        Self {
            version: VERSION,
            command,
            seed,
            config_hash: config_hash(resolved),
        }
    }

    /// Comment line placed at the top of CSV outputs.
    pub fn csv_header(&self) -> String {
        format!(
            "# splitstream v{} cmd={} seed={} config={}",
            self.version, self.command, self.seed, self.config_hash
        )
    }
}

/// A CSV document: provenance comment, one schema header line, rows.
pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(provenance: &Provenance, columns: &str) -> Self {
        Self {
            lines: vec![provenance.csv_header(), columns.to_string()],
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(","));
    }

    pub fn render(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// Shortest round-trip decimal for a float (Rust's Display).
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Write to the file or stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
                }
            }
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| format!("stdout: {e}"))
        }
    }
}

/// Serialize a JSON artifact with its provenance embedded.
pub fn json_with_provenance(
    provenance: &Provenance,
    body: serde_json::Value,
) -> Result<String, String> {
    let mut obj = serde_json::Map::new();
    obj.insert(
        "provenance".into(),
        serde_json::to_value(provenance).map_err(|e| e.to_string())?,
    );
    match body {
        serde_json::Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
        .map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}
