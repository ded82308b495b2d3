//! Run directory: manifest, CSV tables, JSON summaries and grid files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fields every output record carries.
#[derive(Debug, Clone, Serialize)]
pub struct Stamp {
    pub s: f64,
    pub k: usize,
    pub sign: String,
    pub domain_hash: String,
}

impl Stamp {
    pub fn columns() -> &'static str {
        "s,k,sign,domain_hash,version"
    }

    pub fn cells(&self) -> String {
        format!("{},{},{},{},{VERSION}", self.s, self.k, self.sign, self.domain_hash)
    }
}

pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Numerical(format!("{}: {e}", path.display()))
}

impl RunDir {
    pub fn create(root: &Path) -> Result<RunDir, CliError> {
        fs::create_dir_all(root).map_err(|e| io(root, e))?;
        Ok(RunDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| io(&p, e))?;
        self.files.push(name.into());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(v).expect("serializable");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// `header` and each row are comma-joined already.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
        let mut text = String::with_capacity(64 * (rows.len() + 1));
        text.push_str(header);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn write_grid(&mut self, name: &str, g: &extremal_core::GridField) -> Result<(), CliError> {
        let mut buf = Vec::new();
        g.write_to(&mut buf).map_err(CliError::from)?;
        self.write(name, &buf)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, command: &str, config: &Value, summary: Value) -> Result<(), CliError> {
        let manifest = json!({
            "command": command,
            "version": VERSION,
            "schema_version": crate::config::SCHEMA_VERSION,
            "config": config,
            "files": self.files,
            "summary": summary,
        });
        self.write_json("manifest.json", &manifest)
    }
}

pub fn fmt_point(p: &[f64]) -> String {
    p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}
