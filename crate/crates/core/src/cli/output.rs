//! Files written into a run's output directory.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Node, Position3D};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to rerun a command and reproduce its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config_path: String,
    /// Verbatim config file contents.
    pub config_text: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub tool_version: String,
    pub output_dir: String,
    /// Seconds since the Unix epoch. Informational only.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config_text: &str, args: &[String], seed: u64, out: &Path) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            config_text: config_text.to_string(),
            args: args.to_vec(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output_dir: out.display().to_string(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Metrics {
    pub lambda2: f64,
    pub lifetime: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositionRecord {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PositionRecord {
    pub fn new(id: &str, p: Position3D<f64>) -> Self {
        Self { id: id.to_string(), x: p.x, y: p.y, z: p.z }
    }

    pub fn of(node: &Node<f64>) -> Self {
        Self::new(&node.id, node.pos)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))
    }
}
