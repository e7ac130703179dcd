//! Run manifest: written before any heavy work and completed afterwards.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCHEMA: &str = "homns-manifest/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub subcommand: String,
    /// Fully resolved configuration; enough to replay the run.
    pub config: Config,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    /// `running`, `ok`, `check_failed` or `error`.
    pub status: String,
    /// Output files relative to the run directory.
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    /// Create the run directory and write the manifest with status `running`.
    pub fn begin(subcommand: &str, config: &Config, dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        let seed = ["init.seed", "verify.seed"].iter().find_map(|k| config.get::<u64>(k).ok());
        let m = Self {
            schema: SCHEMA.into(),
            subcommand: subcommand.into(),
            config: config.clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix: now(),
            finished_unix: None,
            status: "running".into(),
            outputs: vec![],
            error: None,
        };
        m.write(dir)?;
        Ok(m)
    }

    pub fn finish(&mut self, dir: &Path, status: &str, outputs: Vec<String>, error: Option<String>) -> Result<(), CliError> {
        self.finished_unix = Some(now());
        self.status = status.into();
        self.outputs = outputs;
        self.error = error;
        self.write(dir)
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported manifest schema `{}`", m.schema)));
        }
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok((m, dir))
    }
}
