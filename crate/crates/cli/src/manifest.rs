use std::path::{Path, PathBuf};

use pamfec::dist_db::{DistDatabase, SCHEMA_VERSION};
use pamfec::Result;
use serde::Serialize;

use crate::settings::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct DatabaseInfo {
    pub path: Option<PathBuf>,
    pub digest: String,
    pub schema_version: u32,
    pub entries: usize,
}

impl DatabaseInfo {
    pub fn of(path: Option<&Path>, db: &DistDatabase) -> DatabaseInfo {
        DatabaseInfo {
            path: path.map(Path::to_path_buf),
            digest: db.digest(),
            schema_version: SCHEMA_VERSION,
            entries: db.len(),
        }
    }
}

/// Record of one run, sufficient to repeat it.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub config: RunConfig,
    pub threads_used: usize,
    /// Database read by the run.
    pub database: Option<DatabaseInfo>,
    /// Database written by the run.
    pub database_out: Option<DatabaseInfo>,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Manifest {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            argv: std::env::args().collect(),
            config: config.clone(),
            threads_used: rayon::current_num_threads(),
            database: None,
            database_out: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

/// `<path>.manifest.json` next to an output file.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
