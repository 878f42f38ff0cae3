//! Output directory handling: provenance headers and atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Output {
    dir: PathBuf,
    header: String,
}

/// First 16 hex digits of the SHA-256 of the effective config, ignoring
/// the output directory.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let cfg = ExperimentConfig { out: None, ..cfg.clone() };
    let digest = Sha256::digest(cfg.to_toml_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl Output {
    pub fn new(dir: &Path, cfg: &ExperimentConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header: format!(
                "# tfetsec {VERSION} seed={} config={}\n",
                cfg.seed,
                config_hash(cfg)
            ),
        })
    }

    /// Writes `header + body` to `name` via a temp file and rename.
    pub fn write_csv(&self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(self.header.as_bytes())?;
        tmp.write_all(body.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }

    pub fn write_bytes(&self, name: &str, body: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(body)?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }
}
