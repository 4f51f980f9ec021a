//! Optional `key = value` defaults file and output-directory resolution.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

pub const OUT_DIR_ENV: &str = "NOPA_OUT_DIR";

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cutoff: Option<usize>,
    pub series_tol: Option<f64>,
    pub bisect_tol: Option<f64>,
    pub audit_tol: Option<f64>,
    pub trace_tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

pub enum LoadError {
    Io(anyhow::Error),
    Parse(String),
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(LoadError::Io)?;
        Self::parse(&text).map_err(|e| LoadError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// `NOPA_OUT_DIR` wins over the config file.
    pub fn out_dir(&self) -> Option<PathBuf> {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .or_else(|| self.out_dir.clone())
    }
}

/// Explicit path as given (`-` is stdout); otherwise `default_name` inside the
/// output directory when one is configured, else stdout.
pub fn resolve_output(explicit: Option<&Path>, config: &Config, default_name: &str) -> Option<PathBuf> {
    match explicit {
        Some(p) if p == Path::new("-") => None,
        Some(p) => Some(p.to_path_buf()),
        None => config.out_dir().map(|d| d.join(default_name)),
    }
}
