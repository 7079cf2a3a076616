//! Series manifests: a base joint file plus one target CSV per period.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use prevalence_core::Technique;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Period {
    pub label: String,
    pub target: PathBuf,
}

/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SeriesManifest {
    pub base: PathBuf,
    pub periods: Vec<Period>,
    #[serde(default)]
    pub techniques: Vec<Technique>,
}

impl SeriesManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut manifest: Self = serde_json::from_str(&text)
            .with_context(|| format!("invalid manifest {}", path.display()))?;
        if manifest.periods.is_empty() {
            bail!("manifest {} lists no periods", path.display());
        }
        let dir = path.parent().unwrap_or(Path::new("."));
        manifest.base = dir.join(&manifest.base);
        for period in &mut manifest.periods {
            period.target = dir.join(&period.target);
        }
        Ok(manifest)
    }
}
