//! Dataset ingestion: paired image/ground-truth directories matched by
//! file stem, with optional prediction and edge-map directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

const EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "pgm"];

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read directory {path}: {source}")]
    ReadDir {
        path: String,
        source: std::io::Error,
    },
    #[error("no ground-truth images found in {0}")]
    EmptyGtDir(String),
    #[error("{count} ground-truth stems have no matching image: {missing}")]
    UnmatchedStems { count: usize, missing: String },
}

/// Where one dataset lives on disk.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub name: String,
    pub image_dir: PathBuf,
    pub gt_dir: PathBuf,
    pub pred_dir: Option<PathBuf>,
    pub edge_dir: Option<PathBuf>,
}

/// One stem with every file resolved for it.
#[derive(Debug, Clone)]
pub struct PairedEntry {
    pub stem: String,
    pub image: PathBuf,
    pub gt: PathBuf,
    pub pred: Option<PathBuf>,
    pub edge: Option<PathBuf>,
}

/// Map stem -> path for every supported image file in a directory.
/// Stems are case-sensitive exact basenames without extension.
fn scan_dir(dir: &Path) -> Result<BTreeMap<String, PathBuf>, ManifestError> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|source| ManifestError::ReadDir {
        path: dir.display().to_string(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| ManifestError::ReadDir {
            path: dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
            continue;
        };
        if !EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

impl DatasetManifest {
    /// Resolve every ground-truth stem against the other directories.
    ///
    /// Ground truth drives the pair list. A GT stem without a matching
    /// image is a pre-flight error (never a silent drop); missing
    /// predictions or edge maps surface per entry so commands can skip
    /// them individually. Entries come back sorted by stem.
    pub fn scan(&self) -> Result<Vec<PairedEntry>, ManifestError> {
        let gts = scan_dir(&self.gt_dir)?;
        if gts.is_empty() {
            return Err(ManifestError::EmptyGtDir(self.gt_dir.display().to_string()));
        }
        let images = scan_dir(&self.image_dir)?;
        let preds = match &self.pred_dir {
            Some(d) => scan_dir(d)?,
            None => BTreeMap::new(),
        };
        let edges = match &self.edge_dir {
            Some(d) => scan_dir(d)?,
            None => BTreeMap::new(),
        };

        let missing: Vec<&String> = gts.keys().filter(|s| !images.contains_key(*s)).collect();
        if !missing.is_empty() {
            let shown: Vec<String> = missing.iter().take(10).map(|s| s.to_string()).collect();
            let mut text = shown.join(", ");
            if missing.len() > 10 {
                text.push_str(", ...");
            }
            return Err(ManifestError::UnmatchedStems {
                count: missing.len(),
                missing: text,
            });
        }

        Ok(gts
            .into_iter()
            .map(|(stem, gt)| PairedEntry {
                image: images[&stem].clone(),
                pred: preds.get(&stem).cloned(),
                edge: edges.get(&stem).cloned(),
                stem,
                gt,
            })
            .collect())
    }
}
