use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

/// One rendered image with its fragment buffer, as paths relative to the
/// manifest directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderEntry {
    pub view_id: u32,
    pub rotation_deg: u32,
    pub png: String,
    pub frag: String,
}

/// Record of a run directory. Paths are relative to the directory holding
/// the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub object_id: String,
    pub tool_version: String,
    /// Copy of the input mesh in its original coordinates.
    pub mesh: String,
    pub diagonal: f64,
    pub centroid_applied: [f64; 3],
    pub renders: Vec<RenderEntry>,
    pub vertex_features: Option<String>,
    pub planes: Option<String>,
    /// Settings per stage, keyed by stage name.
    pub config: BTreeMap<String, serde_json::Value>,
    /// SHA-256 of the serialized `config`.
    pub config_hash: String,
    /// Stages whose outputs are all present.
    pub completed: Vec<String>,
}

pub fn config_hash(config: &BTreeMap<String, serde_json::Value>) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    /// Accepts either a manifest file or the directory containing one.
    pub fn locate(path: &Path) -> PathBuf {
        if path.is_dir() {
            path.join(MANIFEST_NAME)
        } else {
            path.to_path_buf()
        }
    }

    pub fn load(path: &Path) -> Result<(RunManifest, PathBuf)> {
        let file = Self::locate(path);
        let text = std::fs::read_to_string(&file)
            .map_err(|e| Error::InvalidArgument(format!("cannot read manifest {}: {e}", file.display())))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, dir))
    }

    /// Stores `value` as the settings of `stage`, marks the stage complete
    /// and refreshes the hash.
    pub fn record_stage(&mut self, stage: &str, value: serde_json::Value) -> Result<()> {
        self.config.insert(stage.to_string(), value);
        self.config_hash = config_hash(&self.config)?;
        if !self.completed.iter().any(|s| s == stage) {
            self.completed.push(stage.to_string());
        }
        Ok(())
    }

    /// Writes the manifest after checking that every referenced path exists.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let refs = std::iter::once(&self.mesh)
            .chain(self.renders.iter().flat_map(|r| [&r.png, &r.frag]))
            .chain(self.vertex_features.iter())
            .chain(self.planes.iter());
        for r in refs {
            if !dir.join(r).exists() {
                return Err(Error::InvalidArgument(format!("manifest references missing file {r}")));
            }
        }
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(MANIFEST_NAME), text + "\n")?;
        Ok(())
    }
}
