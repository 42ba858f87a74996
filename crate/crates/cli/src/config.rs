//! Run configuration: JSON on disk, CLI overrides, and the canonical hash
//! embedded in every artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use occml::data::{generate_synthetic, load_dataset, Dataset};
use occml::models::{ModelKind, ParamValue};
use occml::tuning::{default_grid, GridProfile, HyperGrid};

/// Where the rows come from: a sensor CSV on disk or the seeded synthetic
/// generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Path(PathBuf),
    Synthetic { n_rows: usize, seed: u64 },
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_k_folds() -> usize {
    5
}

fn default_models() -> Vec<String> {
    ModelKind::ALL.iter().map(|k| k.id().to_string()).collect()
}

fn default_shap_background() -> usize {
    100
}

fn default_shap_permutations() -> usize {
    24
}

fn default_shap_samples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_k_folds")]
    pub k_folds: usize,
    pub grid_profile: GridProfile,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    pub out_dir: PathBuf,
    /// Per-model grid overrides: parameter name to candidate values.
    /// Models absent here use the built-in grid for the active profile.
    #[serde(default)]
    pub grids: BTreeMap<String, BTreeMap<String, Vec<ParamValue>>>,
    #[serde(default = "default_shap_background")]
    pub shap_background: usize,
    #[serde(default = "default_shap_permutations")]
    pub shap_permutations: usize,
    #[serde(default = "default_shap_samples")]
    pub shap_samples: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(config)
    }

    /// SHA-256 of the canonical JSON serialization. The output directory
    /// is excluded: artifact identity depends on the run parameters, not
    /// on where the artifacts are stored.
    pub fn hash(&self) -> String {
        let mut identity = self.clone();
        identity.out_dir = PathBuf::new();
        let canonical = serde_json::to_string(&identity).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex_string(&digest)
    }

    pub fn model_kinds(&self) -> Result<Vec<ModelKind>> {
        self.models
            .iter()
            .map(|id| {
                ModelKind::from_id(id)
                    .ok_or_else(|| anyhow::anyhow!("unknown model kind {id:?} in config"))
            })
            .collect()
    }

    /// Grid for one model kind: the config override when present, else the
    /// built-in grid for the active profile.
    pub fn grid_for(&self, kind: ModelKind) -> Result<HyperGrid> {
        match self.grids.get(kind.id()) {
            None => Ok(default_grid(kind, self.grid_profile)),
            Some(axes) => {
                for name in axes.keys() {
                    if !kind.param_names().contains(&name.as_str()) {
                        anyhow::bail!(
                            "config grid for {} names unknown hyperparameter {name:?}",
                            kind.id()
                        );
                    }
                }
                Ok(HyperGrid::new(
                    kind,
                    axes.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                ))
            }
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetSource::Path(path) => {
                load_dataset(path).with_context(|| format!("loading {}", path.display()))
            }
            DatasetSource::Synthetic { n_rows, seed } => {
                generate_synthetic(*n_rows, *seed).context("generating synthetic dataset")
            }
        }
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
