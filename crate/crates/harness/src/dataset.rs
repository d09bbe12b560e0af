//! Dataset files: JSON documents holding one generated dataset.

use std::fs;
use std::path::Path;

use hwarch_core::synth::{AssociationDataset, IdentityDataset};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Dataset {
    Identity(IdentityDataset),
    Association(AssociationDataset),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DatasetFile {
    version: u32,
    #[serde(flatten)]
    dataset: Dataset,
}

pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    let file = DatasetFile {
        version: FORMAT_VERSION,
        dataset: dataset.clone(),
    };
    let text = serde_json::to_string(&file).map_err(|e| HarnessError::Config(e.to_string()))?;
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: DatasetFile =
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    if file.version != FORMAT_VERSION {
        return Err(HarnessError::Version {
            found: file.version,
            supported: FORMAT_VERSION,
        });
    }
    Ok(file.dataset)
}
