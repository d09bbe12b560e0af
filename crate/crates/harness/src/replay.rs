//! Saving a studied MTL model and replaying its metrics from the snapshot.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, WtaParams};
use crate::error::{HarnessError, Result};
use crate::mtl;
use crate::records::ResultRecord;
use crate::snapshot::{load_model, save_model, ModelSnapshot};

/// What a snapshot needs to regenerate its probes and check its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub config: ExperimentConfig,
    pub rep: usize,
    pub seed: u64,
    pub cortex_faces: usize,
    pub wta: Option<WtaParams>,
    pub study_size: usize,
    pub records: Vec<ResultRecord>,
}

fn records(experiment: &str, meta_cfg: &ExperimentConfig, rep: usize, seed: u64, n: usize, values: [f64; 4]) -> Vec<ResultRecord> {
    mtl::METRICS
        .iter()
        .zip(values)
        .map(|(m, v)| {
            ResultRecord::new(experiment, m, v, Some(rep), seed)
                .param("backend", meta_cfg.mtl.backend.name())
                .param("study_size", n)
        })
        .collect()
}

/// Builds the first sweep cell of repetition 0 at the largest study size,
/// studies it, scores it and writes the snapshot.
pub fn save(cfg: &ExperimentConfig, path: &Path) -> Result<SnapshotMeta> {
    cfg.validate_mtl()?;
    let rep = 0;
    let seed = mtl::rep_seed(cfg, rep);
    let cell = mtl::cells(cfg)[0];
    let n = cfg.mtl.study_sizes.iter().copied().max().expect("validated non-empty");
    let data = mtl::association(cfg, seed)?;
    let mut model = mtl::build_model(cfg, seed, cell)?;
    mtl::study(&mut model, &data, n)?;
    let values = mtl::evaluate(&model, &data, n)?;
    let meta = SnapshotMeta {
        config: cfg.clone(),
        rep,
        seed,
        cortex_faces: cell.cortex_faces,
        wta: cell.wta,
        study_size: n,
        records: records("save", cfg, rep, seed, n, values),
    };
    let metadata = serde_json::to_string(&meta).map_err(|e| HarnessError::Config(e.to_string()))?;
    save_model(path, &ModelSnapshot { metadata, model })?;
    Ok(meta)
}

/// Loads a snapshot, re-scores the restored model on regenerated probes and
/// checks the result against the recorded metrics bit for bit.
pub fn load(path: &Path) -> Result<(SnapshotMeta, Vec<ResultRecord>)> {
    let snapshot = load_model(path)?;
    let meta: SnapshotMeta = serde_json::from_str(&snapshot.metadata)
        .map_err(|e| HarnessError::CorruptSnapshot(format!("metadata: {e}")))?;
    let data = mtl::association(&meta.config, meta.seed)?;
    let values = mtl::evaluate(&snapshot.model, &data, meta.study_size)?;
    let replayed = records("load", &meta.config, meta.rep, meta.seed, meta.study_size, values);
    for (want, got) in meta.records.iter().zip(&replayed) {
        if want.value.to_bits() != got.value.to_bits() {
            return Err(HarnessError::Replay(format!(
                "{}: recorded {} but replay gives {}",
                want.metric, want.value, got.value
            )));
        }
    }
    Ok((meta, replayed))
}
