//! Face-name association memory: frozen cortex, one hippocampal module per
//! studied individual, recall@1 across study-set sizes and WTA parameters.

use std::collections::BTreeMap;

use hwarch_core::rng::{derive_seed, stream, unit_vec};
use hwarch_core::synth::{
    embed, font_variants, generate_association_dataset, shift, AssociationDataset, AssociationParams,
};
use hwarch_core::{BackendKind, CortexHippocampusModel, Episode, FeatureVector, HwLayer, TemplateBook};
use rayon::prelude::*;

use crate::build::LayerSpec;
use crate::config::{ExperimentConfig, WtaParams};
use crate::error::Result;
use crate::records::{summarize, ResultRecord};
use crate::stats::{kendall, percentile};

pub const NAME: &str = "mtl";

/// The probe sets scored for every studied individual.
pub const METRICS: [&str; 4] = ["recall_studied", "recall_heldout", "recall_face_only", "recall_name_only"];

/// Metric whose decline with study-set size is tested.
pub const TREND_METRIC: &str = "recall_heldout";

pub fn rep_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    derive_seed(cfg.seed, &[rep as u64])
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub cortex_faces: usize,
    /// Hippocampal WTA parameters; `None` uses the backend defaults.
    pub wta: Option<WtaParams>,
}

impl Cell {
    fn params(&self, cfg: &ExperimentConfig) -> BTreeMap<String, String> {
        let m = &cfg.mtl;
        let mut p = BTreeMap::new();
        p.insert("backend".into(), m.backend.name().into());
        p.insert("cortex_faces".into(), self.cortex_faces.to_string());
        p.insert(
            "cortex_rank".into(),
            m.cortex_rank.map_or("full".into(), |r| r.to_string()),
        );
        p.insert("noise".into(), m.noise.to_string());
        match m.backend {
            BackendKind::Wta => {
                let w = self.wta_params(cfg);
                p.insert("k_wta".into(), w.k_wta.to_string());
                p.insert("w".into(), w.w.to_string());
                p.insert("l".into(), w.l.to_string());
            }
            BackendKind::Rp => {
                p.insert("s".into(), cfg.backend.s.to_string());
            }
            BackendKind::Svd => {
                p.insert("rank".into(), cfg.backend.rank.to_string());
            }
            BackendKind::Exact => {}
        }
        p
    }

    fn wta_params(&self, cfg: &ExperimentConfig) -> WtaParams {
        self.wta.unwrap_or(WtaParams {
            k_wta: cfg.backend.k_wta,
            w: cfg.backend.w,
            l: cfg.backend.l,
        })
    }
}

/// Sweep cells in output order: cortex size outer, WTA parameters inner.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let m = &cfg.mtl;
    let wta: Vec<Option<WtaParams>> = if m.backend == BackendKind::Wta && !m.wta_sweep.is_empty() {
        m.wta_sweep.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    m.cortex_faces
        .iter()
        .flat_map(|&cortex_faces| wta.iter().map(move |&wta| Cell { cortex_faces, wta }))
        .collect()
}

/// Individuals for the study phase; smaller study sets are prefixes.
pub fn association(cfg: &ExperimentConfig, seed: u64) -> Result<AssociationDataset> {
    let m = &cfg.mtl;
    Ok(generate_association_dataset(AssociationParams {
        n_individuals: m.study_sizes.iter().copied().max().unwrap_or(1),
        dim_a: m.dim_a,
        dim_b: m.dim_b,
        fonts: m.fonts,
        font_strength: m.font_strength,
        study_views: m.study_views,
        heldout_views: m.heldout_views,
        noise: m.noise,
        seed: derive_seed(seed, &[1]),
    })?)
}

/// Development books: full face orbits in the face slot, names across fonts
/// and positions in the name slot. Drawn from streams unrelated to the
/// study individuals, so no face or name is shared with the study phase.
pub fn development_books(cfg: &ExperimentConfig, seed: u64, faces: usize) -> Result<(Vec<TemplateBook>, Vec<TemplateBook>)> {
    let m = &cfg.mtl;
    let total = m.dim_a + m.dim_b;
    let dev = derive_seed(seed, &[2]);
    let face_books = (0..faces)
        .map(|k| {
            let face = unit_vec(&mut stream(dev, &[0xFA, k as u64]), m.dim_a);
            let views: Vec<FeatureVector> = (0..m.dim_a)
                .map(|j| FeatureVector::new(embed(&shift(&face, j), 0, total)))
                .collect::<hwarch_core::Result<_>>()?;
            Ok(TemplateBook::from_templates(k, total, &views)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let name_books = (0..m.cortex_names)
        .map(|k| {
            let mut r = stream(dev, &[0x4A, k as u64]);
            let name = unit_vec(&mut r, m.dim_b);
            let fonts = font_variants(&name, m.fonts, m.font_strength, &mut r)?;
            let views: Vec<FeatureVector> = fonts
                .iter()
                .flat_map(|f| (0..m.dim_b).map(move |j| embed(&shift(f, j), m.dim_a, total)))
                .map(FeatureVector::new)
                .collect::<hwarch_core::Result<_>>()?;
            Ok(TemplateBook::from_templates(k, total, &views)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((face_books, name_books))
}

/// Cortex trained on the development set plus an empty hippocampus.
pub fn build_model(cfg: &ExperimentConfig, seed: u64, cell: Cell) -> Result<CortexHippocampusModel> {
    let m = &cfg.mtl;
    let total = m.dim_a + m.dim_b;
    let (faces, names) = development_books(cfg, seed, cell.cortex_faces)?;
    let cortex = |books: Vec<TemplateBook>, tag: u64| -> Result<HwLayer> {
        LayerSpec {
            kind: if m.cortex_rank.is_some() { BackendKind::Svd } else { BackendKind::Exact },
            dim: total,
            rank: m.cortex_rank.unwrap_or(1),
            backend: &cfg.backend,
            wta: None,
            similarity: cfg.similarity,
            pooling: cfg.pooling,
            seed: derive_seed(seed, &[tag]),
        }
        .from_books(books)
    };
    let cortex1 = cortex(faces, 0xC1)?;
    let cortex2 = cortex(names, 0xC2)?;
    let width = cortex1.module_count() + cortex2.module_count();
    let hippocampus = LayerSpec {
        kind: m.backend,
        dim: width,
        rank: cfg.backend.rank,
        backend: &cfg.backend,
        wta: Some(cell.wta_params(cfg)),
        similarity: cfg.similarity,
        pooling: cfg.pooling,
        seed: derive_seed(seed, &[3]),
    }
    .empty()?;
    Ok(CortexHippocampusModel::new(cortex1, Some(cortex2), hippocampus)?)
}

/// Studies the first `n` individuals, one episode (and module) each.
pub fn study(model: &mut CortexHippocampusModel, data: &AssociationDataset, n: usize) -> Result<()> {
    let episodes: Vec<Episode> = data.individuals[..n]
        .iter()
        .enumerate()
        .map(|(module, ind)| Episode {
            module,
            items: ind.study.clone(),
        })
        .collect();
    Ok(model.study(&episodes)?)
}

/// Recall@1 for each probe set over the first `n` individuals, in
/// [`METRICS`] order.
pub fn evaluate(model: &CortexHippocampusModel, data: &AssociationDataset, n: usize) -> Result<[f64; 4]> {
    let mut hits = [0usize; 4];
    let mut totals = [0usize; 4];
    for (p, ind) in data.individuals[..n].iter().enumerate() {
        let mut score = |slot: usize, probe: &FeatureVector| -> Result<()> {
            totals[slot] += 1;
            hits[slot] += (model.recall(probe)? == p) as usize;
            Ok(())
        };
        for x in &ind.study {
            score(0, x)?;
        }
        for x in &ind.heldout {
            score(1, x)?;
            score(2, &data.face_only(x)?)?;
            score(3, &data.name_only(x)?)?;
        }
    }
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = if totals[i] == 0 { 0.0 } else { hits[i] as f64 / totals[i] as f64 };
    }
    Ok(out)
}

/// Records of one repetition for every cell and study size.
pub fn run_rep(cfg: &ExperimentConfig, rep: usize, seed: u64) -> Result<Vec<ResultRecord>> {
    let data = association(cfg, seed)?;
    let mut out = Vec::new();
    for cell in cells(cfg) {
        let base = build_model(cfg, seed, cell)?;
        let params = cell.params(cfg);
        for &n in &cfg.mtl.study_sizes {
            let mut model = base.clone();
            study(&mut model, &data, n)?;
            let values = evaluate(&model, &data, n)?;
            for (metric, value) in METRICS.iter().zip(values) {
                if cfg.mtl.heldout_views == 0 && *metric != "recall_studied" {
                    continue;
                }
                out.push(
                    ResultRecord::new(NAME, metric, value, Some(rep), seed)
                        .with_params(&params)
                        .param("study_size", n),
                );
            }
        }
    }
    Ok(out)
}

/// Trend rows per (cell, metric): Kendall's tau-b of recall against study
/// size over all repetitions, its one-sided p-value for a decline, and
/// whether the per-size medians never increase.
pub fn trend_records(cfg: &ExperimentConfig, records: &[ResultRecord]) -> Vec<ResultRecord> {
    let mut out = Vec::new();
    for cell in cells(cfg) {
        let params = cell.params(cfg);
        for metric in METRICS {
            let rows: Vec<&ResultRecord> = records
                .iter()
                .filter(|r| r.rep.is_some() && r.metric == metric)
                .filter(|r| params.iter().all(|(k, v)| r.params.get(k) == Some(v)))
                .collect();
            if rows.is_empty() {
                continue;
            }
            let size = |r: &ResultRecord| r.params["study_size"].parse::<f64>().unwrap_or(f64::NAN);
            let xs: Vec<f64> = rows.iter().map(|r| size(r)).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.value).collect();
            let medians: Vec<f64> = cfg
                .mtl
                .study_sizes
                .iter()
                .filter_map(|&n| {
                    let v: Vec<f64> = rows.iter().filter(|r| size(r) == n as f64).map(|r| r.value).collect();
                    percentile(&v, 50.0)
                })
                .collect();
            let nonincreasing = medians.windows(2).all(|w| w[1] <= w[0]);
            let row = |name: String, value: f64| {
                ResultRecord::new(NAME, &name, value, None, cfg.seed).with_params(&params)
            };
            out.push(row(format!("{metric}_medians_nonincreasing"), nonincreasing as u8 as f64));
            if let Some(k) = kendall(&xs, &ys) {
                out.push(row(format!("{metric}_kendall_tau"), k.tau_b));
                out.push(row(format!("{metric}_kendall_p_decreasing"), k.p_decreasing));
            }
        }
    }
    out
}

/// Per-repetition rows (repetition-major), then summaries, then trend rows.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate_mtl()?;
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(cfg, rep, rep_seed(cfg, rep)))
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ResultRecord> = per_rep.into_iter().flatten().collect();
    let summary = summarize(&records, cfg.seed);
    let trends = trend_records(cfg, &records);
    records.extend(summary);
    records.extend(trends);
    Ok(records)
}
