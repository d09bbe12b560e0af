//! Same-different matching of unfamiliar identities with a cortex-1 signature.

use hwarch_core::memory::accuracy;
use hwarch_core::rng::{derive_seed, stream};
use hwarch_core::synth::{generate_identity_dataset, IdentityDataset, IdentityParams, IdentityVideo};
use hwarch_core::vector::cosine;
use hwarch_core::{
    calibrate_threshold, oja_train, BackendKind, FeatureVector, HwLayer, LearningRate, ScoredPair,
    SvdModule, TemplateBook,
};
use rand::Rng;
use rayon::prelude::*;

use crate::build::LayerSpec;
use crate::config::{CortexLearning, ExperimentConfig};
use crate::error::Result;
use crate::records::{summarize, ResultRecord};

pub const NAME: &str = "ventral";

/// Seed of repetition `rep`.
pub fn rep_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    derive_seed(cfg.seed, &[rep as u64])
}

pub fn dataset(cfg: &ExperimentConfig, seed: u64) -> Result<IdentityDataset> {
    let v = &cfg.ventral;
    Ok(generate_identity_dataset(IdentityParams {
        n_train: v.n_train,
        n_test: v.n_test,
        dim: v.dim,
        orbit_subset: v.orbit_subset,
        noise: v.noise,
        seed,
    })?)
}

/// Cortex-1: one module per training identity, built from its video.
pub fn train_cortex(cfg: &ExperimentConfig, data: &IdentityDataset, seed: u64) -> Result<HwLayer> {
    let v = &cfg.ventral;
    let books = data
        .train
        .iter()
        .enumerate()
        .map(|(k, video)| TemplateBook::from_templates(k, v.dim, &video.frames))
        .collect::<hwarch_core::Result<Vec<_>>>()?;
    let spec = LayerSpec {
        kind: v.backend,
        dim: v.dim,
        rank: cfg.backend.rank,
        backend: &cfg.backend,
        wta: None,
        similarity: cfg.similarity,
        pooling: cfg.pooling,
        seed: derive_seed(seed, &[0xC1]),
    };
    if v.backend == BackendKind::Svd && v.learning == CortexLearning::Oja {
        let mut layer = spec.empty()?;
        let rank = cfg.backend.rank.min(v.dim);
        for (k, book) in books.into_iter().enumerate() {
            let frames = &data.train[k].frames;
            let basis = oja_train(frames, rank, v.oja_epochs, LearningRate::default(), derive_seed(seed, &[0x0A, k as u64]))?;
            layer.push_svd(SvdModule::with_basis(book, basis)?)?;
        }
        return Ok(layer);
    }
    spec.from_books(books)
}

/// A pair of views and the identities they show.
struct Pair {
    a: (usize, FeatureVector),
    b: (usize, FeatureVector),
}

/// `per_identity` same pairs and as many different pairs for each identity
/// in `videos`; views get fresh noise and uniformly random shifts.
fn make_pairs(data: &IdentityDataset, videos: &[IdentityVideo], per_identity: usize, tag: u64) -> Result<Vec<Pair>> {
    let dim = data.params.dim;
    let n = videos.len();
    let mut r = stream(data.params.seed, &[0xFA, tag]);
    let mut pairs = Vec::with_capacity(2 * n * per_identity);
    let mut counter = 0u64;
    let mut view = |id: usize, j: usize| -> Result<(usize, FeatureVector)> {
        counter += 1;
        Ok((id, data.view(&videos[id].base, j, &[0xF0, tag, counter])?))
    };
    for i in 0..n {
        for _ in 0..per_identity {
            let a = view(i, r.random_range(0..dim))?;
            let b = view(i, r.random_range(0..dim))?;
            pairs.push(Pair { a, b });
            let other = (i + r.random_range(1..n)) % n;
            let a = view(i, r.random_range(0..dim))?;
            let b = view(other, r.random_range(0..dim))?;
            pairs.push(Pair { a, b });
        }
    }
    Ok(pairs)
}

fn drop_entries(sig: &[f64], skip: &[usize]) -> Vec<f64> {
    sig.iter()
        .enumerate()
        .filter(|(k, _)| !skip.contains(k))
        .map(|(_, v)| *v)
        .collect()
}

/// Records of one repetition; everything is derived from `seed`.
pub fn run_rep(cfg: &ExperimentConfig, rep: usize, seed: u64) -> Result<Vec<ResultRecord>> {
    let data = dataset(cfg, seed)?;
    let cortex = train_cortex(cfg, &data, seed)?;
    let per = cfg.ventral.pairs_per_identity;
    let calib = make_pairs(&data, &data.train, per, 0)?;
    let test = make_pairs(&data, &data.test, per, 1)?;

    // Calibration pairs show familiar identities; leaving their own modules
    // out keeps them as unfamiliar to the cortex as the test identities.
    let score_hw = |pairs: &[Pair], familiar: bool| -> Result<Vec<ScoredPair>> {
        pairs
            .iter()
            .map(|p| {
                let s1 = cortex.signature(&p.a.1)?;
                let s2 = cortex.signature(&p.b.1)?;
                let score = if familiar {
                    let skip = [p.a.0, p.b.0];
                    cosine(&drop_entries(&s1, &skip), &drop_entries(&s2, &skip))?
                } else {
                    cosine(&s1, &s2)?
                };
                Ok(ScoredPair { score, same: p.a.0 == p.b.0 })
            })
            .collect()
    };
    let score_raw = |pairs: &[Pair]| -> Result<Vec<ScoredPair>> {
        pairs
            .iter()
            .map(|p| {
                Ok(ScoredPair {
                    score: cosine(&p.a.1, &p.b.1)?,
                    same: p.a.0 == p.b.0,
                })
            })
            .collect()
    };

    let hw_calib = score_hw(&calib, true)?;
    let hw_theta = calibrate_threshold(&hw_calib)?;
    let hw_acc = accuracy(&score_hw(&test, false)?, hw_theta);
    let raw_calib = score_raw(&calib)?;
    let raw_theta = calibrate_threshold(&raw_calib)?;
    let raw_acc = accuracy(&score_raw(&test)?, raw_theta);

    let row = |metric: &str, value: f64| ResultRecord::new(NAME, metric, value, Some(rep), seed).with_params(&params(cfg));
    Ok(vec![
        row("hw_accuracy", hw_acc),
        row("baseline_accuracy", raw_acc),
        row("hw_minus_baseline", hw_acc - raw_acc),
        row("hw_train_accuracy", accuracy(&hw_calib, hw_theta)),
        row("hw_threshold", hw_theta),
        row("baseline_threshold", raw_theta),
    ])
}

fn params(cfg: &ExperimentConfig) -> std::collections::BTreeMap<String, String> {
    let v = &cfg.ventral;
    let mut p = std::collections::BTreeMap::new();
    p.insert("backend".into(), v.backend.name().into());
    if v.backend == BackendKind::Svd {
        p.insert("rank".into(), cfg.backend.rank.to_string());
        p.insert("learning".into(), format!("{:?}", v.learning).to_lowercase());
    }
    p.insert("noise".into(), v.noise.to_string());
    p.insert("dim".into(), v.dim.to_string());
    p
}

/// Every repetition's rows in repetition order, then the summary rows.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate_ventral()?;
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(cfg, rep, rep_seed(cfg, rep)))
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ResultRecord> = per_rep.into_iter().flatten().collect();
    let summary = summarize(&records, cfg.seed);
    records.extend(summary);
    Ok(records)
}
