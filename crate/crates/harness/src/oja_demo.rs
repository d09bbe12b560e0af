//! Online principal directions (Oja / Sanger) against the batch SVD.

use hwarch_core::linalg::{orthonormalize, principal_angles, thin_svd_top, Matrix};
use hwarch_core::rng::{derive_seed, gaussian_vec, stream};
use hwarch_core::svd::canonicalize_signs;
use hwarch_core::vector::dot;
use hwarch_core::{oja_train, FeatureVector, LearningRate, OjaLearner};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::records::{summarize, ResultRecord};

pub const NAME: &str = "oja-demo";

/// Samples with the configured variances along a random orthonormal basis;
/// returns the samples and the true leading directions.
pub fn samples(cfg: &ExperimentConfig, seed: u64) -> Result<(Vec<FeatureVector>, Matrix)> {
    let o = &cfg.oja_demo;
    let mut r = stream(seed, &[0x0B]);
    let mut axes = Vec::with_capacity(o.dim);
    while axes.len() < o.dim {
        let mut cand = axes.clone();
        cand.push(gaussian_vec(&mut r, o.dim));
        axes = orthonormalize(cand);
    }
    let sd: Vec<f64> = (0..o.dim)
        .map(|i| o.leading_variances.get(i).copied().unwrap_or(o.tail_variance).sqrt())
        .collect();
    let xs = (0..o.samples)
        .map(|_| {
            let g = gaussian_vec(&mut r, o.dim);
            let mut x = vec![0.0; o.dim];
            for (axis, (gi, si)) in axes.iter().zip(g.iter().zip(&sd)) {
                for (xj, aj) in x.iter_mut().zip(axis) {
                    *xj += gi * si * aj;
                }
            }
            FeatureVector::new(x)
        })
        .collect::<hwarch_core::Result<Vec<_>>>()?;
    let truth = Matrix::from_columns(o.dim, &axes[..o.components]);
    Ok((xs, truth))
}

fn max_angle(a: &Matrix, b: &Matrix) -> f64 {
    principal_angles(a, b).into_iter().fold(0.0, f64::max)
}

pub fn run_rep(cfg: &ExperimentConfig, rep: usize, seed: u64) -> Result<Vec<ResultRecord>> {
    let o = &cfg.oja_demo;
    let (xs, truth) = samples(cfg, seed)?;
    let schedule = LearningRate {
        initial: o.eta0,
        tau: o.tau,
    };
    let oja = oja_train(&xs, o.components, o.epochs, schedule, derive_seed(seed, &[1]))?;

    let mut gha = OjaLearner::new(o.dim, o.components, schedule, derive_seed(seed, &[2]))?;
    for _ in 0..o.epochs {
        for x in &xs {
            gha.update(x)?;
        }
    }
    let gha = gha.basis();

    let data = Matrix::from_row_major(xs.len(), o.dim, xs.iter().flat_map(|x| x.iter().copied()).collect());
    let mut batch = thin_svd_top(&data, o.components).v;
    canonicalize_signs(&mut batch);

    let row = |metric: &str, value: f64| {
        ResultRecord::new(NAME, metric, value, Some(rep), seed)
            .param("dim", o.dim)
            .param("components", o.components)
            .param("epochs", o.epochs)
    };
    Ok(vec![
        row("oja_max_angle_vs_batch", max_angle(&oja, &batch)),
        row("oja_max_angle_vs_truth", max_angle(&oja, &truth)),
        row("oja_top_abs_cosine_vs_batch", dot(&oja.column(0), &batch.column(0)).abs()),
        row("gha_max_angle_vs_batch", max_angle(&gha, &batch)),
        row("batch_max_angle_vs_truth", max_angle(&batch, &truth)),
    ])
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate_oja()?;
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(cfg, rep, derive_seed(cfg.seed, &[rep as u64])))
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ResultRecord> = per_rep.into_iter().flatten().collect();
    let summary = summarize(&records, cfg.seed);
    records.extend(summary);
    Ok(records)
}
