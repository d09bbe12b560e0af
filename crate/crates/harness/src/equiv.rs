//! Approximate backends against exact modules on shared random instances.

use hwarch_core::rng::{derive_seed, gaussian_vec, stream};
use hwarch_core::synth::oracle_exact_query;
use hwarch_core::{
    exact_query, AugmentPolicy, BackendKind, FeatureVector, LshModules, ProjectionSharing, RpModules,
    SvdModule, TemplateBook, WtaHashFamily,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, WtaParams};
use crate::error::Result;
use crate::records::ResultRecord;

pub const NAME: &str = "equiv";

/// Slack allowed above the exact response before an LSH answer counts as a
/// one-sided violation.
pub const ONE_SIDED_SLACK: f64 = 1e-12;

/// One random instance: a template book, query vectors and the exact answers.
struct Instance {
    book: TemplateBook,
    queries: Vec<FeatureVector>,
    exact: Vec<f64>,
    seed: u64,
}

fn instance(cfg: &ExperimentConfig, dim: usize, i: usize) -> Result<Instance> {
    let e = &cfg.equiv;
    let seed = derive_seed(cfg.seed, &[dim as u64, i as u64]);
    let mut r = stream(seed, &[]);
    let templates = (0..e.templates)
        .map(|_| FeatureVector::new(gaussian_vec(&mut r, dim)))
        .collect::<hwarch_core::Result<Vec<_>>>()?;
    let book = TemplateBook::from_templates(0, dim, &templates)?;
    let queries = (0..e.queries)
        .map(|_| FeatureVector::new(gaussian_vec(&mut r, dim)))
        .collect::<hwarch_core::Result<Vec<_>>>()?;
    let exact = queries
        .iter()
        .map(|x| exact_query(&book, x, cfg.similarity, cfg.pooling))
        .collect::<hwarch_core::Result<Vec<_>>>()?;
    Ok(Instance {
        book,
        queries,
        exact,
        seed,
    })
}

/// Deviation statistics of one grid row, accumulated over instances.
#[derive(Default)]
struct Deviation {
    max_abs: f64,
    sum_abs: f64,
    max_excess: f64,
    agree: usize,
    violations: usize,
    count: usize,
}

impl Deviation {
    fn add(&mut self, approx: f64, exact: f64) {
        let diff = approx - exact;
        self.max_abs = self.max_abs.max(diff.abs());
        self.sum_abs += diff.abs();
        self.max_excess = if self.count == 0 { diff } else { self.max_excess.max(diff) };
        self.agree += (diff.abs() <= ONE_SIDED_SLACK) as usize;
        self.violations += (diff > ONE_SIDED_SLACK) as usize;
        self.count += 1;
    }

    fn records(&self, cfg: &ExperimentConfig, backend: BackendKind, params: &[(&str, String)]) -> Vec<ResultRecord> {
        let row = |metric: &str, value: f64| {
            let mut r = ResultRecord::new(NAME, metric, value, None, cfg.seed).param("backend", backend.name());
            for (k, v) in params {
                r = r.param(k, v);
            }
            r
        };
        let mut out = vec![
            row("max_abs_deviation", self.max_abs),
            row("mean_abs_deviation", self.sum_abs / self.count.max(1) as f64),
        ];
        if backend == BackendKind::Wta {
            out.push(row("max_excess", self.max_excess));
            out.push(row("agreement_rate", self.agree as f64 / self.count.max(1) as f64));
            out.push(row("one_sided_violations", self.violations as f64));
        }
        out
    }
}

fn fraction_of(f: f64, whole: usize) -> usize {
    ((f * whole as f64).round() as usize).clamp(1, whole)
}

fn rows_for_dim(cfg: &ExperimentConfig, dim: usize, filter: Option<BackendKind>) -> Result<Vec<ResultRecord>> {
    let e = &cfg.equiv;
    let (f, p) = (cfg.similarity, cfg.pooling);
    let instances = (0..e.instances)
        .map(|i| instance(cfg, dim, i))
        .collect::<Result<Vec<_>>>()?;
    let wants = |k: BackendKind| filter.is_none_or(|want| want == k);
    let dim_param = ("dim", dim.to_string());
    let mut out = Vec::new();

    if wants(BackendKind::Exact) {
        // The module path against the loop-based reference.
        let mut dev = Deviation::default();
        for inst in &instances {
            for (x, &want) in inst.queries.iter().zip(&inst.exact) {
                dev.add(want, oracle_exact_query(&inst.book, x, f, p)?);
            }
        }
        out.extend(dev.records(cfg, BackendKind::Exact, std::slice::from_ref(&dim_param)));
    }
    if wants(BackendKind::Svd) {
        let full = e.templates.min(dim);
        for &frac in &e.rank_fractions {
            let rank = fraction_of(frac, full);
            let mut dev = Deviation::default();
            for inst in &instances {
                let m = SvdModule::from_book(inst.book.clone(), rank)?;
                for (x, &want) in inst.queries.iter().zip(&inst.exact) {
                    dev.add(m.query(x, f, p)?, want);
                }
            }
            let params = [dim_param.clone(), ("rank", rank.to_string()), ("full_rank", (rank == full).to_string())];
            out.extend(dev.records(cfg, BackendKind::Svd, &params));
        }
    }
    if wants(BackendKind::Rp) {
        for &frac in &e.s_fractions {
            let s = fraction_of(frac, dim);
            let mut dev = Deviation::default();
            for inst in &instances {
                let mut m = RpModules::new(dim, s, derive_seed(inst.seed, &[0x52]), ProjectionSharing::Shared, AugmentPolicy::Never)?;
                m.push_module()?;
                for t in inst.book.iter() {
                    m.insert(0, &FeatureVector::new(t.to_vec())?)?;
                }
                for (x, &want) in inst.queries.iter().zip(&inst.exact) {
                    dev.add(m.query(0, x, f, p)?, want);
                }
            }
            let params = [dim_param.clone(), ("s", s.to_string())];
            out.extend(dev.records(cfg, BackendKind::Rp, &params));
        }
    }
    if wants(BackendKind::Wta) {
        for &WtaParams { k_wta, w, l } in &e.wta_grid {
            let mut dev = Deviation::default();
            for inst in &instances {
                let family = WtaHashFamily::new(dim, l, w, k_wta, derive_seed(inst.seed, &[0x57]))?;
                let mut m = LshModules::new(family);
                m.push_module()?;
                for t in inst.book.iter() {
                    m.insert(0, &FeatureVector::new(t.to_vec())?)?;
                }
                for (x, &want) in inst.queries.iter().zip(&inst.exact) {
                    dev.add(m.query(0, x, f, p)?, want);
                }
            }
            let params = [
                dim_param.clone(),
                ("k_wta", k_wta.to_string()),
                ("w", w.to_string()),
                ("l", l.to_string()),
            ];
            out.extend(dev.records(cfg, BackendKind::Wta, &params));
        }
    }
    Ok(out)
}

/// Rows per backend and grid point, dimension-major. `filter` restricts the
/// output to one backend.
pub fn run(cfg: &ExperimentConfig, filter: Option<BackendKind>) -> Result<Vec<ResultRecord>> {
    cfg.validate_equiv()?;
    let per_dim = cfg
        .equiv
        .dims
        .par_iter()
        .map(|&d| rows_for_dim(cfg, d, filter))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_dim.into_iter().flatten().collect())
}
