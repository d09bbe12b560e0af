//! Random-projection HW-modules.
//!
//! Templates are stored as `T R`, where `R` is a `d x s` matrix with
//! orthonormal Gaussian-drawn columns. A query pools the rows of
//! `T R R^T x / ||x||`. When the number of stored items approaches the
//! Johnson-Lindenstrauss bound for the current `s`, the projection can be
//! widened by one fresh column orthogonal to the others; every module that
//! shares the projection back-fills that column from its raw templates.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::book::TemplateBook;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use crate::vector::{check_dim, dot, norm, FeatureVector, Pooling, Similarity};

/// Constant in the dimension bound `C ln(n) / eps^2`.
pub const JL_CONSTANT: f64 = 8.0;
pub const DEFAULT_JL_EPS: f64 = 0.25;

/// Smallest projection dimension the bound deems safe for `n` items.
pub fn jl_required_dim(n: usize, eps: f64, c: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEps(eps));
    }
    let n = n.max(2) as f64;
    Ok(libm::ceil(c * libm::log(n) / (eps * eps)) as usize)
}

/// `true` when augmenting the projection is advised, i.e. `s` is below the
/// bound for `n` stored items at distortion `eps`.
pub fn jl_bound_check(n: usize, s: usize, eps: f64) -> Result<bool> {
    Ok(s < jl_required_dim(n, eps, JL_CONSTANT)?)
}

/// A `d x s` projection with orthonormal columns, grown one column at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpProjection {
    dim: usize,
    seed: u64,
    /// Number of random directions drawn so far, including rejected ones.
    draws: u64,
    columns: Vec<Vec<f64>>,
}

impl RpProjection {
    pub fn new(dim: usize, s: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if s == 0 || s > dim {
            return Err(invalid("s", "must lie in 1..=dim"));
        }
        let mut p = Self {
            dim,
            seed,
            draws: 0,
            columns: Vec::with_capacity(s),
        };
        for _ in 0..s {
            p.orthogonal_extend()?;
        }
        Ok(p)
    }

    /// Restores a persisted projection without redrawing it.
    pub fn from_parts(dim: usize, seed: u64, draws: u64, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() > dim {
            return Err(invalid("columns", "more columns than dimensions"));
        }
        for c in &columns {
            check_dim(dim, c.len())?;
        }
        Ok(Self {
            dim,
            seed,
            draws,
            columns,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> usize {
        self.columns.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(self.dim, &self.columns)
    }

    /// `R^T v`
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| dot(c, v)).collect()
    }

    /// Appends one random unit column orthogonal to the existing ones.
    pub fn orthogonal_extend(&mut self) -> Result<()> {
        if self.s() >= self.dim {
            return Err(Error::DimensionExhausted(self.dim));
        }
        loop {
            let mut r = rng::stream(self.seed, &[self.draws]);
            self.draws += 1;
            let mut c = rng::gaussian_vec(&mut r, self.dim);
            let original = norm(&c);
            for _ in 0..2 {
                for q in &self.columns {
                    let p = dot(q, &c);
                    for (ci, qi) in c.iter_mut().zip(q) {
                        *ci -= p * qi;
                    }
                }
            }
            let n = norm(&c);
            if n > 1e-6 * original {
                c.iter_mut().for_each(|v| *v /= n);
                self.columns.push(c);
                return Ok(());
            }
        }
    }
}

/// When an insertion should widen the projection first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentPolicy {
    #[default]
    Never,
    Always,
    /// Augment while `s` is below the bound for the items stored under the projection.
    JlBound { eps: f64, c: f64 },
}

impl AugmentPolicy {
    pub fn jl(eps: f64) -> Self {
        AugmentPolicy::JlBound {
            eps,
            c: JL_CONSTANT,
        }
    }

    pub fn fires(&self, stored: usize, s: usize) -> Result<bool> {
        match *self {
            AugmentPolicy::Never => Ok(false),
            AugmentPolicy::Always => Ok(true),
            AugmentPolicy::JlBound { eps, c } => Ok(s < jl_required_dim(stored, eps, c)?),
        }
    }
}

/// Cost accounting for one insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InsertReport {
    pub augmented: bool,
    /// Multiply-adds spent projecting and back-filling.
    pub multiply_adds: usize,
}

/// One random-projection module: raw templates plus their projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpModule {
    raw: TemplateBook,
    projected: Vec<Vec<f64>>,
}

impl RpModule {
    pub fn new(id: usize, dim: usize) -> Result<Self> {
        Ok(Self {
            raw: TemplateBook::new(id, dim)?,
            projected: Vec::new(),
        })
    }

    pub fn from_parts(raw: TemplateBook, projected: Vec<Vec<f64>>) -> Result<Self> {
        if raw.len() != projected.len() {
            return Err(invalid("projected", "row count differs from raw templates"));
        }
        Ok(Self { raw, projected })
    }

    pub fn raw(&self) -> &TemplateBook {
        &self.raw
    }

    pub fn projected(&self) -> &[Vec<f64>] {
        &self.projected
    }

    pub fn len(&self) -> usize {
        self.projected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projected.is_empty()
    }

    /// Appends `normalize(t)` and its projection. Touches one new row only.
    pub fn insert(&mut self, projection: &RpProjection, t: &FeatureVector) -> Result<usize> {
        check_dim(projection.dim(), self.raw.dim())?;
        self.raw.insert(t)?;
        let row = projection.project(self.raw.template(self.raw.len() - 1).expect("just inserted"));
        self.projected.push(row);
        Ok(projection.dim() * projection.s())
    }

    /// Appends one projection column computed from the raw templates.
    fn backfill(&mut self, column: &[f64]) -> usize {
        for (row, t) in self.projected.iter_mut().zip(self.raw.iter()) {
            row.push(dot(t, column));
        }
        self.raw.len() * column.len()
    }

    pub fn query(
        &self,
        projection: &RpProjection,
        x: &FeatureVector,
        f: Similarity,
        pooling: Pooling,
    ) -> Result<f64> {
        check_dim(self.raw.dim(), x.dim())?;
        if self.is_empty() {
            return Err(Error::EmptyModule);
        }
        let x_norm = x.norm();
        if x_norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut z = projection.project(x);
        z.iter_mut().for_each(|v| *v /= x_norm);
        let responses = self.projected.iter().map(|row| f.from_cosine(dot(row, &z), x_norm));
        Ok(pooling.pool(responses).expect("module is non-empty"))
    }
}

/// Whether a layer's modules share one projection or own one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionSharing {
    #[default]
    Shared,
    PerModule,
}

/// The random-projection modules of one layer with their projection(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpModules {
    dim: usize,
    initial_s: usize,
    seed: u64,
    sharing: ProjectionSharing,
    policy: AugmentPolicy,
    projections: Vec<RpProjection>,
    modules: Vec<RpModule>,
}

impl RpModules {
    pub fn new(
        dim: usize,
        s: usize,
        seed: u64,
        sharing: ProjectionSharing,
        policy: AugmentPolicy,
    ) -> Result<Self> {
        if let AugmentPolicy::JlBound { eps, .. } = policy {
            jl_required_dim(2, eps, JL_CONSTANT)?;
        }
        let projections = match sharing {
            ProjectionSharing::Shared => alloc::vec![RpProjection::new(dim, s, seed)?],
            ProjectionSharing::PerModule => {
                RpProjection::new(dim, s, seed)?;
                Vec::new()
            }
        };
        Ok(Self {
            dim,
            initial_s: s,
            seed,
            sharing,
            policy,
            projections,
            modules: Vec::new(),
        })
    }

    pub fn from_parts(
        dim: usize,
        initial_s: usize,
        seed: u64,
        sharing: ProjectionSharing,
        policy: AugmentPolicy,
        projections: Vec<RpProjection>,
        modules: Vec<RpModule>,
    ) -> Result<Self> {
        let expected = match sharing {
            ProjectionSharing::Shared => 1,
            ProjectionSharing::PerModule => modules.len(),
        };
        if projections.len() != expected {
            return Err(invalid("projections", "count does not match sharing mode"));
        }
        let out = Self {
            dim,
            initial_s,
            seed,
            sharing,
            policy,
            projections,
            modules,
        };
        for (k, m) in out.modules.iter().enumerate() {
            if m.projected.iter().any(|r| r.len() != out.projection(k).s()) {
                return Err(invalid("projected", "row width differs from projection"));
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial_s(&self) -> usize {
        self.initial_s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sharing(&self) -> ProjectionSharing {
        self.sharing
    }

    pub fn policy(&self) -> AugmentPolicy {
        self.policy
    }

    pub fn projections(&self) -> &[RpProjection] {
        &self.projections
    }

    pub fn modules(&self) -> &[RpModule] {
        &self.modules
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    fn projection_index(&self, module: usize) -> usize {
        match self.sharing {
            ProjectionSharing::Shared => 0,
            ProjectionSharing::PerModule => module,
        }
    }

    pub fn projection(&self, module: usize) -> &RpProjection {
        &self.projections[self.projection_index(module)]
    }

    /// Adds an empty module and returns its index.
    pub fn push_module(&mut self) -> Result<usize> {
        let k = self.modules.len();
        if self.sharing == ProjectionSharing::PerModule {
            let seed = rng::derive_seed(self.seed, &[k as u64]);
            self.projections
                .push(RpProjection::new(self.dim, self.initial_s, seed)?);
        }
        self.modules.push(RpModule::new(k, self.dim)?);
        Ok(k)
    }

    fn sharers(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.modules.len()).filter(move |&k| self.projection_index(k) == p)
    }

    /// Inserts into module `k`, widening its projection first if the policy fires.
    pub fn insert(&mut self, k: usize, t: &FeatureVector) -> Result<InsertReport> {
        if k >= self.modules.len() {
            return Err(Error::UnknownModule(k));
        }
        check_dim(self.dim, t.dim())?;
        if t.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        let p = self.projection_index(k);
        let stored: usize = self.sharers(p).map(|j| self.modules[j].len()).sum::<usize>() + 1;
        let mut report = InsertReport::default();
        if self.policy.fires(stored, self.projections[p].s())? {
            self.projections[p].orthogonal_extend()?;
            report.augmented = true;
            report.multiply_adds += self.dim * self.projections[p].s();
            let column = self.projections[p].columns.last().expect("just extended").clone();
            let sharers: Vec<usize> = self.sharers(p).collect();
            for j in sharers {
                report.multiply_adds += self.modules[j].backfill(&column);
            }
        }
        report.multiply_adds += self.modules[k].insert(&self.projections[p], t)?;
        Ok(report)
    }

    pub fn query(&self, k: usize, x: &FeatureVector, f: Similarity, pooling: Pooling) -> Result<f64> {
        let m = self.modules.get(k).ok_or(Error::UnknownModule(k))?;
        m.query(self.projection(k), x, f, pooling)
    }
}
