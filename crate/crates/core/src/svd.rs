//! Rank-r SVD approximation of an HW-module, and Oja / Sanger online PCA.
//!
//! A module stores `projected = T V` (one row per template, `r` columns) and
//! the basis `V`. A query computes `y = V^T x / ||x||` and pools `projected y`,
//! i.e. the rows of `T V V^T x / ||x||`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::book::TemplateBook;
use crate::error::{invalid, Error, Result};
use crate::linalg::{orthonormalize, thin_svd_top, Matrix};
use crate::rng;
use crate::vector::{check_dim, dot, norm, FeatureVector, Pooling, Similarity};

/// Flips each column so that its first entry above `1e-12` in magnitude is positive.
pub fn canonicalize_signs(basis: &mut Matrix) {
    for j in 0..basis.cols() {
        let first = (0..basis.rows())
            .map(|i| basis.get(i, j))
            .find(|v| libm::fabs(*v) > 1e-12);
        if matches!(first, Some(v) if v < 0.0) {
            for i in 0..basis.rows() {
                let v = basis.get(i, j);
                basis.set(i, j, -v);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdModule {
    id: usize,
    dim: usize,
    rank: usize,
    basis: Matrix,
    projected: Matrix,
    singular_values: Vec<f64>,
    raw: Option<TemplateBook>,
}

impl SvdModule {
    /// An empty module that retains raw templates and targets rank `rank`.
    pub fn new(id: usize, dim: usize, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(invalid("rank", "must be at least 1"));
        }
        Ok(Self {
            id,
            dim,
            rank,
            basis: Matrix::zeros(dim, 0),
            projected: Matrix::zeros(0, 0),
            singular_values: Vec::new(),
            raw: Some(TemplateBook::new(id, dim)?),
        })
    }

    /// Best rank-`rank` approximation of an existing book (raw retained).
    pub fn from_book(book: TemplateBook, rank: usize) -> Result<Self> {
        let mut m = Self::new(book.id(), book.dim(), rank)?;
        m.raw = Some(book);
        m.refit();
        Ok(m)
    }

    /// Uses a basis learned elsewhere (e.g. by [`oja_train`]) instead of the SVD.
    pub fn with_basis(book: TemplateBook, basis: Matrix) -> Result<Self> {
        check_dim(book.dim(), basis.rows())?;
        if basis.cols() == 0 {
            return Err(invalid("basis", "needs at least one column"));
        }
        let projected = book.to_matrix().matmul(&basis);
        Ok(Self {
            id: book.id(),
            dim: book.dim(),
            rank: basis.cols(),
            basis,
            projected,
            singular_values: Vec::new(),
            raw: Some(book),
        })
    }

    /// Restores persisted state verbatim.
    pub fn from_parts(
        id: usize,
        rank: usize,
        basis: Matrix,
        projected: Matrix,
        singular_values: Vec<f64>,
        raw: Option<TemplateBook>,
    ) -> Result<Self> {
        if projected.rows() > 0 {
            check_dim(basis.cols(), projected.cols())?;
        }
        if let Some(book) = &raw {
            check_dim(basis.rows(), book.dim())?;
        }
        Ok(Self {
            id,
            dim: basis.rows(),
            rank,
            basis,
            projected,
            singular_values,
            raw,
        })
    }

    /// Drops the raw templates. Further `insert` calls fail with `RawUnavailable`.
    pub fn compress(mut self) -> Self {
        self.raw = None;
        self
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Requested rank.
    pub fn target_rank(&self) -> usize {
        self.rank
    }

    /// Number of basis columns actually held: `min(rank, n, d)` at most.
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn len(&self) -> usize {
        self.projected.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn projected(&self) -> &Matrix {
        &self.projected
    }

    pub fn raw(&self) -> Option<&TemplateBook> {
        self.raw.as_ref()
    }

    /// Singular values of the raw template matrix from the last refit.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Appends `normalize(t)` to the raw book and refits the rank-r factors.
    pub fn insert(&mut self, t: &FeatureVector) -> Result<()> {
        let raw = self.raw.as_mut().ok_or(Error::RawUnavailable)?;
        raw.insert(t)?;
        self.refit();
        Ok(())
    }

    fn refit(&mut self) {
        let raw = self.raw.as_ref().expect("refit needs raw templates");
        let t = raw.to_matrix();
        let svd = thin_svd_top(&t, self.rank);
        let mut basis = svd.v.leading_columns(self.rank);
        canonicalize_signs(&mut basis);
        self.projected = t.matmul(&basis);
        self.basis = basis;
        self.singular_values = svd.singular_values;
    }

    /// Pools the rows of `projected . V^T x / ||x||`.
    pub fn query(&self, x: &FeatureVector, f: Similarity, pooling: Pooling) -> Result<f64> {
        check_dim(self.dim, x.dim())?;
        if self.is_empty() {
            return Err(Error::EmptyModule);
        }
        let x_norm = x.norm();
        if x_norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut y = self.basis.t_mul_vec(x);
        y.iter_mut().for_each(|v| *v /= x_norm);
        let responses = (0..self.projected.rows())
            .map(|i| f.from_cosine(dot(self.projected.row(i), &y), x_norm));
        Ok(pooling.pool(responses).expect("module is non-empty"))
    }

    /// `||T - T V V^T||_F^2`, or `None` without raw templates.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let t = self.raw.as_ref()?.to_matrix();
        let approx = self.projected.matmul(&self.basis.transpose());
        Some(t.sub(&approx).frobenius_sq())
    }
}

/// `eta_t = initial / (1 + t / tau)`.
///
/// Single-sample updates are stable while `eta * ||x||^2` stays below about 1,
/// so scale inputs accordingly (unit-norm templates are fine with the default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRate {
    pub initial: f64,
    pub tau: f64,
}

impl Default for LearningRate {
    fn default() -> Self {
        Self {
            initial: 0.1,
            tau: 1000.0,
        }
    }
}

impl LearningRate {
    pub fn at(&self, step: u64) -> f64 {
        self.initial / (1.0 + step as f64 / self.tau)
    }
}

/// Online estimator of the top principal directions.
///
/// A single component follows Oja's rule `w += eta y (x - y w)`, `y = w . x`;
/// more components use Sanger's generalization, where component `j` sees the
/// input deflated by components `0..=j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OjaLearner {
    weights: Vec<Vec<f64>>,
    schedule: LearningRate,
    steps: u64,
}

impl OjaLearner {
    /// Random orthonormal initial weights.
    pub fn new(dim: usize, components: usize, schedule: LearningRate, seed: u64) -> Result<Self> {
        if components == 0 || components > dim {
            return Err(invalid("components", "must lie in 1..=dim"));
        }
        let mut r = rng::stream(seed, &[u64::MAX]);
        let mut weights = Vec::with_capacity(components);
        while weights.len() < components {
            let mut candidate = weights.clone();
            candidate.push(rng::unit_vec(&mut r, dim));
            weights = orthonormalize(candidate);
        }
        Ok(Self::from_weights(weights, schedule))
    }

    pub fn from_weights(weights: Vec<Vec<f64>>, schedule: LearningRate) -> Self {
        Self {
            weights,
            schedule,
            steps: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn update(&mut self, x: &FeatureVector) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        let eta = self.schedule.at(self.steps);
        let ys: Vec<f64> = self.weights.iter().map(|w| dot(w, x)).collect();
        let mut residual = x.to_vec();
        // residual_j = x - sum_{i <= j} y_i w_i, always with pre-update weights.
        for (w, &y) in self.weights.iter_mut().zip(&ys) {
            for (r, wi) in residual.iter_mut().zip(w.iter()) {
                *r -= y * wi;
            }
            for (wi, r) in w.iter_mut().zip(&residual) {
                *wi += eta * y * r;
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Orthonormalized, sign-canonical copy of the weights as a `d x r` matrix.
    pub fn basis(&self) -> Matrix {
        let cols = orthonormalize(self.weights.clone());
        let mut m = Matrix::from_columns(self.dim(), &cols);
        canonicalize_signs(&mut m);
        m
    }
}

/// Learns `components` principal directions by sequential deflation.
///
/// Component `c` runs single-component Oja updates for `epochs` passes over
/// the stream, each sample first deflated by components `0..c`. The result is
/// orthonormalized and sign-canonical.
pub fn oja_train(
    stream: &[FeatureVector],
    components: usize,
    epochs: usize,
    schedule: LearningRate,
    seed: u64,
) -> Result<Matrix> {
    let first = stream.first().ok_or(Error::EmptyStream)?;
    let dim = first.dim();
    if components == 0 || components > dim {
        return Err(invalid("components", "must lie in 1..=dim"));
    }
    if epochs == 0 {
        return Err(invalid("epochs", "must be at least 1"));
    }
    for x in stream {
        check_dim(dim, x.dim())?;
    }

    let mut learned: Vec<Vec<f64>> = Vec::with_capacity(components);
    let mut residual = alloc::vec![0.0; dim];
    for c in 0..components {
        let mut r = rng::stream(seed, &[c as u64]);
        let mut w = rng::unit_vec(&mut r, dim);
        // Start orthogonal to what was already learned.
        let mut start = orthonormalize(learned.iter().cloned().chain([w.clone()]).collect());
        if start.len() > c {
            w = start.swap_remove(c);
        }
        let mut step = 0u64;
        for _ in 0..epochs {
            for x in stream {
                residual.copy_from_slice(x);
                for q in &learned {
                    let p = dot(q, &residual);
                    for (ri, qi) in residual.iter_mut().zip(q) {
                        *ri -= p * qi;
                    }
                }
                let eta = schedule.at(step);
                let y = dot(&w, &residual);
                for (wi, ri) in w.iter_mut().zip(&residual) {
                    *wi += eta * y * (ri - y * *wi);
                }
                step += 1;
            }
        }
        let n = norm(&w);
        if n > 0.0 {
            w.iter_mut().for_each(|v| *v /= n);
        }
        learned.push(w);
    }
    let cols = orthonormalize(learned);
    let mut basis = Matrix::from_columns(dim, &cols);
    canonicalize_signs(&mut basis);
    Ok(basis)
}
