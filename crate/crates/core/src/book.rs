use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::vector::{check_dim, normalize, FeatureVector};

/// An ordered multiset of unit-norm templates sharing one dimension.
///
/// Rows are stored contiguously, so the book doubles as the template matrix
/// with one template per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateBook {
    id: usize,
    dim: usize,
    data: Vec<f64>,
}

impl TemplateBook {
    pub fn new(id: usize, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(Self {
            id,
            dim,
            data: Vec::new(),
        })
    }

    /// Builds a book by inserting every template in order.
    pub fn from_templates<'a, I>(id: usize, dim: usize, templates: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let mut book = Self::new(id, dim)?;
        for t in templates {
            book.insert(t)?;
        }
        Ok(book)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Appends `t / ||t||`. Duplicates are kept.
    pub fn insert(&mut self, t: &FeatureVector) -> Result<()> {
        check_dim(self.dim, t.dim())?;
        let unit = normalize(t)?;
        self.data.extend_from_slice(&unit);
        Ok(())
    }

    pub fn template(&self, index: usize) -> Option<&[f64]> {
        let start = index.checked_mul(self.dim)?;
        self.data.get(start..start + self.dim)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Template matrix, one template per row.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_row_major(self.len(), self.dim, self.data.clone())
    }

    /// Rebuilds a book from stored rows without renormalizing them.
    ///
    /// Used when restoring persisted state, where bit-exact rows matter more
    /// than re-deriving them.
    pub fn from_raw_rows(id: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { id, dim, data })
    }
}
