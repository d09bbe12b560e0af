//! The exact (nearest-neighbor) HW-module and signature classification.

use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::book::TemplateBook;
use crate::error::{Error, Result};
use crate::vector::{check_dim, dot, logistic, FeatureVector, Pooling, Similarity};

/// Appends `normalize(t)` to the book.
pub fn exact_insert(book: &mut TemplateBook, t: &FeatureVector) -> Result<()> {
    book.insert(t)
}

/// `P({ f(x, t) : t in book })`.
pub fn exact_query(
    book: &TemplateBook,
    x: &FeatureVector,
    f: Similarity,
    pooling: Pooling,
) -> Result<f64> {
    check_dim(book.dim(), x.dim())?;
    if book.is_empty() {
        return Err(Error::EmptyModule);
    }
    let x_norm = x.norm();
    if x_norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let responses = book.iter().map(|t| {
        let d = dot(x, t);
        match f {
            Similarity::NormalizedDot => d / x_norm,
            Similarity::SigmoidDot { gain } => logistic(gain * d),
        }
    });
    Ok(pooling.pool(responses).expect("book is non-empty"))
}

/// Vector of per-module responses produced by one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature(Vec<f64>);

impl Signature {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Reinterprets the signature as the input of the next layer.
    pub fn to_feature_vector(&self) -> Result<FeatureVector> {
        FeatureVector::new(self.0.clone())
    }
}

impl Deref for Signature {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn classify(sig: &[f64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in sig.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::EmptySignature)
}

/// An exact HW-module: the template book itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactModule {
    book: TemplateBook,
}

impl ExactModule {
    pub fn new(id: usize, dim: usize) -> Result<Self> {
        Ok(Self {
            book: TemplateBook::new(id, dim)?,
        })
    }

    pub fn from_book(book: TemplateBook) -> Self {
        Self { book }
    }

    pub fn book(&self) -> &TemplateBook {
        &self.book
    }

    pub fn insert(&mut self, t: &FeatureVector) -> Result<()> {
        exact_insert(&mut self.book, t)
    }

    pub fn query(&self, x: &FeatureVector, f: Similarity, pooling: Pooling) -> Result<f64> {
        exact_query(&self.book, x, f, pooling)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    fn e1e2() -> TemplateBook {
        TemplateBook::from_templates(0, 2, &[fv(&[1.0, 0.0]), fv(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn query_examples() {
        let book = e1e2();
        let nd = Similarity::NormalizedDot;
        assert_eq!(
            exact_query(&book, &fv(&[1.0, 0.0]), nd, Pooling::Max).unwrap(),
            1.0
        );
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let s = exact_query(&book, &fv(&[h, h]), nd, Pooling::Sum).unwrap();
        assert!((s - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn query_errors() {
        let empty = TemplateBook::new(0, 2).unwrap();
        let nd = Similarity::NormalizedDot;
        assert_eq!(
            exact_query(&empty, &fv(&[1.0, 0.0]), nd, Pooling::Max),
            Err(Error::EmptyModule)
        );
        assert_eq!(
            exact_query(&e1e2(), &fv(&[0.0, 0.0]), nd, Pooling::Max),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[0.1, 0.9, 0.3]), Ok(1));
        assert_eq!(classify(&[0.5, 0.5]), Ok(0));
        assert_eq!(classify(&[]), Err(Error::EmptySignature));
        assert_eq!(classify(&[-1.0, -1.0, -0.5]), Ok(2));
    }

    #[test]
    fn insert_appends_in_order() {
        let mut m = ExactModule::new(1, 2).unwrap();
        m.insert(&fv(&[0.0, 2.0])).unwrap();
        m.insert(&fv(&[3.0, 0.0])).unwrap();
        assert_eq!(m.book().template(0).unwrap(), &[0.0, 1.0]);
        assert_eq!(m.book().template(1).unwrap(), &[1.0, 0.0]);
        let sig = Signature::new(vec![0.2, 0.4]);
        assert_eq!(classify(&sig), Ok(1));
    }
}
