//! Winner-take-all hashing and the LSH-approximated HW-module.
//!
//! Each of the `L` hash functions concatenates `W` band codes. A band permutes
//! the input, looks at the first `K` permuted coordinates and emits the
//! position of the largest one. Two vectors collide under hash `i` when all
//! `W` band codes agree; a query's candidate set is the union over the `L`
//! hashes of the stored templates it collides with.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::book::TemplateBook;
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::vector::{check_dim, dot, FeatureVector, Pooling, Similarity};

/// Response of a module whose candidate set is empty: the cosine floor.
pub const EMPTY_CANDIDATES: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WtaHashFamily {
    dim: usize,
    num_hashes: usize,
    bands: usize,
    window: usize,
    seed: u64,
    /// `num_hashes * bands` permutations of `0..dim`, hash-major.
    permutations: Vec<Vec<u32>>,
}

/// The `W` band codes of one hash function, each below the window size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashCode(pub Vec<u32>);

impl WtaHashFamily {
    /// `num_hashes` = L, `bands` = W, `window` = K.
    pub fn new(dim: usize, num_hashes: usize, bands: usize, window: usize, seed: u64) -> Result<Self> {
        if dim > u32::MAX as usize {
            return Err(invalid("dim", "too large for u32 permutation indices"));
        }
        if window < 2 || window > dim {
            return Err(invalid("window", "must satisfy 2 <= K <= dim"));
        }
        if num_hashes == 0 {
            return Err(invalid("num_hashes", "must be at least 1"));
        }
        if bands == 0 {
            return Err(invalid("bands", "must be at least 1"));
        }
        let permutations = (0..num_hashes)
            .flat_map(|i| (0..bands).map(move |b| (i, b)))
            .map(|(i, b)| {
                let mut r = rng::stream(seed, &[i as u64, b as u64]);
                let mut p: Vec<u32> = (0..dim as u32).collect();
                p.shuffle(&mut r);
                p
            })
            .collect();
        Ok(Self {
            dim,
            num_hashes,
            bands,
            window,
            seed,
            permutations,
        })
    }

    /// Rebuilds a family from stored permutations, validating each one.
    pub fn from_parts(
        dim: usize,
        num_hashes: usize,
        bands: usize,
        window: usize,
        seed: u64,
        permutations: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if window < 2 || window > dim {
            return Err(invalid("window", "must satisfy 2 <= K <= dim"));
        }
        if permutations.len() != num_hashes * bands {
            return Err(invalid("permutations", "count must equal L * W"));
        }
        let mut seen = alloc::vec![false; dim];
        for p in &permutations {
            check_dim(dim, p.len())?;
            seen.iter_mut().for_each(|s| *s = false);
            for &i in p {
                let slot = seen
                    .get_mut(i as usize)
                    .ok_or_else(|| invalid("permutations", "index out of range"))?;
                if *slot {
                    return Err(invalid("permutations", "repeated index"));
                }
                *slot = true;
            }
        }
        Ok(Self {
            dim,
            num_hashes,
            bands,
            window,
            seed,
            permutations,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_hashes(&self) -> usize {
        self.num_hashes
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self, hash: usize, band: usize) -> &[u32] {
        &self.permutations[hash * self.bands + band]
    }

    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.permutations
    }

    fn band_code(&self, perm: &[u32], x: &[f64]) -> u32 {
        let mut best = 0usize;
        let mut best_value = x[perm[0] as usize];
        for (pos, &i) in perm.iter().enumerate().take(self.window).skip(1) {
            let v = x[i as usize];
            if v > best_value {
                best = pos;
                best_value = v;
            }
        }
        best as u32
    }

    /// Hash function `i` applied to `x`.
    pub fn hash(&self, i: usize, x: &[f64]) -> Result<HashCode> {
        check_dim(self.dim, x.len())?;
        if i >= self.num_hashes {
            return Err(invalid("hash", "index must be below L"));
        }
        Ok(HashCode(
            (0..self.bands)
                .map(|b| self.band_code(self.permutation(i, b), x))
                .collect(),
        ))
    }

    /// All `L` hash codes, flattened hash-major (`L * W` entries).
    pub fn hash_all(&self, x: &[f64]) -> Result<Vec<u32>> {
        check_dim(self.dim, x.len())?;
        Ok(self
            .permutations
            .iter()
            .map(|p| self.band_code(p, x))
            .collect())
    }
}

/// An LSH-approximated HW-module: templates coupled with their hash tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LshModule {
    templates: TemplateBook,
    /// `L * W` codes per template, template-major.
    codes: Vec<u32>,
}

impl LshModule {
    pub fn new(id: usize, dim: usize) -> Result<Self> {
        Ok(Self {
            templates: TemplateBook::new(id, dim)?,
            codes: Vec::new(),
        })
    }

    /// Restores persisted state; codes must match recomputation exactly.
    pub fn from_parts(family: &WtaHashFamily, templates: TemplateBook, codes: Vec<u32>) -> Result<Self> {
        let m = Self { templates, codes };
        if !m.codes_consistent(family) {
            return Err(invalid("codes", "stored hashes differ from recomputation"));
        }
        Ok(m)
    }

    pub fn templates(&self) -> &TemplateBook {
        &self.templates
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    fn stride(family: &WtaHashFamily) -> usize {
        family.num_hashes * family.bands
    }

    /// The stored hash tuple of template `j`.
    pub fn stored_codes(&self, family: &WtaHashFamily, j: usize) -> &[u32] {
        let s = Self::stride(family);
        &self.codes[j * s..(j + 1) * s]
    }

    pub fn insert(&mut self, family: &WtaHashFamily, t: &FeatureVector) -> Result<()> {
        check_dim(family.dim(), self.templates.dim())?;
        self.templates.insert(t)?;
        let stored = self.templates.template(self.templates.len() - 1).expect("just inserted");
        let codes = family.hash_all(stored)?;
        self.codes.extend_from_slice(&codes);
        Ok(())
    }

    /// Whether every stored tuple equals a fresh hash of its template.
    pub fn codes_consistent(&self, family: &WtaHashFamily) -> bool {
        let s = Self::stride(family);
        if self.codes.len() != self.templates.len() * s {
            return false;
        }
        self.templates
            .iter()
            .zip(self.codes.chunks_exact(s))
            .all(|(t, c)| family.hash_all(t).is_ok_and(|h| h == c))
    }

    fn candidates_for_codes(&self, family: &WtaHashFamily, query: &[u32]) -> Vec<usize> {
        let s = Self::stride(family);
        let w = family.bands;
        self.codes
            .chunks_exact(s)
            .enumerate()
            .filter(|(_, stored)| {
                stored
                    .chunks_exact(w)
                    .zip(query.chunks_exact(w))
                    .any(|(a, b)| a == b)
            })
            .map(|(j, _)| j)
            .collect()
    }

    /// Indices (ascending) of templates sharing at least one full hash code with `x`.
    pub fn candidate_set(&self, family: &WtaHashFamily, x: &FeatureVector) -> Result<Vec<usize>> {
        check_dim(self.templates.dim(), x.dim())?;
        let query = family.hash_all(x)?;
        Ok(self.candidates_for_codes(family, &query))
    }

    /// Pools `f(x, t)` over the candidate set; [`EMPTY_CANDIDATES`] if it is empty.
    pub fn query(
        &self,
        family: &WtaHashFamily,
        x: &FeatureVector,
        f: Similarity,
        pooling: Pooling,
    ) -> Result<f64> {
        check_dim(self.templates.dim(), x.dim())?;
        let x_norm = x.norm();
        if x_norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let query = family.hash_all(x)?;
        let candidates = self.candidates_for_codes(family, &query);
        let responses = candidates.iter().map(|&j| {
            let t = self.templates.template(j).expect("candidate index in range");
            f.from_cosine(dot(x, t) / x_norm, x_norm)
        });
        Ok(pooling.pool(responses).unwrap_or(EMPTY_CANDIDATES))
    }
}

/// The LSH modules of one layer sharing a hash family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LshModules {
    family: WtaHashFamily,
    modules: Vec<LshModule>,
}

impl LshModules {
    pub fn new(family: WtaHashFamily) -> Self {
        Self {
            family,
            modules: Vec::new(),
        }
    }

    pub fn from_parts(family: WtaHashFamily, modules: Vec<LshModule>) -> Self {
        Self { family, modules }
    }

    pub fn family(&self) -> &WtaHashFamily {
        &self.family
    }

    pub fn modules(&self) -> &[LshModule] {
        &self.modules
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn push_module(&mut self) -> Result<usize> {
        let k = self.modules.len();
        self.modules.push(LshModule::new(k, self.family.dim())?);
        Ok(k)
    }

    pub fn insert(&mut self, k: usize, t: &FeatureVector) -> Result<()> {
        let m = self.modules.get_mut(k).ok_or(Error::UnknownModule(k))?;
        m.insert(&self.family, t)
    }

    pub fn query(&self, k: usize, x: &FeatureVector, f: Similarity, pooling: Pooling) -> Result<f64> {
        let m = self.modules.get(k).ok_or(Error::UnknownModule(k))?;
        m.query(&self.family, x, f, pooling)
    }
}
