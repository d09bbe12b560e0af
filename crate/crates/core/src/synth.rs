//! Synthetic stimuli: group orbits, identity "videos", face/name association
//! data, and a naive reference evaluation of module responses.
//!
//! Cyclic coordinate shifts stand in for viewpoint changes. They form a real
//! finite group acting unitarily on the feature space, so full-orbit template
//! books give signatures that are invariant up to rounding.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::book::TemplateBook;
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::vector::{FeatureVector, Pooling, Similarity};

/// `out[(i + j) mod d] = v[i]`.
pub fn shift(v: &[f64], j: usize) -> Vec<f64> {
    let d = v.len();
    let mut out = alloc::vec![0.0; d];
    if d == 0 {
        return out;
    }
    for (i, &x) in v.iter().enumerate() {
        out[(i + j) % d] = x;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// Element `j` rotates coordinates by `j`.
    CyclicShift,
    /// Identity followed by random signed permutations drawn from `seed`.
    SignedPermutation { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    /// Number of group elements used; `None` means the full orbit.
    pub degree: Option<usize>,
}

impl GroupSpec {
    pub fn full_cyclic() -> Self {
        Self {
            kind: GroupKind::CyclicShift,
            degree: None,
        }
    }

    pub fn cyclic_subset(degree: usize) -> Self {
        Self {
            kind: GroupKind::CyclicShift,
            degree: Some(degree),
        }
    }

    /// Number of elements used in dimension `dim`.
    pub fn elements(&self, dim: usize) -> Result<usize> {
        match (&self.kind, self.degree) {
            (GroupKind::CyclicShift, None) => Ok(dim),
            (GroupKind::CyclicShift, Some(k)) if (1..=dim).contains(&k) => Ok(k),
            (GroupKind::CyclicShift, Some(_)) => Err(invalid("degree", "must lie in 1..=dim")),
            (GroupKind::SignedPermutation { .. }, None) => {
                Err(invalid("degree", "signed permutations need an explicit subset size"))
            }
            (GroupKind::SignedPermutation { .. }, Some(0)) => {
                Err(invalid("degree", "must be at least 1"))
            }
            (GroupKind::SignedPermutation { .. }, Some(k)) => Ok(k),
        }
    }

    /// Applies group element `g` to `v`.
    pub fn act(&self, g: usize, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            GroupKind::CyclicShift => shift(v, g),
            GroupKind::SignedPermutation { seed } => {
                if g == 0 {
                    return v.to_vec();
                }
                let d = v.len();
                let mut r = rng::stream(*seed, &[g as u64, d as u64]);
                let mut perm: Vec<usize> = (0..d).collect();
                perm.shuffle(&mut r);
                let mut out = alloc::vec![0.0; d];
                for (i, &x) in v.iter().enumerate() {
                    let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                    out[perm[i]] = sign * x;
                }
                out
            }
        }
    }
}

/// `{ g normalize(base) : g in chosen elements }` as a template book.
pub fn generate_orbit(id: usize, base: &FeatureVector, group: &GroupSpec) -> Result<TemplateBook> {
    let unit = base.normalized()?;
    let n = group.elements(base.dim())?;
    let mut book = TemplateBook::new(id, base.dim())?;
    for g in 0..n {
        book.insert(&FeatureVector::new(group.act(g, &unit))?)?;
    }
    Ok(book)
}

/// `normalize(v + sigma * g / sqrt(d))` with `g` standard Gaussian, so the
/// noise has norm close to `sigma`. Returns `v` unchanged when `sigma == 0`.
pub fn add_noise(v: &[f64], sigma: f64, r: &mut ChaCha8Rng) -> Result<FeatureVector> {
    if sigma == 0.0 {
        return FeatureVector::new(v.to_vec());
    }
    let scale = sigma / libm::sqrt(v.len() as f64);
    let noise = rng::gaussian_vec(r, v.len());
    let noisy: Vec<f64> = v.iter().zip(noise).map(|(a, n)| a + scale * n).collect();
    FeatureVector::new(noisy)?.normalized()
}

/// One identity: a unit base vector and its (noisy, shifted) frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityVideo {
    pub base: Vec<f64>,
    pub shifts: Vec<usize>,
    pub frames: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityParams {
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    /// Frames per video; `None` uses the full orbit.
    pub orbit_subset: Option<usize>,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityDataset {
    pub params: IdentityParams,
    pub train: Vec<IdentityVideo>,
    pub test: Vec<IdentityVideo>,
}

impl IdentityDataset {
    /// A fresh noisy view of `base` at `shift`, drawn from stream `path`.
    pub fn view(&self, base: &[f64], shift_by: usize, path: &[u64]) -> Result<FeatureVector> {
        let mut r = rng::stream(self.params.seed, path);
        add_noise(&shift(base, shift_by), self.params.noise, &mut r)
    }
}

pub fn generate_identity_dataset(params: IdentityParams) -> Result<IdentityDataset> {
    if params.n_train == 0 {
        return Err(invalid("n_train", "must be at least 1"));
    }
    if params.n_test == 0 {
        return Err(invalid("n_test", "must be at least 1"));
    }
    if params.dim < 2 {
        return Err(invalid("dim", "must be at least 2"));
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) {
        return Err(invalid("noise", "must be finite and non-negative"));
    }
    let frames = GroupSpec {
        kind: GroupKind::CyclicShift,
        degree: params.orbit_subset,
    }
    .elements(params.dim)?;

    let video = |index: usize| -> Result<IdentityVideo> {
        let mut r = rng::stream(params.seed, &[0x1D, index as u64]);
        let base = rng::unit_vec(&mut r, params.dim);
        let shifts: Vec<usize> = (0..frames).collect();
        let frames = shifts
            .iter()
            .map(|&j| add_noise(&shift(&base, j), params.noise, &mut r))
            .collect::<Result<Vec<_>>>()?;
        Ok(IdentityVideo {
            base,
            shifts,
            frames,
        })
    };
    let train = (0..params.n_train).map(video).collect::<Result<Vec<_>>>()?;
    let test = (params.n_train..params.n_train + params.n_test)
        .map(video)
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityDataset {
        params,
        train,
        test,
    })
}

/// `count` "font" variants of a word: `normalize((I + strength M) base)` with
/// `M` Gaussian scaled by `1/sqrt(d)`. Variant 0 is the base itself.
pub fn font_variants(base: &[f64], count: usize, strength: f64, r: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let d = base.len();
    let scale = strength / libm::sqrt(d as f64);
    let mut out = Vec::with_capacity(count);
    for f in 0..count {
        if f == 0 {
            out.push(FeatureVector::new(base.to_vec())?.normalized()?.into_inner());
            continue;
        }
        let mut v = base.to_vec();
        for vi in v.iter_mut() {
            let row = rng::gaussian_vec(r, d);
            *vi += scale * row.iter().zip(base).map(|(m, b)| m * b).sum::<f64>();
        }
        out.push(FeatureVector::new(v)?.normalized()?.into_inner());
    }
    Ok(out)
}

/// Places `v` at `offset` inside a zero vector of length `total`.
pub fn embed(v: &[f64], offset: usize, total: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; total];
    out[offset..offset + v.len()].copy_from_slice(v);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationParams {
    pub n_individuals: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Font variants per name.
    pub fonts: usize,
    pub font_strength: f64,
    /// Studied (face view, name view) items per individual.
    pub study_views: usize,
    /// Held-out equivalent items per individual.
    pub heldout_views: usize,
    pub noise: f64,
    pub seed: u64,
}

/// One person: a face orbit, a name orbit across fonts, studied items and
/// held-out equivalent items (concatenated `[face | name]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub face: Vec<f64>,
    pub name_fonts: Vec<Vec<f64>>,
    pub study: Vec<FeatureVector>,
    pub heldout: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationDataset {
    pub params: AssociationParams,
    pub individuals: Vec<Individual>,
}

impl AssociationDataset {
    pub fn dim(&self) -> usize {
        self.params.dim_a + self.params.dim_b
    }

    /// Copy of `probe` with the name (modality B) coordinates zeroed.
    pub fn face_only(&self, probe: &FeatureVector) -> Result<FeatureVector> {
        let mut v = probe.to_vec();
        v[self.params.dim_a..].iter_mut().for_each(|x| *x = 0.0);
        FeatureVector::new(v)
    }

    /// Copy of `probe` with the face (modality A) coordinates zeroed.
    pub fn name_only(&self, probe: &FeatureVector) -> Result<FeatureVector> {
        let mut v = probe.to_vec();
        v[..self.params.dim_a].iter_mut().for_each(|x| *x = 0.0);
        FeatureVector::new(v)
    }
}

fn concat_view(
    face: &[f64],
    name: &[f64],
    face_shift: usize,
    name_shift: usize,
    noise: f64,
    r: &mut ChaCha8Rng,
) -> Result<FeatureVector> {
    let mut v = add_noise(&shift(face, face_shift), noise, r)?.into_inner();
    v.extend(add_noise(&shift(name, name_shift), noise, r)?.into_inner());
    FeatureVector::new(v)
}

pub fn generate_association_dataset(params: AssociationParams) -> Result<AssociationDataset> {
    if params.n_individuals == 0 {
        return Err(invalid("n_individuals", "must be at least 1"));
    }
    if params.dim_a < 2 || params.dim_b < 2 {
        return Err(invalid("dim", "each modality needs at least 2 dimensions"));
    }
    if params.fonts == 0 || params.study_views == 0 {
        return Err(invalid("views", "fonts and study_views must be at least 1"));
    }
    if !(params.noise >= 0.0 && params.noise.is_finite()) {
        return Err(invalid("noise", "must be finite and non-negative"));
    }
    let views = params.study_views + params.heldout_views;
    if views > params.dim_a * params.dim_b * params.fonts {
        return Err(invalid("views", "more views than distinct (shift, shift, font) combinations"));
    }

    let individuals = (0..params.n_individuals)
        .map(|p| -> Result<Individual> {
            let mut r = rng::stream(params.seed, &[0xA5, p as u64]);
            let face = rng::unit_vec(&mut r, params.dim_a);
            let name = rng::unit_vec(&mut r, params.dim_b);
            let name_fonts = font_variants(&name, params.fonts, params.font_strength, &mut r)?;

            // Distinct (face shift, name shift, font) combinations; the first
            // `study_views` are studied, the rest held out.
            let mut combos: Vec<(usize, usize, usize)> = Vec::with_capacity(views);
            while combos.len() < views {
                let c = (
                    r.random_range(0..params.dim_a),
                    r.random_range(0..params.dim_b),
                    r.random_range(0..params.fonts),
                );
                if !combos.contains(&c) {
                    combos.push(c);
                }
            }
            let studied_fonts: Vec<usize> = combos[..params.study_views].iter().map(|c| c.2).collect();
            let mut items = Vec::with_capacity(views);
            for (i, &(ja, jb, mut font)) in combos.iter().enumerate() {
                // Held-out items reuse studied fonts: only the viewpoint is new.
                if i >= params.study_views && !studied_fonts.contains(&font) {
                    font = studied_fonts[i % studied_fonts.len()];
                }
                items.push(concat_view(&face, &name_fonts[font], ja, jb, params.noise, &mut r)?);
            }
            let heldout = items.split_off(params.study_views);
            Ok(Individual {
                face,
                name_fonts,
                study: items,
                heldout,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AssociationDataset {
        params,
        individuals,
    })
}

/// Reference evaluation of `P({ f(x, t) : t in book })` by explicit loops.
///
/// Kept deliberately separate from the module code paths so it can serve as
/// an oracle in tests.
pub fn oracle_exact_query(book: &TemplateBook, x: &[f64], f: Similarity, pooling: Pooling) -> Result<f64> {
    if x.len() != book.dim() {
        return Err(Error::DimensionMismatch {
            expected: book.dim(),
            found: x.len(),
        });
    }
    if book.is_empty() {
        return Err(Error::EmptyModule);
    }
    let mut sq = 0.0;
    for i in 0..x.len() {
        sq += x[i] * x[i];
    }
    if sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x_norm = libm::sqrt(sq);
    let mut acc: Option<f64> = None;
    for j in 0..book.len() {
        let t = book.template(j).expect("index in range");
        let mut d = 0.0;
        for i in 0..x.len() {
            d += x[i] * t[i];
        }
        let s = match f {
            Similarity::NormalizedDot => d / x_norm,
            Similarity::SigmoidDot { gain } => 1.0 / (1.0 + libm::exp(-gain * d)),
        };
        acc = Some(match (acc, pooling) {
            (None, _) => s,
            (Some(a), Pooling::Max) => {
                if s > a {
                    s
                } else {
                    a
                }
            }
            (Some(a), Pooling::Sum) => a + s,
        });
    }
    Ok(acc.expect("book is non-empty"))
}
