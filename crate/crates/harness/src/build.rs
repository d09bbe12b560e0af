//! Layer construction from configuration.

use hwarch_core::{
    AugmentPolicy, BackendKind, ExactModule, FeatureVector, HwLayer, Pooling, RpModules,
    Similarity, SvdModule, TemplateBook, WtaHashFamily,
};

use crate::config::{AugmentMode, BackendParams, WtaParams};
use crate::error::Result;

pub fn augment_policy(b: &BackendParams) -> AugmentPolicy {
    match b.augment {
        AugmentMode::Never => AugmentPolicy::Never,
        AugmentMode::Always => AugmentPolicy::Always,
        AugmentMode::JlBound => AugmentPolicy::JlBound { eps: b.eps, c: b.c },
    }
}

/// Everything needed to allocate one layer.
#[derive(Debug, Clone, Copy)]
pub struct LayerSpec<'a> {
    pub kind: BackendKind,
    pub dim: usize,
    pub rank: usize,
    pub backend: &'a BackendParams,
    /// Overrides the WTA parameters of `backend`.
    pub wta: Option<WtaParams>,
    pub similarity: Similarity,
    pub pooling: Pooling,
    pub seed: u64,
}

impl LayerSpec<'_> {
    pub fn empty(&self) -> Result<HwLayer> {
        let (f, p) = (self.similarity, self.pooling);
        let b = self.backend;
        Ok(match self.kind {
            BackendKind::Exact => HwLayer::exact(self.dim, f, p),
            BackendKind::Svd => HwLayer::svd(self.dim, self.rank, f, p),
            BackendKind::Rp => {
                let s = b.s.min(self.dim);
                let modules = RpModules::new(self.dim, s, self.seed, b.sharing, augment_policy(b))?;
                HwLayer::rp(modules, f, p)?
            }
            BackendKind::Wta => {
                let w = self.wta.unwrap_or(WtaParams {
                    k_wta: b.k_wta,
                    w: b.w,
                    l: b.l,
                });
                let family = WtaHashFamily::new(self.dim, w.l, w.w, w.k_wta, self.seed)?;
                HwLayer::wta(family, f, p)
            }
        })
    }

    /// A layer with one module per book, in order.
    pub fn from_books(&self, books: Vec<TemplateBook>) -> Result<HwLayer> {
        let mut layer = self.empty()?;
        for book in books {
            match self.kind {
                BackendKind::Exact => {
                    layer.push_exact(ExactModule::from_book(book))?;
                }
                BackendKind::Svd => {
                    layer.push_svd(SvdModule::from_book(book, self.rank)?)?;
                }
                BackendKind::Rp | BackendKind::Wta => {
                    let k = layer.push_module()?;
                    for t in book.iter() {
                        layer.insert(k, &FeatureVector::new(t.to_vec())?)?;
                    }
                }
            }
        }
        Ok(layer)
    }
}
