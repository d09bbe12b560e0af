//! HW-layers and stacked architectures.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactModule, Signature};
use crate::rp::RpModules;
use crate::svd::SvdModule;
use crate::vector::{check_dim, FeatureVector, Pooling, Similarity};
use crate::wta::{LshModules, WtaHashFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Exact,
    Svd,
    Rp,
    Wta,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Exact => "exact",
            BackendKind::Svd => "svd",
            BackendKind::Rp => "rp",
            BackendKind::Wta => "wta",
        }
    }
}

/// The modules of a layer; one backend per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerModules {
    Exact(Vec<ExactModule>),
    Svd { rank: usize, modules: Vec<SvdModule> },
    Rp(RpModules),
    Wta(LshModules),
}

impl LayerModules {
    pub fn kind(&self) -> BackendKind {
        match self {
            LayerModules::Exact(_) => BackendKind::Exact,
            LayerModules::Svd { .. } => BackendKind::Svd,
            LayerModules::Rp(_) => BackendKind::Rp,
            LayerModules::Wta(_) => BackendKind::Wta,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            LayerModules::Exact(m) => m.len(),
            LayerModules::Svd { modules, .. } => modules.len(),
            LayerModules::Rp(m) => m.len(),
            LayerModules::Wta(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of templates stored in module `k`.
    pub fn module_len(&self, k: usize) -> Option<usize> {
        match self {
            LayerModules::Exact(m) => m.get(k).map(|m| m.book().len()),
            LayerModules::Svd { modules, .. } => modules.get(k).map(SvdModule::len),
            LayerModules::Rp(m) => m.modules().get(k).map(|m| m.len()),
            LayerModules::Wta(m) => m.modules().get(k).map(|m| m.len()),
        }
    }
}

/// A set of HW-modules sharing one input space, one backend and one `(f, P)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwLayer {
    input_dim: usize,
    similarity: Similarity,
    pooling: Pooling,
    modules: LayerModules,
}

impl HwLayer {
    pub fn new(
        input_dim: usize,
        similarity: Similarity,
        pooling: Pooling,
        modules: LayerModules,
    ) -> Result<Self> {
        let mismatch = match &modules {
            LayerModules::Exact(m) => m.iter().map(|m| m.book().dim()).find(|&d| d != input_dim),
            LayerModules::Svd { modules, .. } => {
                modules.iter().map(SvdModule::dim).find(|&d| d != input_dim)
            }
            LayerModules::Rp(m) => Some(m.dim()).filter(|&d| d != input_dim),
            LayerModules::Wta(m) => Some(m.family().dim()).filter(|&d| d != input_dim),
        };
        if let Some(found) = mismatch {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                found,
            });
        }
        Ok(Self {
            input_dim,
            similarity,
            pooling,
            modules,
        })
    }

    pub fn exact(input_dim: usize, similarity: Similarity, pooling: Pooling) -> Self {
        Self::new(input_dim, similarity, pooling, LayerModules::Exact(Vec::new()))
            .expect("empty layer")
    }

    pub fn svd(input_dim: usize, rank: usize, similarity: Similarity, pooling: Pooling) -> Self {
        Self::new(
            input_dim,
            similarity,
            pooling,
            LayerModules::Svd {
                rank,
                modules: Vec::new(),
            },
        )
        .expect("empty layer")
    }

    pub fn rp(modules: RpModules, similarity: Similarity, pooling: Pooling) -> Result<Self> {
        Self::new(modules.dim(), similarity, pooling, LayerModules::Rp(modules))
    }

    pub fn wta(family: WtaHashFamily, similarity: Similarity, pooling: Pooling) -> Self {
        let dim = family.dim();
        Self::new(dim, similarity, pooling, LayerModules::Wta(LshModules::new(family)))
            .expect("empty layer")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn similarity(&self) -> Similarity {
        self.similarity
    }

    pub fn pooling(&self) -> Pooling {
        self.pooling
    }

    pub fn kind(&self) -> BackendKind {
        self.modules.kind()
    }

    pub fn modules(&self) -> &LayerModules {
        &self.modules
    }

    pub fn module_count(&self) -> usize {
        self.modules.len()
    }

    /// Appends an empty module and returns its index.
    pub fn push_module(&mut self) -> Result<usize> {
        let k = self.modules.len();
        match &mut self.modules {
            LayerModules::Exact(m) => m.push(ExactModule::new(k, self.input_dim)?),
            LayerModules::Svd { rank, modules } => {
                modules.push(SvdModule::new(k, self.input_dim, *rank)?)
            }
            LayerModules::Rp(m) => {
                m.push_module()?;
            }
            LayerModules::Wta(m) => {
                m.push_module()?;
            }
        }
        Ok(k)
    }

    /// Appends a pre-built module. Fails for layers whose modules share state.
    pub fn push_exact(&mut self, module: ExactModule) -> Result<usize> {
        check_dim(self.input_dim, module.book().dim())?;
        match &mut self.modules {
            LayerModules::Exact(m) => {
                m.push(module);
                Ok(m.len() - 1)
            }
            other => Err(Error::Unsupported(other.kind().name())),
        }
    }

    pub fn push_svd(&mut self, module: SvdModule) -> Result<usize> {
        check_dim(self.input_dim, module.dim())?;
        match &mut self.modules {
            LayerModules::Svd { modules, .. } => {
                modules.push(module);
                Ok(modules.len() - 1)
            }
            other => Err(Error::Unsupported(other.kind().name())),
        }
    }

    pub fn insert(&mut self, k: usize, t: &FeatureVector) -> Result<()> {
        check_dim(self.input_dim, t.dim())?;
        match &mut self.modules {
            LayerModules::Exact(m) => m.get_mut(k).ok_or(Error::UnknownModule(k))?.insert(t),
            LayerModules::Svd { modules, .. } => {
                modules.get_mut(k).ok_or(Error::UnknownModule(k))?.insert(t)
            }
            LayerModules::Rp(m) => m.insert(k, t).map(|_| ()),
            LayerModules::Wta(m) => m.insert(k, t),
        }
    }

    /// QUERY of module `k`.
    pub fn query(&self, k: usize, x: &FeatureVector) -> Result<f64> {
        check_dim(self.input_dim, x.dim())?;
        let (f, p) = (self.similarity, self.pooling);
        match &self.modules {
            LayerModules::Exact(m) => m.get(k).ok_or(Error::UnknownModule(k))?.query(x, f, p),
            LayerModules::Svd { modules, .. } => {
                modules.get(k).ok_or(Error::UnknownModule(k))?.query(x, f, p)
            }
            LayerModules::Rp(m) => m.query(k, x, f, p),
            LayerModules::Wta(m) => m.query(k, x, f, p),
        }
    }

    /// One QUERY per module, in module order.
    pub fn signature(&self, x: &FeatureVector) -> Result<Signature> {
        check_dim(self.input_dim, x.dim())?;
        let k = self.module_count();
        if k == 0 {
            return Err(Error::EmptyLayer);
        }
        (0..k)
            .map(|i| self.query(i, x))
            .collect::<Result<Vec<_>>>()
            .map(Signature::new)
    }
}

/// Layers stacked so that each consumes the signature of the one below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwArchitecture {
    layers: Vec<HwLayer>,
}

impl HwArchitecture {
    pub fn new(layers: Vec<HwLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyArchitecture);
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[HwLayer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, i: usize) -> Option<&mut HwLayer> {
        self.layers.get_mut(i)
    }

    /// Checks that every layer's input width equals the module count below it.
    pub fn validate(&self) -> Result<()> {
        for (stage, pair) in self.layers.windows(2).enumerate() {
            let (below, above) = (&pair[0], &pair[1]);
            if above.input_dim() != below.module_count() {
                return Err(Error::StageDimensionMismatch {
                    stage: stage + 1,
                    expected: above.input_dim(),
                    found: below.module_count(),
                });
            }
        }
        Ok(())
    }

    /// Cascades QUERY through every layer and returns the top signature.
    pub fn feedforward(&self, x: &FeatureVector) -> Result<Signature> {
        let mut input = x.clone();
        let mut out = None;
        for (stage, layer) in self.layers.iter().enumerate() {
            if layer.input_dim() != input.dim() {
                return Err(Error::StageDimensionMismatch {
                    stage,
                    expected: layer.input_dim(),
                    found: input.dim(),
                });
            }
            let sig = layer.signature(&input)?;
            if stage + 1 < self.layers.len() {
                input = sig.to_feature_vector()?;
            }
            out = Some(sig);
        }
        Ok(out.expect("architecture has at least one layer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(d: usize, i: usize) -> FeatureVector {
        FeatureVector::basis(d, i).unwrap()
    }

    fn one_hot_layer() -> HwLayer {
        let mut layer = HwLayer::exact(3, Similarity::NormalizedDot, Pooling::Max);
        for i in 0..3 {
            let k = layer.push_module().unwrap();
            layer.insert(k, &e(3, i)).unwrap();
        }
        layer
    }

    #[test]
    fn one_hot_signature() {
        let sig = one_hot_layer().signature(&e(3, 1)).unwrap();
        assert_eq!(sig.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn errors() {
        let layer = HwLayer::exact(3, Similarity::NormalizedDot, Pooling::Max);
        assert_eq!(layer.signature(&e(3, 0)), Err(Error::EmptyLayer));
        assert!(matches!(
            one_hot_layer().signature(&e(4, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut layer = one_hot_layer();
        assert_eq!(layer.insert(7, &e(3, 0)), Err(Error::UnknownModule(7)));
        assert!(HwArchitecture::new(Vec::new()).is_err());
    }

    #[test]
    fn stage_mismatch_reports_stage() {
        let top = HwLayer::exact(5, Similarity::NormalizedDot, Pooling::Max);
        let arch = HwArchitecture::new(alloc::vec![one_hot_layer(), top]).unwrap();
        assert_eq!(
            arch.feedforward(&e(3, 0)),
            Err(Error::StageDimensionMismatch {
                stage: 1,
                expected: 5,
                found: 3
            })
        );
        assert!(arch.validate().is_err());
    }

    #[test]
    fn push_prebuilt_into_wrong_backend() {
        let mut layer = HwLayer::svd(3, 1, Similarity::NormalizedDot, Pooling::Max);
        let m = ExactModule::new(0, 3).unwrap();
        assert_eq!(layer.push_exact(m), Err(Error::Unsupported("svd")));
    }
}
