//! Cortex + hippocampus composition: frozen cortical layers feeding a
//! hippocampal layer with one module per studied episode.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{classify, Signature};
use crate::layer::HwLayer;
use crate::vector::{check_dim, cosine, FeatureVector};

/// Items to be inserted together into one hippocampal module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub module: usize,
    pub items: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CortexHippocampusModel {
    cortex1: HwLayer,
    cortex2: Option<HwLayer>,
    hippocampus: HwLayer,
}

impl CortexHippocampusModel {
    /// Both cortical layers read the same raw input; the hippocampus reads
    /// their concatenated signatures.
    pub fn new(cortex1: HwLayer, cortex2: Option<HwLayer>, hippocampus: HwLayer) -> Result<Self> {
        if let Some(c2) = &cortex2 {
            check_dim(cortex1.input_dim(), c2.input_dim())?;
        }
        let width = cortex1.module_count() + cortex2.as_ref().map_or(0, HwLayer::module_count);
        check_dim(hippocampus.input_dim(), width)?;
        Ok(Self {
            cortex1,
            cortex2,
            hippocampus,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.cortex1.input_dim()
    }

    pub fn cortex1(&self) -> &HwLayer {
        &self.cortex1
    }

    pub fn cortex2(&self) -> Option<&HwLayer> {
        self.cortex2.as_ref()
    }

    pub fn hippocampus(&self) -> &HwLayer {
        &self.hippocampus
    }

    /// Concatenated cortical signature of a raw input.
    pub fn encode(&self, x: &FeatureVector) -> Result<FeatureVector> {
        let mut values = self.cortex1.signature(x)?.into_inner();
        if let Some(c2) = &self.cortex2 {
            values.extend(c2.signature(x)?.into_inner());
        }
        FeatureVector::new(values)
    }

    /// Cortex-1 signature only.
    pub fn cortex1_signature(&self, x: &FeatureVector) -> Result<Signature> {
        self.cortex1.signature(x)
    }

    /// Encodes every item and inserts it into its episode's hippocampal module.
    ///
    /// An episode may name an existing module or the next free index, which
    /// allocates it. Cortical layers are never modified. Nothing is inserted
    /// unless every item encodes successfully.
    pub fn study(&mut self, episodes: &[Episode]) -> Result<()> {
        let mut next = self.hippocampus.module_count();
        let mut encoded = Vec::with_capacity(episodes.len());
        for ep in episodes {
            if ep.module > next {
                return Err(Error::UnknownModule(ep.module));
            }
            if ep.module == next {
                next += 1;
            }
            let items = ep
                .items
                .iter()
                .map(|x| self.encode(x))
                .collect::<Result<Vec<_>>>()?;
            encoded.push((ep.module, items));
        }
        for (module, items) in encoded {
            while self.hippocampus.module_count() <= module {
                self.hippocampus.push_module()?;
            }
            for sig in &items {
                self.hippocampus.insert(module, sig)?;
            }
        }
        Ok(())
    }

    /// Hippocampal signature of a raw probe.
    pub fn hippocampal_signature(&self, probe: &FeatureVector) -> Result<Signature> {
        let k = self.hippocampus.module_count();
        if (0..k).all(|i| self.hippocampus.modules().module_len(i) == Some(0)) {
            return Err(Error::NotStudied);
        }
        let code = self.encode(probe)?;
        let values = (0..k)
            .map(|i| match self.hippocampus.modules().module_len(i) {
                // Unused modules lose every competition.
                Some(0) => Ok(f64::NEG_INFINITY),
                _ => self.hippocampus.query(i, &code),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Signature::new(values))
    }

    /// The maximally activated hippocampal module.
    pub fn recall(&self, probe: &FeatureVector) -> Result<usize> {
        classify(&self.hippocampal_signature(probe)?)
    }

    /// Cosine between the cortex-1 signatures of two inputs.
    pub fn signature_cosine(&self, x1: &FeatureVector, x2: &FeatureVector) -> Result<f64> {
        let s1 = self.cortex1.signature(x1)?;
        let s2 = self.cortex1.signature(x2)?;
        cosine(&s1, &s2)
    }

    pub fn same_different(&self, x1: &FeatureVector, x2: &FeatureVector, theta: f64) -> Result<bool> {
        same_different(&self.cortex1, x1, x2, theta)
    }
}

/// `cosine(sig(x1), sig(x2)) >= theta` using one layer's signatures.
pub fn same_different(layer: &HwLayer, x1: &FeatureVector, x2: &FeatureVector, theta: f64) -> Result<bool> {
    let s1 = layer.signature(x1)?;
    let s2 = layer.signature(x2)?;
    Ok(cosine(&s1, &s2)? >= theta)
}

/// A scored pair and whether it truly shows the same identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub score: f64,
    pub same: bool,
}

/// Mean of the true-positive and true-negative rates of `score >= theta`.
pub fn balanced_accuracy(pairs: &[ScoredPair], theta: f64) -> f64 {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for p in pairs {
        let predicted = p.score >= theta;
        if p.same {
            pos += 1;
            tp += predicted as usize;
        } else {
            neg += 1;
            tn += (!predicted) as usize;
        }
    }
    let rate = |hit: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    };
    0.5 * (rate(tp, pos) + rate(tn, neg))
}

/// Plain fraction of correct `score >= theta` decisions.
pub fn accuracy(pairs: &[ScoredPair], theta: f64) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let correct = pairs.iter().filter(|p| (p.score >= theta) == p.same).count();
    correct as f64 / pairs.len() as f64
}

/// Threshold maximizing balanced accuracy.
///
/// Candidate decisions change only between consecutive distinct scores, so
/// each gap is one candidate interval. The first run of adjacent optimal
/// intervals wins and the midpoint of its span is returned; an optimum that
/// is unbounded below returns the smallest score, unbounded above returns
/// one past the largest.
pub fn calibrate_threshold(pairs: &[ScoredPair]) -> Result<f64> {
    let pos = pairs.iter().filter(|p| p.same).count();
    let neg = pairs.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    if let Some(index) = pairs.iter().position(|p| !p.score.is_finite()) {
        return Err(Error::NonFinite { index });
    }

    let mut sorted: Vec<ScoredPair> = pairs.to_vec();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));

    // Interval i covers thresholds in (s_{i-1}, s_i]; interval m is (s_{m-1}, inf).
    // Thresholds in interval i call every pair at or above distinct score i "same".
    let mut distinct: Vec<f64> = Vec::new();
    let mut below_pos = Vec::new();
    let mut below_neg = Vec::new();
    let (mut bp, mut bn) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].score;
        distinct.push(s);
        below_pos.push(bp);
        below_neg.push(bn);
        while i < sorted.len() && sorted[i].score == s {
            if sorted[i].same {
                bp += 1;
            } else {
                bn += 1;
            }
            i += 1;
        }
    }
    below_pos.push(bp);
    below_neg.push(bn);

    let score = |k: usize| {
        let tpr = (pos - below_pos[k]) as f64 / pos as f64;
        let tnr = below_neg[k] as f64 / neg as f64;
        0.5 * (tpr + tnr)
    };
    let m = distinct.len();
    let best = (0..=m).map(score).fold(f64::NEG_INFINITY, f64::max);
    let first = (0..=m).find(|&k| score(k) >= best - 1e-12).expect("non-empty");
    let mut last = first;
    while last < m && score(last + 1) >= best - 1e-12 {
        last += 1;
    }

    if first == 0 {
        return Ok(distinct[0]);
    }
    if last == m {
        return Ok(distinct[m - 1] + 1.0);
    }
    Ok(0.5 * (distinct[first - 1] + distinct[last]))
}
