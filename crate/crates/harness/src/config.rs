//! Experiment configuration: TOML file, defaults, CLI overrides, validation.

use std::path::{Path, PathBuf};

use hwarch_core::rp::JL_CONSTANT;
use hwarch_core::{BackendKind, Pooling, ProjectionSharing, Similarity};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

/// How an RP layer decides to widen its projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentMode {
    Never,
    Always,
    JlBound,
}

/// How a cortical SVD module gets its basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CortexLearning {
    Svd,
    Oja,
}

/// Parameters shared by every backend-built layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendParams {
    /// SVD rank r.
    pub rank: usize,
    /// Initial RP dimension s.
    pub s: usize,
    pub eps: f64,
    /// JL constant C.
    pub c: f64,
    pub augment: AugmentMode,
    pub sharing: ProjectionSharing,
    /// WTA hashes L.
    pub l: usize,
    /// WTA bands per hash W.
    pub w: usize,
    /// WTA window K.
    pub k_wta: usize,
}

impl Default for BackendParams {
    fn default() -> Self {
        Self {
            rank: 8,
            s: 64,
            eps: 0.25,
            c: JL_CONSTANT,
            augment: AugmentMode::Never,
            sharing: ProjectionSharing::Shared,
            l: 8,
            w: 2,
            k_wta: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VentralConfig {
    pub backend: BackendKind,
    pub learning: CortexLearning,
    pub oja_epochs: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    /// Frames per identity video; absent means the full orbit.
    pub orbit_subset: Option<usize>,
    pub noise: f64,
    /// Same pairs per identity; the same number of different pairs is drawn.
    pub pairs_per_identity: usize,
}

impl Default for VentralConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Svd,
            learning: CortexLearning::Svd,
            oja_epochs: 20,
            n_train: 64,
            n_test: 16,
            dim: 256,
            orbit_subset: None,
            noise: 0.5,
            pairs_per_identity: 4,
        }
    }
}

/// One cell of the hippocampal WTA sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtaParams {
    pub k_wta: usize,
    pub w: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtlConfig {
    /// Hippocampal backend.
    pub backend: BackendKind,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Development face identities (cortex-1 modules); swept.
    pub cortex_faces: Vec<usize>,
    /// Development names (cortex-2 modules).
    pub cortex_names: usize,
    /// Cortical SVD rank; absent means full rank.
    pub cortex_rank: Option<usize>,
    pub fonts: usize,
    pub font_strength: f64,
    pub study_sizes: Vec<usize>,
    pub study_views: usize,
    pub heldout_views: usize,
    pub noise: f64,
    /// Hippocampal WTA parameter grid; empty uses the backend parameters.
    pub wta_sweep: Vec<WtaParams>,
}

impl Default for MtlConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Wta,
            dim_a: 32,
            dim_b: 32,
            cortex_faces: vec![16],
            cortex_names: 16,
            cortex_rank: Some(8),
            fonts: 3,
            font_strength: 0.3,
            study_sizes: vec![4, 8, 16, 32, 64],
            study_views: 4,
            heldout_views: 4,
            noise: 0.5,
            wta_sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivConfig {
    /// Random instances per grid cell.
    pub instances: usize,
    pub queries: usize,
    pub templates: usize,
    pub dims: Vec<usize>,
    /// SVD ranks as fractions of min(n, d); 1.0 is full rank.
    pub rank_fractions: Vec<f64>,
    /// RP dimensions as fractions of d; 1.0 is s = d.
    pub s_fractions: Vec<f64>,
    pub wta_grid: Vec<WtaParams>,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self {
            instances: 20,
            queries: 20,
            templates: 24,
            dims: vec![8, 32, 64],
            rank_fractions: vec![0.25, 0.5, 1.0],
            s_fractions: vec![0.25, 0.5, 1.0],
            wta_grid: vec![
                WtaParams { k_wta: 2, w: 1, l: 32 },
                WtaParams { k_wta: 4, w: 2, l: 8 },
                WtaParams { k_wta: 8, w: 3, l: 4 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OjaDemoConfig {
    pub dim: usize,
    pub components: usize,
    pub samples: usize,
    pub epochs: usize,
    /// Leading variances; the remaining directions get `tail_variance`.
    pub leading_variances: Vec<f64>,
    pub tail_variance: f64,
    pub eta0: f64,
    pub tau: f64,
}

impl Default for OjaDemoConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            components: 3,
            samples: 1000,
            epochs: 50,
            leading_variances: vec![1.0, 0.6, 0.3],
            tail_variance: 0.03,
            eta0: 0.1,
            tau: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
    /// Also write each repetition's generated dataset as JSON.
    pub write_datasets: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            format: OutputFormat::Both,
            write_datasets: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed; every repetition and sweep cell derives its seed from it.
    pub seed: u64,
    pub reps: usize,
    pub similarity: Similarity,
    pub pooling: Pooling,
    pub backend: BackendParams,
    pub ventral: VentralConfig,
    pub mtl: MtlConfig,
    pub equiv: EquivConfig,
    pub oja_demo: OjaDemoConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2014,
            reps: 20,
            similarity: Similarity::NormalizedDot,
            pooling: Pooling::Max,
            backend: BackendParams::default(),
            ventral: VentralConfig::default(),
            mtl: MtlConfig::default(),
            equiv: EquivConfig::default(),
            oja_demo: OjaDemoConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Values given on the command line; each replaces the config field.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub backend: Option<BackendKind>,
    pub format: Option<OutputFormat>,
}

/// Which experiment a `--backend` flag applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Ventral,
    Mtl,
    Equiv,
    OjaDemo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ventral => "ventral",
            Experiment::Mtl => "mtl",
            Experiment::Equiv => "equiv",
            Experiment::OjaDemo => "oja-demo",
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Applies CLI overrides. `--backend` sets the ventral cortex backend or
    /// the MTL hippocampal backend; for `equiv` it is read by the driver.
    pub fn apply(&mut self, o: &Overrides, experiment: Experiment) {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(reps) = o.reps {
            self.reps = reps;
        }
        if let Some(format) = o.format {
            self.output.format = format;
        }
        if let Some(kind) = o.backend {
            match experiment {
                Experiment::Ventral => self.ventral.backend = kind,
                Experiment::Mtl => self.mtl.backend = kind,
                Experiment::Equiv | Experiment::OjaDemo => {}
            }
        }
    }

    pub fn validate_common(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(HarnessError::config("reps", "must be at least 1"));
        }
        if let Similarity::SigmoidDot { gain } = self.similarity {
            if !(gain.is_finite() && gain > 0.0) {
                return Err(HarnessError::config("similarity.gain", "must be positive and finite"));
            }
        }
        let b = &self.backend;
        if b.rank == 0 {
            return Err(HarnessError::config("backend.rank", "must be at least 1"));
        }
        if b.s == 0 {
            return Err(HarnessError::config("backend.s", "must be at least 1"));
        }
        if !(b.eps > 0.0 && b.eps < 1.0) {
            return Err(HarnessError::config("backend.eps", "must lie strictly between 0 and 1"));
        }
        if !(b.c.is_finite() && b.c > 0.0) {
            return Err(HarnessError::config("backend.c", "must be positive"));
        }
        check_wta("backend", b.k_wta, b.w, b.l)?;
        Ok(())
    }

    pub fn validate_ventral(&self) -> Result<()> {
        self.validate_common()?;
        let v = &self.ventral;
        positive("ventral.n_train", v.n_train)?;
        positive("ventral.n_test", v.n_test)?;
        if v.n_train < 3 {
            return Err(HarnessError::config("ventral.n_train", "needs at least 3 identities to form calibration pairs"));
        }
        if v.n_test < 2 {
            return Err(HarnessError::config("ventral.n_test", "needs at least 2 identities to form different pairs"));
        }
        if v.dim < 2 {
            return Err(HarnessError::config("ventral.dim", "must be at least 2"));
        }
        if let Some(k) = v.orbit_subset {
            if k == 0 || k > v.dim {
                return Err(HarnessError::config("ventral.orbit_subset", "must lie in 1..=dim"));
            }
        }
        noise("ventral.noise", v.noise)?;
        positive("ventral.pairs_per_identity", v.pairs_per_identity)?;
        if v.learning == CortexLearning::Oja {
            positive("ventral.oja_epochs", v.oja_epochs)?;
            if v.backend != BackendKind::Svd {
                return Err(HarnessError::config("ventral.learning", "oja needs the svd backend"));
            }
        }
        self.check_layer_params("ventral", v.backend, v.dim)?;
        Ok(())
    }

    pub fn validate_mtl(&self) -> Result<()> {
        self.validate_common()?;
        let m = &self.mtl;
        for (f, v) in [("mtl.dim_a", m.dim_a), ("mtl.dim_b", m.dim_b)] {
            if v < 2 {
                return Err(HarnessError::config(f, "must be at least 2"));
            }
        }
        if m.cortex_faces.is_empty() || m.cortex_faces.contains(&0) {
            return Err(HarnessError::config("mtl.cortex_faces", "needs at least one positive size"));
        }
        positive("mtl.cortex_names", m.cortex_names)?;
        if m.cortex_rank == Some(0) {
            return Err(HarnessError::config("mtl.cortex_rank", "must be at least 1"));
        }
        positive("mtl.fonts", m.fonts)?;
        if !(m.font_strength.is_finite() && m.font_strength >= 0.0) {
            return Err(HarnessError::config("mtl.font_strength", "must be finite and non-negative"));
        }
        if m.study_sizes.is_empty() || m.study_sizes.contains(&0) {
            return Err(HarnessError::config("mtl.study_sizes", "needs at least one positive size"));
        }
        positive("mtl.study_views", m.study_views)?;
        if m.study_views + m.heldout_views > m.dim_a * m.dim_b * m.fonts {
            return Err(HarnessError::config("mtl.study_views", "more views than distinct combinations"));
        }
        noise("mtl.noise", m.noise)?;
        let width = m.cortex_faces.iter().max().copied().unwrap_or(0) + m.cortex_names;
        for (i, p) in m.wta_sweep.iter().enumerate() {
            check_wta(&format!("mtl.wta_sweep[{i}]"), p.k_wta, p.w, p.l)?;
            if p.k_wta > width.min(*m.cortex_faces.iter().min().unwrap() + m.cortex_names) {
                return Err(HarnessError::config(
                    &format!("mtl.wta_sweep[{i}].k_wta"),
                    "exceeds the hippocampal input width",
                ));
            }
        }
        let min_width = m.cortex_faces.iter().min().unwrap() + m.cortex_names;
        self.check_layer_params("mtl", m.backend, min_width)?;
        Ok(())
    }

    pub fn validate_equiv(&self) -> Result<()> {
        self.validate_common()?;
        let e = &self.equiv;
        positive("equiv.instances", e.instances)?;
        positive("equiv.queries", e.queries)?;
        positive("equiv.templates", e.templates)?;
        if e.dims.is_empty() || e.dims.iter().any(|&d| d < 2) {
            return Err(HarnessError::config("equiv.dims", "needs dimensions of at least 2"));
        }
        for (f, v) in [("equiv.rank_fractions", &e.rank_fractions), ("equiv.s_fractions", &e.s_fractions)] {
            if v.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
                return Err(HarnessError::config(f, "fractions must lie in (0, 1]"));
            }
        }
        let dmin = *e.dims.iter().min().unwrap();
        for (i, p) in e.wta_grid.iter().enumerate() {
            check_wta(&format!("equiv.wta_grid[{i}]"), p.k_wta, p.w, p.l)?;
            if p.k_wta > dmin {
                return Err(HarnessError::config(&format!("equiv.wta_grid[{i}].k_wta"), "exceeds the smallest dimension"));
            }
        }
        Ok(())
    }

    pub fn validate_oja(&self) -> Result<()> {
        self.validate_common()?;
        let o = &self.oja_demo;
        if o.dim < 1 {
            return Err(HarnessError::config("oja_demo.dim", "must be at least 1"));
        }
        if o.components == 0 || o.components > o.dim {
            return Err(HarnessError::config("oja_demo.components", "must lie in 1..=dim"));
        }
        if o.leading_variances.len() > o.dim {
            return Err(HarnessError::config("oja_demo.leading_variances", "more entries than dimensions"));
        }
        if o.leading_variances.iter().chain([&o.tail_variance]).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(HarnessError::config("oja_demo.leading_variances", "variances must be finite and non-negative"));
        }
        positive("oja_demo.samples", o.samples)?;
        positive("oja_demo.epochs", o.epochs)?;
        if !(o.eta0 > 0.0 && o.tau > 0.0) {
            return Err(HarnessError::config("oja_demo.eta0", "eta0 and tau must be positive"));
        }
        Ok(())
    }

    fn check_layer_params(&self, section: &str, kind: BackendKind, dim: usize) -> Result<()> {
        let b = &self.backend;
        match kind {
            BackendKind::Rp if b.s > dim => Err(HarnessError::config(
                "backend.s",
                format!("{} exceeds the {section} layer input dimension {dim}", b.s),
            )),
            BackendKind::Wta if b.k_wta > dim => Err(HarnessError::config(
                "backend.k_wta",
                format!("{} exceeds the {section} layer input dimension {dim}", b.k_wta),
            )),
            _ => Ok(()),
        }
    }
}

fn positive(field: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(HarnessError::config(field, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn noise(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(HarnessError::config(field, "must be finite and non-negative"))
    }
}

fn check_wta(section: &str, k: usize, w: usize, l: usize) -> Result<()> {
    if k < 2 {
        return Err(HarnessError::config(&format!("{section}.k_wta"), "must be at least 2"));
    }
    if w == 0 {
        return Err(HarnessError::config(&format!("{section}.w"), "must be at least 1"));
    }
    if l == 0 {
        return Err(HarnessError::config(&format!("{section}.l"), "must be at least 1"));
    }
    Ok(())
}
