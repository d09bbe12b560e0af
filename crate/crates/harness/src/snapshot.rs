//! Versioned binary model snapshots.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "HWARCHSN" | version u32 | payload length u64 | payload | SHA-256
//! ```
//!
//! The digest covers everything before it. Floats are stored as their IEEE
//! bit patterns, so a restored model answers every query bit-for-bit like
//! the saved one.

use std::fs;
use std::path::Path;

use hwarch_core::linalg::Matrix;
use hwarch_core::{
    AugmentPolicy, CortexHippocampusModel, ExactModule, HwLayer, LayerModules, LshModule, LshModules,
    Pooling, ProjectionSharing, RpModule, RpModules, RpProjection, Similarity, SvdModule, TemplateBook,
    WtaHashFamily,
};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 8] = b"HWARCHSN";
pub const VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 8;
const DIGEST: usize = 32;

/// A model plus free-form metadata (JSON in practice).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSnapshot {
    pub metadata: String,
    pub model: CortexHippocampusModel,
}

pub fn encode(snapshot: &ModelSnapshot) -> Vec<u8> {
    let mut w = Writer::default();
    w.string(&snapshot.metadata);
    let m = &snapshot.model;
    w.layer(m.cortex1());
    match m.cortex2() {
        Some(c2) => {
            w.u8(1);
            w.layer(c2);
        }
        None => w.u8(0),
    }
    w.layer(m.hippocampus());

    let payload = w.buf;
    let mut out = Vec::with_capacity(HEADER + payload.len() + DIGEST);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode(bytes: &[u8]) -> Result<ModelSnapshot> {
    if bytes.len() < HEADER {
        return Err(corrupt("truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(corrupt("not a model snapshot"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(HarnessError::Version {
            found: version,
            supported: VERSION,
        });
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let expected = (HEADER as u64).checked_add(len).and_then(|n| n.checked_add(DIGEST as u64));
    match expected {
        Some(n) if n == bytes.len() as u64 => {}
        Some(n) if n > bytes.len() as u64 => return Err(corrupt("truncated")),
        _ => return Err(corrupt("trailing bytes or bad length")),
    }
    let body = bytes.len() - DIGEST;
    if Sha256::digest(&bytes[..body]).as_slice() != &bytes[body..] {
        return Err(corrupt("checksum mismatch"));
    }

    let mut r = Reader {
        buf: &bytes[HEADER..body],
    };
    let metadata = r.string()?;
    let cortex1 = r.layer()?;
    let cortex2 = match r.u8()? {
        0 => None,
        1 => Some(r.layer()?),
        t => return Err(corrupt(format!("bad cortex-2 flag {t}"))),
    };
    let hippocampus = r.layer()?;
    if !r.buf.is_empty() {
        return Err(corrupt("unread payload bytes"));
    }
    let model = CortexHippocampusModel::new(cortex1, cortex2, hippocampus).map_err(model_corrupt)?;
    Ok(ModelSnapshot { metadata, model })
}

pub fn save_model(path: &Path, snapshot: &ModelSnapshot) -> Result<()> {
    fs::write(path, encode(snapshot)).map_err(|e| HarnessError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelSnapshot> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode(&bytes)
}

fn corrupt(msg: impl Into<String>) -> HarnessError {
    HarnessError::CorruptSnapshot(msg.into())
}

fn model_corrupt(e: hwarch_core::Error) -> HarnessError {
    corrupt(format!("inconsistent model state: {e}"))
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        v.iter().for_each(|x| self.f64(*x));
    }

    fn u32s(&mut self, v: &[u32]) {
        self.usize(v.len());
        v.iter().for_each(|x| self.u32(*x));
    }

    fn string(&mut self, s: &str) {
        self.usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn matrix(&mut self, m: &Matrix) {
        self.usize(m.rows());
        self.usize(m.cols());
        self.f64s(m.as_slice());
    }

    fn book(&mut self, b: &TemplateBook) {
        self.usize(b.id());
        self.usize(b.dim());
        self.f64s(b.as_flat());
    }

    fn layer(&mut self, layer: &HwLayer) {
        self.usize(layer.input_dim());
        match layer.similarity() {
            Similarity::NormalizedDot => self.u8(0),
            Similarity::SigmoidDot { gain } => {
                self.u8(1);
                self.f64(gain);
            }
        }
        self.u8(match layer.pooling() {
            Pooling::Max => 0,
            Pooling::Sum => 1,
        });
        match layer.modules() {
            LayerModules::Exact(modules) => {
                self.u8(0);
                self.usize(modules.len());
                modules.iter().for_each(|m| self.book(m.book()));
            }
            LayerModules::Svd { rank, modules } => {
                self.u8(1);
                self.usize(*rank);
                self.usize(modules.len());
                for m in modules {
                    self.usize(m.id());
                    self.usize(m.target_rank());
                    self.matrix(m.basis());
                    self.matrix(m.projected());
                    self.f64s(m.singular_values());
                    match m.raw() {
                        Some(b) => {
                            self.u8(1);
                            self.book(b);
                        }
                        None => self.u8(0),
                    }
                }
            }
            LayerModules::Rp(rp) => {
                self.u8(2);
                self.usize(rp.dim());
                self.usize(rp.initial_s());
                self.u64(rp.seed());
                self.u8(match rp.sharing() {
                    ProjectionSharing::Shared => 0,
                    ProjectionSharing::PerModule => 1,
                });
                match rp.policy() {
                    AugmentPolicy::Never => self.u8(0),
                    AugmentPolicy::Always => self.u8(1),
                    AugmentPolicy::JlBound { eps, c } => {
                        self.u8(2);
                        self.f64(eps);
                        self.f64(c);
                    }
                }
                self.usize(rp.projections().len());
                for p in rp.projections() {
                    self.usize(p.dim());
                    self.u64(p.seed());
                    self.u64(p.draws());
                    self.usize(p.columns().len());
                    p.columns().iter().for_each(|c| self.f64s(c));
                }
                self.usize(rp.modules().len());
                for m in rp.modules() {
                    self.book(m.raw());
                    self.usize(m.projected().len());
                    m.projected().iter().for_each(|row| self.f64s(row));
                }
            }
            LayerModules::Wta(lsh) => {
                self.u8(3);
                let f = lsh.family();
                self.usize(f.dim());
                self.usize(f.num_hashes());
                self.usize(f.bands());
                self.usize(f.window());
                self.u64(f.seed());
                self.usize(f.permutations().len());
                f.permutations().iter().for_each(|p| self.u32s(p));
                self.usize(lsh.modules().len());
                for m in lsh.modules() {
                    self.book(m.templates());
                    self.u32s(m.codes());
                }
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() < n {
            return Err(corrupt("payload ends early"));
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| corrupt("length overflows usize"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    /// A length prefix for items of `width` bytes, checked against what is left.
    fn len(&mut self, width: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.checked_mul(width).is_none_or(|bytes| bytes > self.buf.len()) {
            return Err(corrupt("length prefix exceeds payload"));
        }
        Ok(n)
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        (0..n).map(|_| self.u32()).collect()
    }

    fn string(&mut self) -> Result<String> {
        let n = self.len(1)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("metadata is not UTF-8"))
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.usize()?;
        let cols = self.usize()?;
        let data = self.f64s()?;
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(corrupt("matrix shape does not match its data"));
        }
        Ok(Matrix::from_row_major(rows, cols, data))
    }

    fn book(&mut self) -> Result<TemplateBook> {
        let id = self.usize()?;
        let dim = self.usize()?;
        let data = self.f64s()?;
        TemplateBook::from_raw_rows(id, dim, data).map_err(model_corrupt)
    }

    fn layer(&mut self) -> Result<HwLayer> {
        let input_dim = self.usize()?;
        let similarity = match self.u8()? {
            0 => Similarity::NormalizedDot,
            1 => Similarity::SigmoidDot { gain: self.f64()? },
            t => return Err(corrupt(format!("bad similarity tag {t}"))),
        };
        let pooling = match self.u8()? {
            0 => Pooling::Max,
            1 => Pooling::Sum,
            t => return Err(corrupt(format!("bad pooling tag {t}"))),
        };
        let modules = match self.u8()? {
            0 => {
                let n = self.len(16)?;
                let modules = (0..n)
                    .map(|_| self.book().map(ExactModule::from_book))
                    .collect::<Result<Vec<_>>>()?;
                LayerModules::Exact(modules)
            }
            1 => {
                let rank = self.usize()?;
                let n = self.len(16)?;
                let mut modules = Vec::with_capacity(n);
                for _ in 0..n {
                    let id = self.usize()?;
                    let target = self.usize()?;
                    let basis = self.matrix()?;
                    let projected = self.matrix()?;
                    let singular_values = self.f64s()?;
                    let raw = match self.u8()? {
                        0 => None,
                        1 => Some(self.book()?),
                        t => return Err(corrupt(format!("bad raw-book flag {t}"))),
                    };
                    modules.push(
                        SvdModule::from_parts(id, target, basis, projected, singular_values, raw)
                            .map_err(model_corrupt)?,
                    );
                }
                LayerModules::Svd { rank, modules }
            }
            2 => {
                let dim = self.usize()?;
                let initial_s = self.usize()?;
                let seed = self.u64()?;
                let sharing = match self.u8()? {
                    0 => ProjectionSharing::Shared,
                    1 => ProjectionSharing::PerModule,
                    t => return Err(corrupt(format!("bad sharing tag {t}"))),
                };
                let policy = match self.u8()? {
                    0 => AugmentPolicy::Never,
                    1 => AugmentPolicy::Always,
                    2 => AugmentPolicy::JlBound {
                        eps: self.f64()?,
                        c: self.f64()?,
                    },
                    t => return Err(corrupt(format!("bad policy tag {t}"))),
                };
                let n = self.len(32)?;
                let mut projections = Vec::with_capacity(n);
                for _ in 0..n {
                    let pdim = self.usize()?;
                    let pseed = self.u64()?;
                    let draws = self.u64()?;
                    let k = self.len(8)?;
                    let columns = (0..k).map(|_| self.f64s()).collect::<Result<Vec<_>>>()?;
                    projections.push(RpProjection::from_parts(pdim, pseed, draws, columns).map_err(model_corrupt)?);
                }
                let n = self.len(32)?;
                let mut modules = Vec::with_capacity(n);
                for _ in 0..n {
                    let raw = self.book()?;
                    let k = self.len(8)?;
                    let projected = (0..k).map(|_| self.f64s()).collect::<Result<Vec<_>>>()?;
                    modules.push(RpModule::from_parts(raw, projected).map_err(model_corrupt)?);
                }
                LayerModules::Rp(
                    RpModules::from_parts(dim, initial_s, seed, sharing, policy, projections, modules)
                        .map_err(model_corrupt)?,
                )
            }
            3 => {
                let dim = self.usize()?;
                let num_hashes = self.usize()?;
                let bands = self.usize()?;
                let window = self.usize()?;
                let seed = self.u64()?;
                let n = self.len(8)?;
                let permutations = (0..n).map(|_| self.u32s()).collect::<Result<Vec<_>>>()?;
                let family = WtaHashFamily::from_parts(dim, num_hashes, bands, window, seed, permutations)
                    .map_err(model_corrupt)?;
                let n = self.len(32)?;
                let mut modules = Vec::with_capacity(n);
                for _ in 0..n {
                    let templates = self.book()?;
                    let codes = self.u32s()?;
                    modules.push(LshModule::from_parts(&family, templates, codes).map_err(model_corrupt)?);
                }
                LayerModules::Wta(LshModules::from_parts(family, modules))
            }
            t => return Err(corrupt(format!("bad backend tag {t}"))),
        };
        HwLayer::new(input_dim, similarity, pooling, modules).map_err(model_corrupt)
    }
}
