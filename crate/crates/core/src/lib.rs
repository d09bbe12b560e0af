//! Hubel-Wiesel modules as data structures.
//!
//! A module stores templates (INSERT) and answers a query with a pooled
//! similarity (QUERY). Layers of modules produce signatures; stacked layers
//! form an architecture, and a cortex + hippocampus pair gives an episodic
//! memory. Four storage backends are provided: exact template books, SVD or
//! Oja-compressed bases, shared random projections, and WTA locality
//! sensitive hashing.
//!
//! The crate is `no_std` with `alloc`; enable `std` for `std::error::Error`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod book;
pub mod error;
pub mod exact;
pub mod layer;
pub mod linalg;
pub mod memory;
pub mod rng;
pub mod rp;
pub mod svd;
pub mod synth;
pub mod vector;
pub mod wta;

pub use book::TemplateBook;
pub use error::{Error, Result};
pub use exact::{classify, exact_insert, exact_query, ExactModule, Signature};
pub use layer::{BackendKind, HwArchitecture, HwLayer, LayerModules};
pub use memory::{calibrate_threshold, CortexHippocampusModel, Episode, ScoredPair};
pub use rp::{AugmentPolicy, InsertReport, ProjectionSharing, RpModule, RpModules, RpProjection};
pub use svd::{oja_train, LearningRate, OjaLearner, SvdModule};
pub use vector::{FeatureVector, Pooling, Similarity};
pub use wta::{HashCode, LshModule, LshModules, WtaHashFamily, EMPTY_CANDIDATES};
