//! Experiment harness for Hubel-Wiesel architectures: configuration, the
//! ventral-stream and MTL experiment drivers, backend equivalence checks,
//! snapshots and result files.

pub mod build;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod equiv;
pub mod error;
pub mod mtl;
pub mod oja_demo;
pub mod records;
pub mod replay;
pub mod snapshot;
pub mod stats;
pub mod ventral;

pub use config::{ExperimentConfig, Overrides};
pub use error::{HarnessError, Result};
pub use records::ResultRecord;
pub use snapshot::{load_model, save_model, ModelSnapshot};
