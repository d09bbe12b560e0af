//! Command-line interface.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use hwarch_core::BackendKind;

use crate::config::{Experiment, ExperimentConfig, OutputFormat, Overrides};
use crate::dataset::{write_dataset, Dataset};
use crate::error::{HarnessError, Result};
use crate::records::{write_results, ResultRecord};
use crate::{equiv, mtl, oja_demo, replay, ventral};

#[derive(Debug, Parser)]
#[command(name = "hwarch", version, about = "Hubel-Wiesel architecture experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Base seed; every repetition and cell seed is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    /// Ventral: cortex backend. MTL, save: hippocampal backend. Equiv: only this backend's rows.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Which result files to write.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Same-different matching of unfamiliar identities.
    Ventral,
    /// Face-name association recall across study-set sizes.
    Mtl,
    /// Approximate backends against exact modules.
    Equiv,
    /// Online principal directions against the batch SVD.
    OjaDemo,
    /// Study an MTL model and write a snapshot.
    Save {
        /// Snapshot path; defaults to `<out>/model.hwsn`.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Restore a snapshot and replay its recorded metrics.
    Load { snapshot: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Svd,
    Rp,
    Wta,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => BackendKind::Exact,
            BackendArg::Svd => BackendKind::Svd,
            BackendArg::Rp => BackendKind::Rp,
            BackendArg::Wta => BackendKind::Wta,
        }
    }
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            reps: self.reps,
            backend: self.backend.map(Into::into),
            format: self.format,
        }
    }

    fn config(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides(), experiment);
        Ok(cfg)
    }
}

/// What a command produced, for the terminal.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub written: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Ventral => {
            let cfg = cli.config(Experiment::Ventral)?;
            let records = ventral::run(&cfg)?;
            let mut out = finish(&cfg, ventral::NAME, &records)?;
            if cfg.output.write_datasets {
                for rep in 0..cfg.reps {
                    let data = ventral::dataset(&cfg, ventral::rep_seed(&cfg, rep))?;
                    out.written.push(dataset_file(&cfg, "ventral", rep, &Dataset::Identity(data))?);
                }
            }
            Ok(out)
        }
        Command::Mtl => {
            let cfg = cli.config(Experiment::Mtl)?;
            let records = mtl::run(&cfg)?;
            let mut out = finish(&cfg, mtl::NAME, &records)?;
            if cfg.output.write_datasets {
                for rep in 0..cfg.reps {
                    let data = mtl::association(&cfg, mtl::rep_seed(&cfg, rep))?;
                    out.written.push(dataset_file(&cfg, "mtl", rep, &Dataset::Association(data))?);
                }
            }
            Ok(out)
        }
        Command::Equiv => {
            let cfg = cli.config(Experiment::Equiv)?;
            let records = equiv::run(&cfg, cli.backend.map(Into::into))?;
            finish(&cfg, equiv::NAME, &records)
        }
        Command::OjaDemo => {
            let cfg = cli.config(Experiment::OjaDemo)?;
            let records = oja_demo::run(&cfg)?;
            finish(&cfg, oja_demo::NAME, &records)
        }
        Command::Save { snapshot } => {
            let cfg = cli.config(Experiment::Mtl)?;
            let path = snapshot.clone().unwrap_or_else(|| cfg.output.dir.join("model.hwsn"));
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
            }
            let meta = replay::save(&cfg, &path)?;
            let mut out = finish(&cfg, "save", &meta.records)?;
            out.written.insert(0, path);
            Ok(out)
        }
        Command::Load { snapshot } => {
            let (meta, records) = replay::load(snapshot)?;
            let mut cfg = meta.config;
            cfg.apply(&cli.overrides(), Experiment::Mtl);
            let mut out = finish(&cfg, "load", &records)?;
            out.lines.push(format!("replayed {} metrics bit-exactly", records.len()));
            Ok(out)
        }
    }
}

fn finish(cfg: &ExperimentConfig, experiment: &str, records: &[ResultRecord]) -> Result<Outcome> {
    let written = write_results(cfg, experiment, records)?;
    Ok(Outcome {
        lines: records.iter().filter(|r| r.rep.is_none() || experiment == "save" || experiment == "load").map(describe).collect(),
        written,
    })
}

fn dataset_file(cfg: &ExperimentConfig, name: &str, rep: usize, data: &Dataset) -> Result<PathBuf> {
    let dir = cfg.output.dir.join("datasets");
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let path = dir.join(format!("{name}_rep{rep:03}.json"));
    write_dataset(&path, data)?;
    Ok(path)
}

fn describe(r: &ResultRecord) -> String {
    let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let value = if r.value != 0.0 && r.value.abs() < 1e-3 {
        format!("{:.3e}", r.value)
    } else {
        format!("{:.6}", r.value)
    };
    let mut line = format!("{:<40} {value:>12}", r.metric);
    if let (Some(lo), Some(hi)) = (r.p25, r.p75) {
        line.push_str(&format!("  [{lo:.4}, {hi:.4}]"));
    }
    if !params.is_empty() {
        line.push_str("  ");
        line.push_str(&params.join(" "));
    }
    line
}
