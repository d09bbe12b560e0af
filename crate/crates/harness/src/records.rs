//! Result rows and their CSV / JSON emission.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{HarnessError, Result};
use crate::stats::percentile;

/// One measured value. Per-repetition rows carry `rep`; summary rows leave
/// it empty and report the median with its 25th/75th percentiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub metric: String,
    pub value: f64,
    pub rep: Option<usize>,
    /// Seed of the repetition (the base seed for summary rows).
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub p25: Option<f64>,
    pub p75: Option<f64>,
}

impl ResultRecord {
    pub fn new(experiment: &str, metric: &str, value: f64, rep: Option<usize>, seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            metric: metric.to_owned(),
            value,
            rep,
            seed,
            params: BTreeMap::new(),
            p25: None,
            p75: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn with_params(mut self, params: &BTreeMap<String, String>) -> Self {
        self.params.extend(params.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }
}

/// Median and quartile rows for every (metric, params) group of
/// per-repetition records, in first-appearance order.
pub fn summarize(records: &[ResultRecord], base_seed: u64) -> Vec<ResultRecord> {
    let mut order: Vec<(String, String, BTreeMap<String, String>)> = Vec::new();
    let mut groups: BTreeMap<(String, String, Vec<(String, String)>), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.rep.is_some()) {
        let key = (
            r.experiment.clone(),
            r.metric.clone(),
            r.params.clone().into_iter().collect::<Vec<_>>(),
        );
        let values = groups.entry(key).or_default();
        if values.is_empty() {
            order.push((r.experiment.clone(), r.metric.clone(), r.params.clone()));
        }
        values.push(r.value);
    }
    order
        .into_iter()
        .map(|(experiment, metric, params)| {
            let key = (experiment.clone(), metric.clone(), params.clone().into_iter().collect());
            let values = &groups[&key];
            let q = |p: f64| percentile(values, p).expect("group is non-empty");
            let mut row = ResultRecord::new(&experiment, &metric, q(50.0), None, base_seed).with_params(&params);
            row.p25 = Some(q(25.0));
            row.p75 = Some(q(75.0));
            row
        })
        .collect()
}

/// Sorted union of parameter names across records.
fn param_columns(records: &[ResultRecord]) -> Vec<String> {
    records
        .iter()
        .flat_map(|r| r.params.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

const FIXED: [&str; 5] = ["experiment", "metric", "value", "rep", "seed"];

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let columns = param_columns(records);
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<&str> = FIXED
        .iter()
        .copied()
        .chain(columns.iter().map(String::as_str))
        .chain(["p25", "p75"])
        .collect();
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in records {
        let mut row = vec![
            r.experiment.clone(),
            r.metric.clone(),
            r.value.to_string(),
            r.rep.map(|x| x.to_string()).unwrap_or_default(),
            r.seed.to_string(),
        ];
        row.extend(columns.iter().map(|c| r.params.get(c).cloned().unwrap_or_default()));
        row.push(opt_f64(r.p25));
        row.push(opt_f64(r.p75));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Parses a file written by [`write_csv`]. Empty parameter cells mean the
/// row does not carry that parameter.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let n = header.len();
    if n < FIXED.len() + 2 || header.iter().take(5).ne(FIXED) {
        return Err(HarnessError::Config(format!("{}: unexpected CSV header", path.display())));
    }
    let bad = |what: &str| HarnessError::Config(format!("{}: bad {what}", path.display()));
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("number"));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { float(s).map(Some) };
        let mut params = BTreeMap::new();
        for i in 5..n - 2 {
            if !row[i].is_empty() {
                params.insert(header[i].to_owned(), row[i].to_owned());
            }
        }
        out.push(ResultRecord {
            experiment: row[0].to_owned(),
            metric: row[1].to_owned(),
            value: float(&row[2])?,
            rep: if row[3].is_empty() {
                None
            } else {
                Some(row[3].parse().map_err(|_| bad("rep"))?)
            },
            seed: row[4].parse().map_err(|_| bad("seed"))?,
            params,
            p25: opt(&row[n - 2])?,
            p75: opt(&row[n - 1])?,
        });
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Config(format!("{}: {other:?}", path.display())),
    }
}

/// The nested JSON document: the run's configuration plus every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
}

pub fn write_json(path: &Path, doc: &ResultDocument) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| HarnessError::Config(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<ResultDocument> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// Writes `<dir>/<experiment>.csv` and/or `.json`; returns the paths written.
pub fn write_results(
    cfg: &ExperimentConfig,
    experiment: &str,
    records: &[ResultRecord],
) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    if matches!(cfg.output.format, OutputFormat::Csv | OutputFormat::Both) {
        let path = dir.join(format!("{experiment}.csv"));
        write_csv(&path, records)?;
        written.push(path);
    }
    if matches!(cfg.output.format, OutputFormat::Json | OutputFormat::Both) {
        let path = dir.join(format!("{experiment}.json"));
        let doc = ResultDocument {
            experiment: experiment.to_owned(),
            config: cfg.clone(),
            records: records.to_vec(),
        };
        write_json(&path, &doc)?;
        written.push(path);
    }
    Ok(written)
}
