use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::stats::EstimateWithCI;
use crate::{Error, Result};

/// Version written into every result line.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub train_error: f64,
    pub validation_error: f64,
    pub l1_objective: f64,
    pub duality_gap: f64,
    pub iterations: usize,
}

/// One experiment run at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub name: String,
    pub point: usize,
    /// The configuration of this point, sweep resolved.
    pub config: ExperimentConfig,
    pub seed: u64,
    pub train_seed: u64,
    pub test_seed: u64,
    pub benchmark_seed: u64,
    pub repetition_seeds: Vec<u64>,
    pub validation_seed: Option<u64>,
    pub status: RunStatus,
    pub error: Option<String>,
    pub chosen: Option<usize>,
    pub candidates: Vec<CandidateSummary>,
    pub train_error: Option<f64>,
    pub validation_error: Option<f64>,
    pub test_error: Option<EstimateWithCI>,
    /// Exact error of the hypothesis on the planted distribution, when enumerable.
    pub population_error: Option<f64>,
    /// Smoothed error of the planted halfspace at the configured `sigma`.
    pub smoothed_benchmark: Option<EstimateWithCI>,
    pub wall_clock_secs: Option<f64>,
    pub lemma_checks: Vec<LemmaRow>,
}

/// One line of a lemma-check results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub schema_version: u32,
    pub lemma: String,
    pub check: String,
    pub params: serde_json::Value,
    pub measured: f64,
    /// Monte Carlo allowance subtracted from `measured` before comparing.
    pub slack: f64,
    /// Bound after scaling.
    pub bound: f64,
    pub bound_scale: f64,
    pub pass: bool,
}

impl LemmaRow {
    pub fn new(
        lemma: &str,
        check: &str,
        params: serde_json::Value,
        measured: f64,
        slack: f64,
        bound: f64,
        bound_scale: f64,
    ) -> Self {
        let bound = bound * bound_scale;
        Self {
            schema_version: SCHEMA_VERSION,
            lemma: lemma.to_string(),
            check: check.to_string(),
            params,
            measured,
            slack,
            bound,
            bound_scale,
            pass: measured.is_finite() && measured - slack <= bound,
        }
    }
}

/// Appends one JSON line per item.
pub fn append_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    f.write_all(&buf)?;
    Ok(())
}

#[derive(Deserialize)]
struct Versioned {
    schema_version: u32,
}

fn read_versioned<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Versioned = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema { found: v.schema_version, expected: SCHEMA_VERSION });
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    read_versioned(path)
}

pub fn read_lemma_rows(path: impl AsRef<Path>) -> Result<Vec<LemmaRow>> {
    read_versioned(path)
}
