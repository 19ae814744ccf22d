use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Summary};
use crate::bounds::{upper_budget, BudgetReport};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// The JSON document written for one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub budget: BudgetReport,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, summary: Summary) -> Result<Self> {
        let budget = upper_budget(&config.prior, config.delta)?;
        Ok(Self {
            config,
            budget,
            summary,
        })
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial_index: u64,
    seed: u64,
    tau: u64,
    recommendation: usize,
    correct: bool,
    stop_reason: &'a str,
}

pub fn write_csv(summary: &Summary, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in &summary.per_trial {
        w.serialize(CsvRow {
            trial_index: r.trial_index,
            seed: r.seed,
            tau: r.tau,
            recommendation: r.recommendation,
            correct: r.correct,
            stop_reason: r.stop_reason.as_str(),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(report: &ExperimentReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes the report in the requested format.
pub fn emit(report: &ExperimentReport, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(&report.summary, path.as_ref()),
        OutputFormat::Json => write_json(report, path.as_ref()),
    }
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
