use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// One statistic of one cell. `step` indexes trials, iterations or grid
/// points depending on the statistic; `status` is `ok` or the error of a
/// failed trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub shape: String,
    pub rank: String,
    pub snr_db: String,
    pub algorithm: String,
    pub statistic: String,
    pub step: Option<usize>,
    pub param: Option<f64>,
    pub value: f64,
    pub trials: usize,
    pub status: String,
}

/// Cell labels shared by the rows of one experiment cell.
#[derive(Clone, Debug, Default)]
pub struct Cell {
    pub experiment: String,
    pub shape: String,
    pub rank: String,
    pub snr_db: String,
    pub algorithm: String,
    pub trials: usize,
}

impl Cell {
    pub fn row(&self, statistic: &str, value: f64) -> ResultRow {
        ResultRow {
            experiment: self.experiment.clone(),
            shape: self.shape.clone(),
            rank: self.rank.clone(),
            snr_db: self.snr_db.clone(),
            algorithm: self.algorithm.clone(),
            statistic: statistic.to_string(),
            step: None,
            param: None,
            value,
            trials: self.trials,
            status: "ok".into(),
        }
    }

    pub fn step_row(&self, statistic: &str, step: usize, value: f64) -> ResultRow {
        ResultRow {
            step: Some(step),
            ..self.row(statistic, value)
        }
    }

    pub fn error_row(&self, trial: usize, error: &str) -> ResultRow {
        ResultRow {
            status: format!("error: {error}"),
            ..self.step_row("trial_error", trial, f64::NAN)
        }
    }

    pub fn with_algorithm(&self, algorithm: impl Into<String>) -> Cell {
        Cell {
            algorithm: algorithm.into(),
            ..self.clone()
        }
    }
}

/// Finds the value of a statistic in a row set.
pub fn lookup(rows: &[ResultRow], filter: impl Fn(&ResultRow) -> bool) -> Option<f64> {
    rows.iter().find(|r| filter(r)).map(|r| r.value)
}

/// Writes `resolved-config.txt`, `results.csv` and `results.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("resolved-config.txt"), config.to_text())?;
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(rows)?;
    fs::write(dir.join("results.json"), json + "\n")?;
    Ok(())
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
