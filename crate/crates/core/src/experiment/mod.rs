//! Experiment configuration, training runs and result tables.

mod config;
mod runners;
mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::Architecture;

pub use config::{Experiment, ExperimentConfig, OptimizerKind};
pub use table::{table, Table};

/// Deterministic outcome of a run, written to `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub model: Architecture,
    pub layers: String,
    pub basis: String,
    pub n_params: usize,
    /// Name of the headline error column.
    pub error_metric: String,
    pub error: f64,
    pub final_loss: f64,
    pub metrics: BTreeMap<String, f64>,
    /// Files relative to the run directory.
    pub loss_curve: String,
    pub fields: Vec<String>,
    pub config_hash: String,
}

/// Wall-clock measurements, written to `timing.json` so that
/// `metrics.json` stays reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub train_seconds: f64,
    pub mean_epoch_seconds: f64,
    pub epoch_seconds: Vec<f64>,
}

impl Timing {
    fn finish(&mut self) {
        self.train_seconds = self.epoch_seconds.iter().sum();
        if !self.epoch_seconds.is_empty() {
            self.mean_epoch_seconds = self.train_seconds / self.epoch_seconds.len() as f64;
        }
    }
}

/// Loss curve with named columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Curve {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    fn new(columns: &[&'static str]) -> Self {
        Curve {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&self.columns)
                .map(|(v, c)| if *c == "epoch" { format!("{v}") } else { format!("{v:e}") })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// What a runner hands back to [`run`].
struct Outcome {
    n_params: usize,
    error_metric: &'static str,
    error: f64,
    final_loss: f64,
    metrics: BTreeMap<String, f64>,
    curve: Curve,
    fields: Vec<String>,
    timing: Timing,
}

/// Everything a completed run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: ExperimentResult,
    pub timing: Timing,
    pub curve: Curve,
    pub dir: PathBuf,
}

/// Trains and evaluates `config`, writing `config.json`, `metrics.json`,
/// `timing.json`, `loss.csv` and the prediction files into its output
/// directory.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let dir = config.out_dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    let mut out = match config.experiment {
        Experiment::Nonsmooth2d => runners::nonsmooth2d(config),
        Experiment::Multiscale1d | Experiment::Ntk => runners::multiscale(config),
        Experiment::Heat | Experiment::Helmholtz => runners::pinn(config),
        Experiment::Deeponet => runners::deeponet(config),
        Experiment::Mnist => runners::mnist(config),
    }?;
    out.timing.finish();
    out.curve.write(&dir.join("loss.csv"))?;
    let result = ExperimentResult {
        experiment: config.experiment,
        model: config.model,
        layers: config.layers_label(),
        basis: config.basis_label().to_string(),
        n_params: out.n_params,
        error_metric: out.error_metric.to_string(),
        error: out.error,
        final_loss: out.final_loss,
        metrics: out.metrics,
        loss_curve: "loss.csv".into(),
        fields: out.fields,
        config_hash: config.hash(),
    };
    if !result.error.is_finite() || !result.final_loss.is_finite() {
        return Err(Error::NonFinite(format!(
            "{} produced error {} and loss {}",
            config.experiment, result.error, result.final_loss
        )));
    }
    std::fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&result)?)?;
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&out.timing)?)?;
    Ok(RunOutput {
        result,
        timing: out.timing,
        curve: out.curve,
        dir,
    })
}

/// Process exit code for a failed run: 1 usage, 2 numeric, 3 missing data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonFinite(_) | Error::Numerical(_) => 2,
        Error::MissingData(_) => 3,
        _ => 1,
    }
}
