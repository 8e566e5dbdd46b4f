use std::path::{Path, PathBuf};

use super::{ExperimentResult, Timing};
use crate::error::{Error, Result};
use crate::layers::Architecture;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub dir: PathBuf,
    pub result: ExperimentResult,
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Sorted by error, ascending.
    pub rows: Vec<TableRow>,
    /// Directories whose metrics could not be read.
    pub skipped: Vec<(PathBuf, String)>,
}

fn read_row(dir: &Path) -> Result<TableRow> {
    let text = std::fs::read_to_string(dir.join("metrics.json"))?;
    let result: ExperimentResult = serde_json::from_str(&text)?;
    if !result.error.is_finite() {
        return Err(Error::Format(format!("error value {} is not finite", result.error)));
    }
    let timing = std::fs::read_to_string(dir.join("timing.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    Ok(TableRow {
        dir: dir.to_path_buf(),
        result,
        timing,
    })
}

/// Collects completed runs. Unreadable runs are reported in `skipped`.
pub fn table(dirs: &[PathBuf]) -> Result<Table> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for d in dirs {
        match read_row(d) {
            Ok(r) => rows.push(r),
            Err(e) => skipped.push((d.clone(), e.to_string())),
        }
    }
    if rows.is_empty() {
        return Err(Error::MissingData("no completed runs among the given directories".into()));
    }
    rows.sort_by(|a, b| a.result.error.total_cmp(&b.result.error));
    Ok(Table { rows, skipped })
}

fn time_cell(t: &Option<Timing>) -> String {
    t.as_ref().map_or("-".into(), |t| format!("{:.2}", t.train_seconds))
}

impl Table {
    /// Mean epoch time of the RBF variants over that of the B-spline KAN,
    /// when both are present.
    pub fn rbf_spline_time_ratio(&self) -> Option<f64> {
        let mean = |pred: &dyn Fn(Architecture) -> bool| {
            let v: Vec<f64> = self
                .rows
                .iter()
                .filter(|r| pred(r.result.model))
                .filter_map(|r| r.timing.as_ref().map(|t| t.mean_epoch_seconds))
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let rbf = mean(&|m| matches!(m, Architecture::RbfKan | Architecture::FreeRbfKan))?;
        let spline = mean(&|m| m == Architecture::Kan)?;
        (spline > 0.0).then(|| rbf / spline)
    }

    pub fn markdown(&self) -> String {
        let metric = &self.rows[0].result.error_metric;
        let mut s = format!(
            "| Model | Layers | Basis | #Param | {metric} | Time (s) |\n|---|---|---|---|---|---|\n"
        );
        for r in &self.rows {
            let x = &r.result;
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.3e} | {} |\n",
                x.model.label(),
                x.layers,
                x.basis,
                x.n_params,
                x.error,
                time_cell(&r.timing)
            ));
        }
        if let Some(ratio) = self.rbf_spline_time_ratio() {
            s.push_str(&format!("\nRBF / B-spline epoch time ratio: {ratio:.3}\n"));
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("model,layers,basis,n_params,error_metric,error,train_seconds,mean_epoch_seconds\n");
        for r in &self.rows {
            let x = &r.result;
            let (t, e) = r
                .timing
                .as_ref()
                .map_or((String::new(), String::new()), |t| {
                    (format!("{}", t.train_seconds), format!("{}", t.mean_epoch_seconds))
                });
            s.push_str(&format!(
                "{},\"{}\",{},{},{},{:e},{},{}\n",
                x.model.name(),
                x.layers,
                x.basis,
                x.n_params,
                x.error_metric,
                x.error,
                t,
                e
            ));
        }
        s
    }
}
