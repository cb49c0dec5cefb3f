use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use crate::error::{Error, Result};
use crate::sample::Label;

/// Confusion counts and rates in percent. Class 0 (concept holds) is the
/// positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub error_rate: f64,
    /// No sample was predicted positive; `precision` is reported as 0.
    pub precision_undefined: bool,
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> MetricsReport {
        let total = tp + fp + tn + fn_;
        let accuracy = pct(tp + tn, total);
        MetricsReport {
            tp,
            fp,
            tn,
            fn_,
            accuracy,
            precision: pct(tp, tp + fp),
            recall: pct(tp, tp + fn_),
            error_rate: if total == 0 { 0.0 } else { 100.0 - accuracy },
            precision_undefined: tp + fp == 0,
        }
    }

    /// From `(truth, prediction)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> MetricsReport {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (truth, pred) in pairs {
            match (truth, pred) {
                (Label::Holds, Label::Holds) => tp += 1,
                (Label::Violated, Label::Holds) => fp += 1,
                (Label::Violated, Label::Violated) => tn += 1,
                (Label::Holds, Label::Violated) => fn_ += 1,
            }
        }
        MetricsReport::from_counts(tp, fp, tn, fn_)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Accuracy of `self` minus accuracy of `other`, in percentage points.
    pub fn accuracy_gap(&self, other: &MetricsReport) -> f64 {
        self.accuracy - other.accuracy
    }
}

/// Score `predictions` (record path, predicted class) against the manifest.
/// Every record must be predicted exactly once.
pub fn evaluate(manifest: &Manifest, predictions: &[(String, Label)]) -> Result<MetricsReport> {
    let truth: HashMap<&str, Label> = manifest.records.iter().map(|r| (r.path.as_str(), r.label)).collect();
    let mut seen: HashMap<&str, Label> = HashMap::with_capacity(predictions.len());
    for (path, pred) in predictions {
        if !truth.contains_key(path.as_str()) {
            return Err(Error::Evaluation(format!("prediction for unknown sample {path}")));
        }
        if seen.insert(path.as_str(), *pred).is_some() {
            return Err(Error::Evaluation(format!("duplicate prediction for {path}")));
        }
    }
    if let Some(missing) = manifest.records.iter().find(|r| !seen.contains_key(r.path.as_str())) {
        return Err(Error::Evaluation(format!(
            "{} of {} samples have no prediction, first {}",
            truth.len() - seen.len(),
            truth.len(),
            missing.path
        )));
    }
    Ok(MetricsReport::from_pairs(seen.iter().map(|(p, pred)| (truth[p], *pred))))
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRow {
    path: String,
    class: u8,
}

/// Predictions CSV with header `path,class`.
pub fn read_predictions(path: &Path) -> Result<Vec<(String, Label)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Format {
        what: "predictions",
        detail: format!("{}: {e}", path.display()),
    })?;
    rdr.deserialize::<PredictionRow>()
        .map(|row| {
            let row = row?;
            Ok((row.path, Label::from_id(row.class)?))
        })
        .collect()
}

pub fn write_predictions(path: &Path, predictions: &[(String, Label)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (p, l) in predictions {
        w.serialize(PredictionRow {
            path: p.clone(),
            class: l.id(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One header line and one data row.
pub fn write_report_csv(path: &Path, report: &MetricsReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(report)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_report_csv(path: &Path) -> Result<MetricsReport> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize()
        .next()
        .ok_or_else(|| Error::Format {
            what: "metrics csv",
            detail: "no data row".into(),
        })?
        .map_err(Error::from)
}
