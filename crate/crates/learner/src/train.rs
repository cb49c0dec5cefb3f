use std::path::Path;

use gestalt_core::dataset::MetricsReport;
use gestalt_core::{Label, SeededRng};
use serde::{Deserialize, Serialize};

use crate::augment::apply_plane;
use crate::config::{ModelConfig, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{classify, Model};

/// Errors are percentages. Training figures come from the minibatches as
/// they were seen (augmented, weights before each update).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_error: f64,
    pub val_loss: f64,
    pub val_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch whose weights were kept.
    pub selected_epoch: usize,
}

impl History {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for e in &self.epochs {
            w.serialize(e)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Vec<EpochStats>> {
        let mut r = csv::Reader::from_path(path)?;
        r.deserialize().map(|e| e.map_err(Error::from)).collect()
    }

    pub fn selected(&self) -> Option<&EpochStats> {
        self.epochs.get(self.selected_epoch.checked_sub(1)?)
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub history: History,
}

/// Mean loss and error (percent) of `model` on `data`.
pub fn assess(model: &Model, data: &Dataset) -> Result<(f64, f64)> {
    let (mut loss, mut wrong) = (0.0, 0usize);
    for (x, y) in data.inputs.iter().zip(&data.labels) {
        let z = model.logits(x)?;
        loss += crate::ops::cross_entropy(&z, y.id() as usize);
        let p = crate::ops::softmax(&z);
        wrong += (classify([p[0], p[1]]) != *y) as usize;
    }
    let n = data.len().max(1) as f64;
    Ok((loss / n, 100.0 * wrong as f64 / n))
}

pub fn predict(model: &Model, data: &Dataset) -> Result<Vec<Label>> {
    data.inputs.iter().map(|x| model.predict(x)).collect()
}

/// Confusion metrics of `model` on `data` (class 0 positive).
pub fn evaluate(model: &Model, data: &Dataset) -> Result<MetricsReport> {
    let preds = predict(model, data)?;
    Ok(MetricsReport::from_pairs(data.labels.iter().copied().zip(preds)))
}

/// Minibatch SGD with momentum (`v = μv - ηg; θ += v`). After every epoch
/// the validation error is measured; the weights of the first epoch with
/// the lowest validation error are returned. Single-threaded and fully
/// determined by the two seeds.
pub fn train(config: &ModelConfig, train_set: &Dataset, val_set: &Dataset, tc: &TrainConfig) -> Result<Trained> {
    tc.validate(train_set.len())?;
    if val_set.is_empty() {
        return Err(Error::Config("validation set is empty".into()));
    }
    for d in [train_set, val_set] {
        if d.side != config.input_side {
            return Err(Error::Shape {
                expected: config.input_len(),
                found: d.side * d.side,
            });
        }
    }
    let mut model = Model::new(config.clone())?;
    let mut velocity = model.zero_grads();
    let mut rng = SeededRng::new(tc.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = History::default();
    let mut best: Option<(f64, Model)> = None;

    for epoch in 1..=tc.epochs {
        rng.shuffle(&mut order);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(tc.batch_size) {
            let inputs: Vec<Vec<f64>> = batch
                .iter()
                .map(|&i| apply_plane(&train_set.inputs[i], train_set.side, &tc.augment.draw(&mut rng)))
                .collect();
            let xs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
            let ys: Vec<Label> = batch.iter().map(|&i| train_set.labels[i]).collect();
            let (loss, grads, ok) = model.loss_and_grad(&xs, &ys)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    history: Box::new(history),
                });
            }
            loss_sum += loss * batch.len() as f64;
            correct += ok;
            for ((p, v), g) in model.params_mut().iter_mut().zip(&mut velocity).zip(&grads) {
                for ((p, v), g) in p.iter_mut().zip(v.iter_mut()).zip(g) {
                    *v = tc.momentum * *v - tc.learning_rate * g;
                    *p += *v;
                }
            }
        }
        let (val_loss, val_error) = assess(&model, val_set)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                history: Box::new(history),
            });
        }
        let n = train_set.len() as f64;
        history.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / n,
            train_error: 100.0 * (1.0 - correct as f64 / n),
            val_loss,
            val_error,
        });
        if best.as_ref().map_or(true, |(e, _)| val_error < *e) {
            best = Some((val_error, model.clone()));
            history.selected_epoch = epoch;
        }
    }
    let (_, model) = best.expect("at least one epoch ran");
    Ok(Trained { model, history })
}
