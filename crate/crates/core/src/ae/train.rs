//! Mini-batch training for the autoencoder models.
//!
//! One entry point covers both objectives: plain reconstruction and the
//! dynamics-aware variant. The loop is deterministic given the seed — a
//! fixed generator drives both weight initialization and the per-epoch
//! shuffles — so repeated runs reproduce parameters and logged metrics
//! bit for bit (wall-clock columns excepted).
//!
//! Normalization statistics (mean and population standard deviation over
//! every entry of every training state) are computed once up front and
//! stored on the model. Both history metrics are logged for every run,
//! whichever objective is optimized, so runs trained under different
//! objectives can be compared on the same columns; the dynamics metric
//! always uses the configured `lambda`.

use crate::ad::adam::{AdamConfig, AdamState};
use crate::ad::rng::SplitMix64;
use crate::ad::tensor::Tensor;
use crate::ae::loss::{build_loss, mse_loss, pi_loss};
use crate::ae::model::{AeModel, HistoryRow};
use crate::error::{Error, Result};
use crate::fom::snapshots::SnapshotSet;
use crate::grid::Field;
use std::time::Instant;

/// Which objective the loop optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Reconstruction error only.
    Mse,
    /// Reconstruction error plus weighted dynamics mismatch.
    Pi,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Weight of the dynamics-mismatch term (and of the logged dynamics
    /// metric, for both objectives).
    pub lambda: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Metrics are logged every this many epochs, plus the final epoch.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            lambda: 1e-4,
            learning_rate: 1e-3,
            batch_size: 32,
            seed: 0,
            log_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Error::InvalidConfig {
            key: key.into(),
            reason,
        };
        if self.epochs == 0 {
            return Err(bad("train.epochs", "must be at least 1".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(bad(
                "train.lambda",
                format!("must be finite and nonnegative, got {}", self.lambda),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(bad(
                "train.learning_rate",
                format!("must be finite and nonnegative, got {}", self.learning_rate),
            ));
        }
        if self.batch_size == 0 {
            return Err(bad("train.batch_size", "must be at least 1".into()));
        }
        if self.log_every == 0 {
            return Err(bad("train.log_every", "must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean and population standard deviation over every entry of `states`.
fn normalization_stats(states: &[Field<f64>]) -> (f64, f64) {
    let count: usize = states.iter().map(|s| s.values().len()).sum();
    let inv = 1.0 / count as f64;
    let mean = states
        .iter()
        .flat_map(|s| s.values())
        .sum::<f64>()
        * inv;
    let var = states
        .iter()
        .flat_map(|s| s.values())
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        * inv;
    (mean, var.sqrt())
}

/// Trains `model` on the snapshot states (and, for [`LossKind::Pi`], their
/// stored tendencies), returning the trained model with its history filled.
pub fn train(
    model: AeModel,
    snapshots: &SnapshotSet<f64>,
    cfg: &TrainConfig,
    kind: LossKind,
) -> Result<AeModel> {
    train_with_logger(model, snapshots, cfg, kind, |_| {})
}

/// [`train`] with a callback invoked as each history row is recorded, so a
/// caller can stream progress or keep the partial history when a later epoch
/// diverges (a divergence error carries no model and no history).
pub fn train_with_logger(
    mut model: AeModel,
    snapshots: &SnapshotSet<f64>,
    cfg: &TrainConfig,
    kind: LossKind,
    mut on_row: impl FnMut(&HistoryRow),
) -> Result<AeModel> {
    cfg.validate()?;
    snapshots.validate()?;
    model.grid().same_as(&snapshots.grid)?;
    let count = snapshots.len();
    if count < cfg.batch_size {
        return Err(Error::InvalidConfig {
            key: "train.batch_size".into(),
            reason: format!("batch size {} exceeds the {count} snapshots", cfg.batch_size),
        });
    }

    let (mean, std) = normalization_stats(&snapshots.states);
    model.set_normalization(mean, std)?;
    model.history.clear();

    let mut adam = AdamState::new(
        model.params(),
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
    )?;
    let start = Instant::now();

    let mut order: Vec<usize> = (0..count).collect();
    for epoch in 1..=cfg.epochs {
        SplitMix64::derive(cfg.seed, epoch as u64).shuffle(&mut order);
        for (batch_index, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let states: Vec<Field<f64>> =
                chunk.iter().map(|&i| snapshots.states[i].clone()).collect();
            let rhs: Vec<Field<f64>>;
            let tangents = match kind {
                LossKind::Mse => None,
                LossKind::Pi if cfg.lambda == 0.0 => None,
                LossKind::Pi => {
                    rhs = chunk.iter().map(|&i| snapshots.rhs[i].clone()).collect();
                    Some((rhs.as_slice(), cfg.lambda))
                }
            };
            let mut lg = build_loss(&model, &states, tangents)?;
            let loss = lg.graph.value(lg.root).item()?;
            if !loss.is_finite() {
                return Err(Error::TrainDiverged {
                    epoch,
                    batch: batch_index,
                });
            }
            lg.graph.backward(lg.root)?;
            let grads: Vec<Tensor> = lg
                .params
                .iter()
                .map(|id| {
                    lg.graph
                        .grad(*id)
                        .expect("every parameter influences the loss")
                        .clone()
                })
                .collect();
            adam.update(model.params_mut(), &grads)?;
        }

        if epoch % cfg.log_every == 0 || epoch == cfg.epochs {
            let mse_metric = mse_loss(&model, &snapshots.states)?;
            let pi_metric = pi_loss(&model, &snapshots.states, &snapshots.rhs, cfg.lambda)?;
            let row = HistoryRow {
                epoch,
                mse_metric,
                pi_metric,
                wall_seconds: start.elapsed().as_secs_f64(),
            };
            on_row(&row);
            model.history.push(row);
        }
    }
    Ok(model)
}
