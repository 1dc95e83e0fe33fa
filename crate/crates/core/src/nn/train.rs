use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Adam, NetConfig, Network, Sequence};
use crate::error::{Error, Result};
use crate::seed;

/// Per-epoch losses. `train_mse` is the running loss seen by the optimizer
/// (dropout active); `val_mse` is inference-mode and empty when no validation
/// set was given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
}

impl History {
    pub fn final_val(&self) -> Option<f64> {
        self.val_mse.last().copied()
    }

    pub fn final_train(&self) -> Option<f64> {
        self.train_mse.last().copied()
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub network: Network,
    pub history: History,
}

/// Inference-mode mean squared error per time step.
pub fn mse(net: &Network, data: &[Sequence]) -> Result<f64> {
    let mut sse = 0.0;
    let mut n = 0usize;
    for seq in data {
        net.check_sequence(seq)?;
        let y = net.predict(&seq.inputs)?;
        sse += y
            .iter()
            .zip(&seq.targets)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        n += seq.len();
    }
    if n == 0 {
        return Err(Error::Dataset("cannot evaluate on an empty set".into()));
    }
    Ok(sse / n as f64)
}

/// Builds a fresh network from `config` and trains it.
pub fn train(config: &NetConfig, train_set: &[Sequence], val_set: &[Sequence]) -> Result<Trained> {
    train_network(config.build()?, config, train_set, val_set)
}

/// Adam on the per-step MSE, reshuffling every epoch. Dense nets batch
/// individual records, recurrent nets batch whole sequences. The weights
/// after the last epoch are returned.
pub fn train_network(
    mut net: Network,
    config: &NetConfig,
    train_set: &[Sequence],
    val_set: &[Sequence],
) -> Result<Trained> {
    config.validate()?;
    if net.architecture() != config.architecture() || net.input_dim() != config.input_dim() {
        return Err(Error::Config(format!(
            "network ({} input {}) does not match config ({} input {})",
            net.architecture(),
            net.input_dim(),
            config.architecture(),
            config.input_dim()
        )));
    }
    if train_set.is_empty() {
        return Err(Error::Dataset("training set is empty".into()));
    }
    for seq in train_set.iter().chain(val_set) {
        net.check_sequence(seq)?;
    }
    let records;
    let units: &[Sequence] = match net {
        Network::Dense(_) => {
            records = train_set
                .iter()
                .flat_map(|s| {
                    s.inputs.iter().zip(&s.targets).map(|(x, &t)| Sequence {
                        inputs: vec![x.clone()],
                        targets: vec![t],
                    })
                })
                .collect::<Vec<_>>();
            &records
        }
        Network::Recurrent(_) => train_set,
    };

    let mut shuffle_rng = seed::substream(config.seed(), "nn/shuffle");
    let mut dropout_rng = seed::substream(config.seed(), "nn/dropout");
    let dropout = config.dropout();
    let mut adam = Adam::new(net.params().len(), config.learning_rate());
    let mut order: Vec<usize> = (0..units.len()).collect();
    let mut grad = vec![0.0; net.params().len()];
    let mut history = History::default();
    for epoch in 0..config.epochs() {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_sse = 0.0;
        let mut epoch_n = 0usize;
        for (b, batch) in order.chunks(config.batch_size()).enumerate() {
            let steps: usize = batch.iter().map(|&i| units[i].len()).sum();
            let scale = 1.0 / steps as f64;
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut sse = 0.0;
            for &i in batch {
                sse += net.accumulate(&units[i], scale, dropout, Some(&mut dropout_rng), &mut grad);
            }
            if !sse.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            adam.step(net.params_mut(), &grad);
            epoch_sse += sse;
            epoch_n += steps;
        }
        history.train_mse.push(epoch_sse / epoch_n as f64);
        if !val_set.is_empty() {
            let v = mse(&net, val_set)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: order.len().div_ceil(config.batch_size()),
                });
            }
            history.val_mse.push(v);
        }
        log::debug!(
            "epoch {epoch}: train {:.6} val {:?}",
            history.train_mse[epoch],
            history.val_mse.last()
        );
    }
    Ok(Trained {
        network: net,
        history,
    })
}
