use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, DenseConfig, History, LstmConfig, NetConfig, Sequence};
use crate::error::{Error, Result};
use crate::kinematics::Architecture;
use crate::seed;

/// Inclusive sampling range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub min: T,
    pub max: T,
}

impl<T: PartialOrd + Copy + std::fmt::Debug> Range<T> {
    pub fn new(min: T, max: T) -> Self {
        Range { min, max }
    }

    pub fn contains(&self, v: T) -> bool {
        self.min <= v && v <= self.max
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.min <= self.max {
            Ok(())
        } else {
            Err(Error::Config(format!("{name} range is empty: {self:?}")))
        }
    }
}

impl Range<usize> {
    fn sample(&self, rng: &mut seed::Rng) -> usize {
        rng.gen_range(self.min..=self.max)
    }
}

impl Range<f64> {
    fn sample(&self, rng: &mut seed::Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min..self.max)
        }
    }

    fn sample_log(&self, rng: &mut seed::Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.gen_range(self.min.ln()..self.max.ln()).exp()
        }
    }
}

/// Hyperparameter ranges. Counts are sampled uniformly over integers,
/// dropout uniformly, learning rates log-uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum SearchSpace {
    Dense {
        layers: Range<usize>,
        nodes: Range<usize>,
        dropout: Range<f64>,
        batch_size: Range<usize>,
        learning_rate: Range<f64>,
        epochs: usize,
    },
    Recurrent {
        hidden_units: Range<usize>,
        dropout: Range<f64>,
        batch_size: Range<usize>,
        learning_rate: Range<f64>,
        epochs: usize,
    },
}

impl SearchSpace {
    /// Ranges used to tune the original models.
    pub fn paper(arch: Architecture) -> Self {
        match arch {
            Architecture::Dense => SearchSpace::Dense {
                layers: Range::new(2, 5),
                nodes: Range::new(50, 350),
                dropout: Range::new(0.0, 0.2),
                batch_size: Range::new(4, 64),
                learning_rate: Range::new(1e-3, 1e-2),
                epochs: 350,
            },
            Architecture::Recurrent => SearchSpace::Recurrent {
                hidden_units: Range::new(150, 500),
                dropout: Range::new(0.0, 0.2),
                batch_size: Range::new(4, 64),
                learning_rate: Range::new(1e-9, 1e-4),
                epochs: 200,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (dropout, lr, batch) = match self {
            SearchSpace::Dense {
                layers,
                nodes,
                dropout,
                batch_size,
                learning_rate,
                ..
            } => {
                layers.check("layers")?;
                nodes.check("nodes")?;
                if layers.min == 0 || nodes.min == 0 {
                    return Err(Error::Config(
                        "layer and node counts must be at least 1".into(),
                    ));
                }
                (dropout, learning_rate, batch_size)
            }
            SearchSpace::Recurrent {
                hidden_units,
                dropout,
                batch_size,
                learning_rate,
                ..
            } => {
                hidden_units.check("hidden_units")?;
                if hidden_units.min == 0 {
                    return Err(Error::Config("hidden_units must be at least 1".into()));
                }
                (dropout, learning_rate, batch_size)
            }
        };
        dropout.check("dropout")?;
        lr.check("learning_rate")?;
        batch.check("batch_size")?;
        if dropout.min < 0.0 || dropout.max >= 1.0 {
            return Err(Error::Config("dropout range must lie in [0, 1)".into()));
        }
        if lr.min <= 0.0 {
            return Err(Error::Config("learning_rate range must be positive".into()));
        }
        if batch.min == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }

    fn sample(&self, input_dim: usize, rng: &mut seed::Rng, trial_seed: u64) -> NetConfig {
        match self {
            SearchSpace::Dense {
                layers,
                nodes,
                dropout,
                batch_size,
                learning_rate,
                epochs,
            } => NetConfig::Dense(DenseConfig {
                input_dim,
                layers: layers.sample(rng),
                nodes_per_layer: nodes.sample(rng),
                dropout_fraction: dropout.sample(rng),
                batch_size: batch_size.sample(rng),
                learning_rate: learning_rate.sample_log(rng),
                epochs: *epochs,
                seed: trial_seed,
            }),
            SearchSpace::Recurrent {
                hidden_units,
                dropout,
                batch_size,
                learning_rate,
                epochs,
            } => NetConfig::Recurrent(LstmConfig {
                input_dim,
                hidden_units: hidden_units.sample(rng),
                dropout_fraction: dropout.sample(rng),
                batch_size: batch_size.sample(rng),
                learning_rate: learning_rate.sample_log(rng),
                epochs: *epochs,
                seed: trial_seed,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub config: NetConfig,
    /// Final validation MSE; infinite when training diverged.
    pub val_mse: f64,
    pub history: History,
    pub failure: Option<String>,
}

/// Samples `n_trials` configurations, trains each and returns them sorted by
/// final validation MSE (ties broken by trial index). Configurations are
/// drawn sequentially from the master seed before any training, and each
/// trial trains from its own derived seed, so the ranking does not depend on
/// scheduling.
pub fn random_search(
    space: &SearchSpace,
    n_trials: usize,
    input_dim: usize,
    train_set: &[Sequence],
    val_set: &[Sequence],
    seed: u64,
) -> Result<Vec<Trial>> {
    space.validate()?;
    if val_set.is_empty() {
        return Err(Error::Dataset(
            "random search needs a validation set".into(),
        ));
    }
    let mut rng = seed::substream(seed, "search/sample");
    let configs: Vec<NetConfig> = (0..n_trials)
        .map(|i| {
            space.sample(
                input_dim,
                &mut rng,
                seed::derive_seed(seed, &format!("search/trial/{i}")),
            )
        })
        .collect();
    let mut trials: Vec<Trial> = configs
        .into_par_iter()
        .enumerate()
        .map(|(index, config)| match train(&config, train_set, val_set) {
            Ok(t) => Trial {
                index,
                val_mse: t.history.final_val().unwrap_or(f64::INFINITY),
                config,
                history: t.history,
                failure: None,
            },
            Err(e @ Error::NonFiniteLoss { .. }) => Trial {
                index,
                config,
                val_mse: f64::INFINITY,
                history: History::default(),
                failure: Some(e.to_string()),
            },
            Err(e) => Trial {
                index,
                config,
                val_mse: f64::NAN,
                history: History::default(),
                failure: Some(e.to_string()),
            },
        })
        .collect();
    if let Some(t) = trials.iter().find(|t| t.val_mse.is_nan()) {
        return Err(Error::Internal(format!(
            "search trial {} failed: {}",
            t.index,
            t.failure.as_deref().unwrap_or("unknown")
        )));
    }
    trials.sort_by(|a, b| a.val_mse.total_cmp(&b.val_mse).then(a.index.cmp(&b.index)));
    Ok(trials)
}
