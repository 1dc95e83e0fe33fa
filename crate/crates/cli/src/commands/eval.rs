use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use finsurr::harness::{assemble_reduced, evaluate_cycles};
use finsurr::kinematics::{Architecture, Variant};
use finsurr::nn::SurrogateModel;
use finsurr::preprocess::mean;
use finsurr::synthdata::{SettingKey, StrokeCycle};
use serde::{Deserialize, Serialize};

use super::{csv_row, DataArgs, DataSource};
use crate::context::{config_error, CliResult, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Every cycle of the dataset.
    #[default]
    All,
    /// The validation cycles of the reduced protocol under the run seed.
    Validation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub model: Option<PathBuf>,
    pub data: DataSource,
    pub split: Split,
}

/// Evaluate a trained model on a dataset, in the model's normalized units.
#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Model checkpoint written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Cycles to evaluate.
    #[arg(long, value_enum)]
    pub split: Option<Split>,
}

impl EvalArgs {
    pub fn apply(self, c: &mut EvalConfig) {
        if let Some(m) = self.model {
            c.model = Some(m);
        }
        self.data.apply(&mut c.data);
        if let Some(s) = self.split {
            c.split = s;
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SettingMse {
    pub key: SettingKey,
    pub n_cycles: usize,
    pub mse: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvalSummary {
    pub variant: Variant,
    pub architecture: Architecture,
    pub split: Split,
    pub n_cycles: usize,
    /// Mean over cycles.
    pub mse: f64,
    pub settings: Vec<SettingMse>,
}

pub fn run(config: &EvalConfig, run: &mut Run) -> CliResult<()> {
    let path = config
        .model
        .as_ref()
        .ok_or_else(|| config_error("no model given (use --model)"))?;
    run.input(path)?;
    let model = SurrogateModel::load(path)?;
    let (dataset, rig) = config.data.load(run)?;
    let reduced;
    let cycles: Vec<&StrokeCycle> = match config.split {
        Split::All => dataset.cycles.iter().collect(),
        Split::Validation => {
            reduced = assemble_reduced(&dataset, run.seed)?;
            reduced.val_cycles()
        }
    };
    let evals = evaluate_cycles(&model, &rig, &cycles, model.norm.thrust_scale)?;

    let mut by_setting: BTreeMap<SettingKey, Vec<f64>> = BTreeMap::new();
    let mut text = String::from("cycle,t_s,measured,predicted\n");
    for e in &evals {
        by_setting.entry(e.key.clone()).or_default().push(e.mse);
        for k in 0..e.t.len() {
            writeln!(
                text,
                "{},{}",
                e.id,
                csv_row(&[e.t[k], e.measured[k], e.predicted[k]])
            )
            .expect("string write");
        }
    }
    let summary = EvalSummary {
        variant: model.variant,
        architecture: model.architecture,
        split: config.split,
        n_cycles: evals.len(),
        mse: mean(&evals.iter().map(|e| e.mse).collect::<Vec<_>>()),
        settings: by_setting
            .into_iter()
            .map(|(key, m)| SettingMse {
                key,
                n_cycles: m.len(),
                mse: mean(&m),
            })
            .collect(),
    };
    log::info!("{} cycles, MSE {:.5}", summary.n_cycles, summary.mse);
    run.write_json("eval.json", &summary)?;
    run.write("predictions.csv", text)
}
