pub mod compare;
pub mod eval;
pub mod featurize;
pub mod fit_pca;
pub mod gen_data;
pub mod noise;
pub mod train;

use std::path::PathBuf;

use clap::Args;
use finsurr::harness::HarnessConfig;
use finsurr::kinematics::fmt_f64;
use finsurr::rig::{Rig, RigParams};
use finsurr::synthdata::{load_dataset, Dataset, ShapeSpec};
use serde::{Deserialize, Serialize};

use crate::context::{config_error, CliResult, Run};

fn builtin_specs() -> Vec<ShapeSpec> {
    ["rect", "bio", "pt4"]
        .map(|s| ShapeSpec::Builtin(s.into()))
        .to_vec()
}

/// A dataset file and the rig it was generated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSource {
    pub dataset: Option<PathBuf>,
    pub shapes: Vec<ShapeSpec>,
    pub rig: RigParams,
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource {
            dataset: None,
            shapes: builtin_specs(),
            rig: RigParams::default(),
        }
    }
}

impl DataSource {
    pub fn load(&self, run: &mut Run) -> CliResult<(Dataset, Rig)> {
        let path = self
            .dataset
            .as_ref()
            .ok_or_else(|| config_error("no dataset given (use --dataset)"))?;
        run.input(path)?;
        let dataset = load_dataset(path)?;
        let shapes = self
            .shapes
            .iter()
            .map(ShapeSpec::resolve)
            .collect::<finsurr::Result<Vec<_>>>()?;
        let rig = Rig::new(self.rig, shapes)?;
        log::info!("{}: {} cycles", path.display(), dataset.len());
        Ok((dataset, rig))
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

impl DataArgs {
    pub fn apply(self, data: &mut DataSource) {
        if let Some(d) = self.dataset {
            data.dataset = Some(d);
        }
    }
}

/// Epoch overrides for the two harness network configs.
#[derive(Debug, Clone, Args)]
pub struct HarnessArgs {
    /// Training epochs for dense models.
    #[arg(long)]
    pub dense_epochs: Option<usize>,
    /// Training epochs for recurrent models.
    #[arg(long)]
    pub lstm_epochs: Option<usize>,
}

impl HarnessArgs {
    pub fn apply(self, h: &mut HarnessConfig) {
        if let Some(e) = self.dense_epochs {
            h.dense.set_epochs(e);
        }
        if let Some(e) = self.lstm_epochs {
            h.recurrent.set_epochs(e);
        }
    }
}

pub fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(",")
}
