use std::fmt::Write as _;

use clap::Args;
use finsurr::harness::skeleton_rows;
use finsurr::reduction::{fit_pca, PcaMode, DEFAULT_COMPONENTS};
use serde::{Deserialize, Serialize};

use super::{csv_row, DataArgs, DataSource};
use crate::context::{CliResult, Run};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitPcaConfig {
    pub data: DataSource,
    pub mode: PcaMode,
    pub components: usize,
}

impl Default for FitPcaConfig {
    fn default() -> Self {
        FitPcaConfig {
            data: DataSource::default(),
            mode: PcaMode::Weighted,
            components: DEFAULT_COMPONENTS,
        }
    }
}

/// Fit a PCA reducer to every skeleton vector of a dataset.
#[derive(Debug, Clone, Args)]
pub struct FitPcaArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// weighted or unweighted.
    #[arg(long)]
    pub mode: Option<PcaMode>,
    /// Components to keep.
    #[arg(long)]
    pub components: Option<usize>,
}

impl FitPcaArgs {
    pub fn apply(self, c: &mut FitPcaConfig) {
        self.data.apply(&mut c.data);
        if let Some(m) = self.mode {
            c.mode = m;
        }
        if let Some(k) = self.components {
            c.components = k;
        }
    }
}

pub fn run(config: &FitPcaConfig, run: &mut Run) -> CliResult<()> {
    let (dataset, rig) = config.data.load(run)?;
    let cycles: Vec<_> = dataset.cycles.iter().collect();
    let rows = skeleton_rows(&rig, &cycles)?;
    let coeffs: Vec<f64> = cycles
        .iter()
        .map(|c| c.thrust_coefficients(&rig))
        .collect::<finsurr::Result<Vec<_>>>()?
        .concat();
    let reducer = fit_pca(&rows, Some(&coeffs), config.mode, config.components)?;
    run.write_json("pca.json", &reducer)?;

    let total: f64 = reducer.eigenvalues.iter().sum();
    let mut text = String::from("component,eigenvalue,explained,cumulative\n");
    let mut cumulative = 0.0;
    for (i, &ev) in reducer.eigenvalues.iter().enumerate() {
        let explained = if total > 0.0 { ev / total } else { 0.0 };
        cumulative += explained;
        writeln!(text, "{},{}", i + 1, csv_row(&[ev, explained, cumulative]))
            .expect("string write");
    }
    run.write("variance.csv", text)?;
    log::info!(
        "{} PCA, {} components: {:.4} of scaled variance",
        config.mode,
        reducer.k,
        reducer.explained_fraction()
    );
    Ok(())
}
