use clap::Args;
use finsurr::synthdata::{
    generate_dataset, write_dataset, CalibrationRecord, DatasetGrid, NoiseConfig, ShapeSeparation,
};
use serde::{Deserialize, Serialize};

use crate::context::{io_error, CliResult, Run};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenDataConfig {
    pub grid: DatasetGrid,
    pub noise: NoiseConfig,
}

/// Generate a synthetic thrust dataset from the oracle.
#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    /// Disable noise injection.
    #[arg(long)]
    pub noiseless: bool,
    /// Runs per setting.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Cycles per run.
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Samples per stroke cycle.
    #[arg(long)]
    pub steps: Option<usize>,
}

impl GenDataArgs {
    pub fn apply(self, c: &mut GenDataConfig) {
        if self.noiseless {
            c.noise = NoiseConfig::none();
        }
        if let Some(v) = self.runs {
            c.grid.runs_per_setting = v;
        }
        if let Some(v) = self.cycles {
            c.grid.cycles_per_run = v;
        }
        if let Some(v) = self.steps {
            c.grid.n_steps_per_cycle = v;
        }
    }
}

/// Everything about a generated dataset that is not in the CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub n_settings: usize,
    pub n_cycles: usize,
    pub thrust_scale: f64,
    pub injected_variance: f64,
    pub calibration: Vec<CalibrationRecord>,
    pub separation: Vec<ShapeSeparation>,
}

pub fn run(config: &GenDataConfig, run: &mut Run) -> CliResult<()> {
    let generated = generate_dataset(&config.grid, &config.noise, run.seed)?;
    let path = run.path("dataset.csv");
    let mut buf = Vec::new();
    write_dataset(&generated.dataset, &mut buf).map_err(|e| io_error(&path, e))?;
    run.write("dataset.csv", buf)?;

    if let Some(sep) = generated.reference_separation() {
        let verdict = if sep.passed() { "ok" } else { "TOO SMALL" };
        log::info!(
            "shape separation at {} Hz / {}°: {:.4} (threshold {:.4}) {verdict}",
            sep.flap_frequency,
            sep.pitch_amplitude,
            sep.min_separation,
            sep.threshold
        );
    }
    let summary = GenerationSummary {
        n_settings: generated.dataset.settings().len(),
        n_cycles: generated.dataset.len(),
        thrust_scale: generated.thrust_scale,
        injected_variance: generated.injected_variance(),
        calibration: generated.calibration.clone(),
        separation: generated.separation.clone(),
    };
    log::info!(
        "{} settings, {} cycles",
        summary.n_settings,
        summary.n_cycles
    );
    run.write_json("generation.json", &summary)
}
