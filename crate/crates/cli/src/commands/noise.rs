use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use finsurr::preprocess::{mean, DEFAULT_DEV_BINS};
use finsurr::synthdata::{setting_deviations, within_run_deviations, SettingKey};
use serde::{Deserialize, Serialize};

use super::{csv_row, DataArgs, DataSource};
use crate::context::{io_error, json_error, CliResult, Failure, Run};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseCmdConfig {
    pub data: DataSource,
    pub n_bins: usize,
    /// Normalized-thrust divisor; read from `generation` or computed from the
    /// dataset when unset.
    pub thrust_scale: Option<f64>,
    /// `generation.json` written alongside the dataset.
    pub generation: Option<PathBuf>,
    /// Expected mean across-run deviation.
    pub target: Option<f64>,
    pub tolerance: f64,
}

impl Default for NoiseCmdConfig {
    fn default() -> Self {
        NoiseCmdConfig {
            data: DataSource::default(),
            n_bins: DEFAULT_DEV_BINS,
            thrust_scale: None,
            generation: None,
            target: None,
            tolerance: 0.01,
        }
    }
}

/// Measure the thrust deviation of every setting of a dataset.
#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Stroke-angle bins per stroke direction.
    #[arg(long)]
    pub bins: Option<usize>,
    /// generation.json of the dataset, for its thrust scale.
    #[arg(long)]
    pub generation: Option<PathBuf>,
    /// Fail with exit code 3 unless the mean across-run deviation is within
    /// --tolerance of this value.
    #[arg(long)]
    pub target: Option<f64>,
    /// Allowed distance from the target deviation.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl NoiseArgs {
    pub fn apply(self, c: &mut NoiseCmdConfig) {
        self.data.apply(&mut c.data);
        if let Some(b) = self.bins {
            c.n_bins = b;
        }
        if let Some(g) = self.generation {
            c.generation = Some(g);
        }
        if let Some(t) = self.target {
            c.target = Some(t);
        }
        if let Some(t) = self.tolerance {
            c.tolerance = t;
        }
    }
}

#[derive(Debug, Deserialize)]
struct GenerationScale {
    thrust_scale: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SettingNoise {
    pub key: SettingKey,
    pub across_run_dev: f64,
    pub within_run_dev: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub thrust_scale: f64,
    pub n_bins: usize,
    pub mean_across_run_dev: f64,
    pub mean_within_run_dev: f64,
    pub settings: Vec<SettingNoise>,
}

pub fn run(config: &NoiseCmdConfig, run: &mut Run) -> CliResult<()> {
    let (dataset, rig) = config.data.load(run)?;
    let scale = match (config.thrust_scale, &config.generation) {
        (Some(s), _) => s,
        (None, Some(path)) => {
            run.input(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            serde_json::from_str::<GenerationScale>(&text)
                .map_err(|e| json_error(path, e))?
                .thrust_scale
        }
        (None, None) => {
            let s = dataset.coefficient_scale(&rig)?;
            if s > 0.0 {
                s
            } else {
                1.0
            }
        }
    };
    let across = setting_deviations(&dataset, &rig, scale, config.n_bins)?;
    let within = within_run_deviations(&dataset, &rig, scale, config.n_bins)?;
    let settings: Vec<SettingNoise> = across
        .into_iter()
        .zip(within)
        .map(|((key, a), (_, w))| SettingNoise {
            key,
            across_run_dev: a,
            within_run_dev: w,
        })
        .collect();

    let mut text = String::from(
        "shape,flap_frequency,stroke_amplitude,pitch_amplitude,across_run_dev,within_run_dev\n",
    );
    for s in &settings {
        let k = &s.key;
        writeln!(
            text,
            "{},{}",
            k.shape,
            csv_row(&[
                k.flap_frequency,
                k.stroke_amplitude,
                k.pitch_amplitude,
                s.across_run_dev,
                s.within_run_dev
            ])
        )
        .expect("string write");
        println!("{}\t{:.4}\t{:.4}", k, s.across_run_dev, s.within_run_dev);
    }
    let summary = NoiseSummary {
        thrust_scale: scale,
        n_bins: config.n_bins,
        mean_across_run_dev: mean(
            &settings
                .iter()
                .map(|s| s.across_run_dev)
                .collect::<Vec<_>>(),
        ),
        mean_within_run_dev: mean(
            &settings
                .iter()
                .map(|s| s.within_run_dev)
                .collect::<Vec<_>>(),
        ),
        settings,
    };
    log::info!(
        "mean across-run deviation {:.4}, within-run {:.4}",
        summary.mean_across_run_dev,
        summary.mean_within_run_dev
    );
    run.write("noise.csv", text)?;
    run.write_json("noise.json", &summary)?;

    if let Some(target) = config.target {
        let got = summary.mean_across_run_dev;
        if !((got - target).abs() <= config.tolerance) {
            return Err(Failure::Check(format!(
                "mean across-run deviation {got:.4} is not within {} of {target}",
                config.tolerance
            )));
        }
    }
    Ok(())
}
