//! Synthetic stand-in for the experimental thrust dataset.
//!
//! Thrust comes from a deterministic quasi-steady blade-element model
//! ([`oracle_thrust`]). It is not a physical claim: it only has to be smooth,
//! sensitive to fin shape and kinematics, and reproducible, so that the
//! surrogate pipeline has ground truth to learn and be tested against.

mod generate;
mod io;
mod oracle;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use generate::{
    generate_dataset, CalibrationRecord, DatasetGrid, Exclusion, GeneratedDataset, NoiseConfig,
    ShapeSeparation, ShapeSpec, SEPARATION_REFERENCE,
};
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, CSV_COLUMNS};
pub use oracle::{oracle_thrust, DEFAULT_THRUST_GAIN};

use crate::error::Result;
use crate::kinematics::{KinematicSetting, KinematicState};
use crate::preprocess::{self, DevSample};
use crate::rig::Rig;

/// A kinematic-shape setting: one fin under one set of kinematics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingKey {
    pub shape: String,
    pub flap_frequency: f64,
    pub stroke_amplitude: f64,
    pub pitch_amplitude: f64,
}

impl SettingKey {
    pub fn new(shape: &str, setting: &KinematicSetting) -> Self {
        SettingKey {
            shape: shape.to_string(),
            flap_frequency: setting.flap_frequency,
            stroke_amplitude: setting.stroke_amplitude,
            pitch_amplitude: setting.pitch_amplitude,
        }
    }
}

impl Eq for SettingKey {}

impl Ord for SettingKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shape
            .cmp(&other.shape)
            .then(self.flap_frequency.total_cmp(&other.flap_frequency))
            .then(self.stroke_amplitude.total_cmp(&other.stroke_amplitude))
            .then(self.pitch_amplitude.total_cmp(&other.pitch_amplitude))
    }
}

impl PartialOrd for SettingKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SettingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}Hz/stroke{}/pitch{}",
            self.shape, self.flap_frequency, self.stroke_amplitude, self.pitch_amplitude
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub state: KinematicState,
    /// Thrust, N.
    pub thrust: f64,
}

/// One flapping cycle of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeCycle {
    pub shape: String,
    pub setting: KinematicSetting,
    pub run: usize,
    pub cycle: usize,
    pub samples: Vec<CycleSample>,
}

impl StrokeCycle {
    pub fn key(&self) -> SettingKey {
        SettingKey::new(&self.shape, &self.setting)
    }

    /// Stable identifier, e.g. `rect/1Hz/stroke60/pitch40/run3/cycle1`.
    pub fn id(&self) -> String {
        format!("{}/run{}/cycle{}", self.key(), self.run, self.cycle)
    }

    pub fn thrust_coefficients(&self, rig: &Rig) -> Result<Vec<f64>> {
        let q = rig.dynamic_force(&self.shape, &self.setting)?;
        Ok(self.samples.iter().map(|s| s.thrust / q).collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub cycles: Vec<StrokeCycle>,
}

impl Dataset {
    pub fn new(cycles: Vec<StrokeCycle>) -> Self {
        Dataset { cycles }
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn settings(&self) -> Vec<SettingKey> {
        self.by_setting().into_keys().collect()
    }

    pub fn by_setting(&self) -> BTreeMap<SettingKey, Vec<&StrokeCycle>> {
        let mut map: BTreeMap<SettingKey, Vec<&StrokeCycle>> = BTreeMap::new();
        for c in &self.cycles {
            map.entry(c.key()).or_default().push(c);
        }
        map
    }

    /// Population standard deviation of every thrust coefficient in the set.
    pub fn coefficient_scale(&self, rig: &Rig) -> Result<f64> {
        let mut all = Vec::new();
        for c in &self.cycles {
            all.extend(c.thrust_coefficients(rig)?);
        }
        Ok(preprocess::population_std(&all))
    }
}

/// Converts cycles into thrust-deviation samples, normalizing thrust
/// coefficients by `thrust_scale`.
pub fn deviation_samples(
    cycles: &[&StrokeCycle],
    rig: &Rig,
    thrust_scale: f64,
) -> Result<Vec<Vec<DevSample>>> {
    cycles
        .iter()
        .map(|c| {
            let coeffs = c.thrust_coefficients(rig)?;
            Ok(c.samples
                .iter()
                .zip(coeffs)
                .map(|(s, coeff)| DevSample {
                    stroke_angle: s.state.stroke_angle,
                    stroke_state: s.state.stroke_state,
                    thrust: coeff / thrust_scale,
                })
                .collect())
        })
        .collect()
}

/// Thrust deviation of each setting, across all of its runs and cycles.
pub fn setting_deviations(
    dataset: &Dataset,
    rig: &Rig,
    thrust_scale: f64,
    n_bins: usize,
) -> Result<Vec<(SettingKey, f64)>> {
    dataset
        .by_setting()
        .into_iter()
        .map(|(key, cycles)| {
            let samples = deviation_samples(&cycles, rig, thrust_scale)?;
            Ok((key, preprocess::thrust_deviation(&samples, n_bins)?))
        })
        .collect()
}

/// Mean over runs of the within-run thrust deviation, per setting.
pub fn within_run_deviations(
    dataset: &Dataset,
    rig: &Rig,
    thrust_scale: f64,
    n_bins: usize,
) -> Result<Vec<(SettingKey, f64)>> {
    dataset
        .by_setting()
        .into_iter()
        .map(|(key, cycles)| {
            let mut runs: BTreeMap<usize, Vec<&StrokeCycle>> = BTreeMap::new();
            for c in cycles {
                runs.entry(c.run).or_default().push(c);
            }
            let mut devs = Vec::new();
            for group in runs.values().filter(|g| g.len() >= 2) {
                let samples = deviation_samples(group, rig, thrust_scale)?;
                devs.push(preprocess::thrust_deviation(&samples, n_bins)?);
            }
            let mean = if devs.is_empty() {
                0.0
            } else {
                preprocess::mean(&devs)
            };
            Ok((key, mean))
        })
        .collect()
}
