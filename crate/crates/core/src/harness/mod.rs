//! Experimental protocol: reduced-data assembly, generalizability tests and
//! variant comparison.

mod features;
mod report;
mod run;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use features::{cycle_records, cycle_targets, fit_model, prepare, skeleton_rows, Prepared};
pub use report::{write_comparison_csv, write_profiles_csv, write_report_json};
pub use run::{
    compare_variants, evaluate_cycles, reduced_scale, run_gen_test, run_gen_test_with_reference,
    train_reference, AverageRow, ComparisonRow, ComparisonTable, CycleEval, CycleProfile,
    EvalReport, ReferenceSummary, SettingEval, GEOMETRY_AVERAGE, KINEMATIC_AVERAGE,
};

use crate::error::{Error, Result};
use crate::kinematics::Architecture;
use crate::nn::NetConfig;
use crate::reduction::{PcaMode, DEFAULT_COMPONENTS};
use crate::seed;
use crate::synthdata::{Dataset, Exclusion, SettingKey, StrokeCycle};

/// One cycle per run, split into training and validation cycles.
#[derive(Debug, Clone)]
pub struct ReducedDataset {
    pub cycles: Vec<StrokeCycle>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

impl ReducedDataset {
    pub fn train_cycles(&self) -> Vec<&StrokeCycle> {
        self.train.iter().map(|&i| &self.cycles[i]).collect()
    }

    pub fn val_cycles(&self) -> Vec<&StrokeCycle> {
        self.val.iter().map(|&i| &self.cycles[i]).collect()
    }
}

/// Picks one cycle per run of every setting, uniformly at random.
pub fn select_reduced(dataset: &Dataset, seed: u64) -> Result<Vec<StrokeCycle>> {
    let mut rng = seed::substream(seed, "harness/reduce");
    let mut out = Vec::new();
    for (key, cycles) in dataset.by_setting() {
        let mut runs: BTreeMap<usize, Vec<&StrokeCycle>> = BTreeMap::new();
        for c in cycles {
            runs.entry(c.run).or_default().push(c);
        }
        if runs.is_empty() {
            return Err(Error::Dataset(format!("setting {key} has no runs")));
        }
        for mut group in runs.into_values() {
            group.sort_by_key(|c| c.cycle);
            let pick = rng.gen_range(0..group.len());
            out.push(group[pick].clone());
        }
    }
    Ok(out)
}

/// Number of validation items out of `n`: `floor(n / 5)`.
pub fn validation_count(n: usize) -> usize {
    n / 5
}

/// Seeded 80/20 partition of `0..n`, returned as sorted (train, val).
pub fn split_indices(n: usize, seed: u64, label: &str) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::substream(
        seed,
        &format!("harness/split/{label}"),
    ));
    let n_val = validation_count(n);
    let mut val = order[..n_val].to_vec();
    let mut train = order[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

/// One seeded cycle per run per setting, then an 80/20 split by cycle.
pub fn assemble_reduced(dataset: &Dataset, seed: u64) -> Result<ReducedDataset> {
    let cycles = select_reduced(dataset, seed)?;
    if cycles.is_empty() {
        return Err(Error::Dataset("dataset has no cycles".into()));
    }
    let (train, val) = split_indices(cycles.len(), seed, "all");
    Ok(ReducedDataset { cycles, train, val })
}

/// A generalizability test: the shapes (and optionally frequencies) it works
/// within, and the settings held out of training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenTestSpec {
    pub name: String,
    pub shapes: Vec<String>,
    /// Restricts the test to these flap frequencies; `None` keeps all.
    pub frequencies: Option<Vec<f64>>,
    /// A setting is excluded when any entry matches it.
    pub exclusions: Vec<Exclusion>,
}

impl GenTestSpec {
    pub fn in_universe(&self, shape: &str, freq: f64) -> bool {
        self.shapes.iter().any(|s| s == shape)
            && self
                .frequencies
                .as_ref()
                .is_none_or(|fs| fs.contains(&freq))
    }

    pub fn is_excluded(&self, shape: &str, freq: f64, pitch: f64) -> bool {
        self.exclusions
            .iter()
            .any(|e| e.matches(shape, freq, pitch))
    }

    pub fn in_universe_key(&self, key: &SettingKey) -> bool {
        self.in_universe(&key.shape, key.flap_frequency)
    }

    pub fn excludes_key(&self, key: &SettingKey) -> bool {
        self.in_universe_key(key)
            && self.is_excluded(&key.shape, key.flap_frequency, key.pitch_amplitude)
    }

    /// Identifies the data a full-data reference for this test is trained on.
    pub fn universe_label(&self) -> String {
        let mut shapes = self.shapes.clone();
        shapes.sort();
        match &self.frequencies {
            None => shapes.join("+"),
            Some(fs) => format!(
                "{}@{}",
                shapes.join("+"),
                fs.iter()
                    .map(|f| format!("{f}Hz"))
                    .collect::<Vec<_>>()
                    .join("+")
            ),
        }
    }
}

fn exclude(shape: Option<&str>, freq: Option<f64>, pitch: Option<f64>) -> Exclusion {
    Exclusion {
        shape: shape.map(String::from),
        flap_frequency: freq,
        pitch_amplitude: pitch,
    }
}

/// The six shipped tests. GT1 to GT4 work with the rect and bio fins over all
/// frequencies; GT5 and GT6 use all three fins at 1 Hz and hold out one fin.
pub fn gen_test_specs() -> Vec<GenTestSpec> {
    let rb = vec!["rect".to_string(), "bio".to_string()];
    let all = vec!["rect".to_string(), "bio".to_string(), "pt4".to_string()];
    let kin = |name: &str, exclusions: Vec<Exclusion>| GenTestSpec {
        name: name.into(),
        shapes: rb.clone(),
        frequencies: None,
        exclusions,
    };
    let geo = |name: &str, shape: &str| GenTestSpec {
        name: name.into(),
        shapes: all.clone(),
        frequencies: Some(vec![1.0]),
        exclusions: vec![exclude(Some(shape), None, None)],
    };
    vec![
        kin(
            "GT1",
            vec![
                exclude(Some("rect"), Some(2.0), Some(40.0)),
                exclude(Some("bio"), Some(1.0), Some(15.0)),
            ],
        ),
        kin("GT2", vec![exclude(None, None, Some(15.0))]),
        kin("GT3", vec![exclude(None, None, Some(25.0))]),
        kin("GT4", vec![exclude(None, None, Some(40.0))]),
        geo("GT5", "rect"),
        geo("GT6", "bio"),
    ]
}

pub fn gen_test_spec(name: &str) -> Option<GenTestSpec> {
    gen_test_specs()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
}

/// How the overall excluded-settings MSE averages per-cycle errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Mean of per-setting means.
    #[default]
    PerSetting,
    /// Mean over all evaluated cycles.
    PerCycle,
}

/// Data the full-data reference model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Everything in the test's universe, excluded settings included.
    #[default]
    Universe,
    /// The whole reduced dataset.
    AllData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub dense: NetConfig,
    pub recurrent: NetConfig,
    pub pca_components: usize,
    pub pca_mode: PcaMode,
    pub weighting: Weighting,
    pub reference: ReferenceKind,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            dense: NetConfig::desk(Architecture::Dense, 0),
            recurrent: NetConfig::desk(Architecture::Recurrent, 0),
            pca_components: DEFAULT_COMPONENTS,
            pca_mode: PcaMode::Weighted,
            weighting: Weighting::PerSetting,
            reference: ReferenceKind::Universe,
        }
    }
}

impl HarnessConfig {
    pub fn net(&self, arch: Architecture) -> &NetConfig {
        match arch {
            Architecture::Dense => &self.dense,
            Architecture::Recurrent => &self.recurrent,
        }
    }

    pub fn with_epochs(mut self, dense: usize, recurrent: usize) -> Self {
        self.dense.set_epochs(dense);
        self.recurrent.set_epochs(recurrent);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dense.architecture() != Architecture::Dense
            || self.recurrent.architecture() != Architecture::Recurrent
        {
            return Err(Error::Config(
                "`dense` and `recurrent` configs have the wrong architecture".into(),
            ));
        }
        let mut probe = self.dense.clone();
        probe.set_input_dim(1);
        probe.validate()?;
        let mut probe = self.recurrent.clone();
        probe.set_input_dim(1);
        probe.validate()?;
        if self.pca_components == 0 {
            return Err(Error::Config("pca_components must be at least 1".into()));
        }
        Ok(())
    }
}
