use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{cycle_records, cycle_targets, fit_model};
use super::{select_reduced, split_indices, GenTestSpec, HarnessConfig, ReferenceKind, Weighting};
use crate::error::{Error, Result};
use crate::kinematics::{Architecture, Variant};
use crate::nn::SurrogateModel;
use crate::preprocess::{mean, population_std};
use crate::rig::Rig;
use crate::seed;
use crate::synthdata::{Dataset, SettingKey, StrokeCycle};

/// One evaluated cycle, in common normalized-thrust units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEval {
    pub id: String,
    pub key: SettingKey,
    pub mse: f64,
    pub t: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
}

/// Runs `model` on `cycles`. Predictions and targets are thrust coefficients
/// divided by `scale`, so models with different normalizations compare in
/// the same unit.
pub fn evaluate_cycles(
    model: &SurrogateModel,
    rig: &Rig,
    cycles: &[&StrokeCycle],
    scale: f64,
) -> Result<Vec<CycleEval>> {
    cycles
        .iter()
        .map(|c| {
            let records = cycle_records(rig, &model.schema, model.reducer.as_ref(), c)?;
            let predicted: Vec<f64> = model
                .predict_coefficients(&records)?
                .into_iter()
                .map(|y| y / scale)
                .collect();
            let measured = cycle_targets(rig, c, scale)?;
            let mse = mean(
                &predicted
                    .iter()
                    .zip(&measured)
                    .map(|(p, m)| (p - m) * (p - m))
                    .collect::<Vec<_>>(),
            );
            Ok(CycleEval {
                id: c.id(),
                key: c.key(),
                mse,
                t: c.samples.iter().map(|s| s.state.t).collect(),
                measured,
                predicted,
            })
        })
        .collect()
}

/// Standard deviation of every thrust coefficient in the reduced set: the
/// common unit for reported MSEs.
pub fn reduced_scale(rig: &Rig, reduced: &[StrokeCycle]) -> Result<f64> {
    let mut all = Vec::new();
    for c in reduced {
        all.extend(c.thrust_coefficients(rig)?);
    }
    let s = population_std(&all);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Ok(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingEval {
    pub key: SettingKey,
    pub n_cycles: usize,
    pub mse: f64,
    pub reference_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleProfile {
    pub id: String,
    pub mse: f64,
    pub reference_model_mse: f64,
    pub t: Vec<f64>,
    pub measured: Vec<f64>,
    pub predicted: Vec<f64>,
    pub reference_predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: String,
    pub variant: Variant,
    pub architecture: Architecture,
    pub seed: u64,
    pub weighting: Weighting,
    pub reference_kind: ReferenceKind,
    /// Divisor turning thrust coefficients into reported units.
    pub thrust_scale: f64,
    pub n_train_cycles: usize,
    pub n_val_cycles: usize,
    /// Final validation MSE of the test model in its own normalization.
    pub model_val_mse: Option<f64>,
    pub settings: Vec<SettingEval>,
    pub excluded_mse: Option<f64>,
    pub reference_mse: Option<f64>,
    pub best: Option<CycleProfile>,
    pub worst: Option<CycleProfile>,
    pub note: Option<String>,
}

pub(crate) fn overall(values: &[(usize, f64)], weighting: Weighting) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(match weighting {
        Weighting::PerSetting => mean(&values.iter().map(|v| v.1).collect::<Vec<_>>()),
        Weighting::PerCycle => {
            let n: usize = values.iter().map(|v| v.0).sum();
            values.iter().map(|&(k, m)| k as f64 * m).sum::<f64>() / n as f64
        }
    })
}

fn model_seed(seed: u64, variant: Variant, arch: Architecture, role: &str) -> u64 {
    seed::derive_seed(seed, &format!("harness/model/{variant}/{arch}/{role}"))
}

/// Trains the full-data reference for `spec`'s universe and returns it with
/// its validation MSE in units of `scale`.
#[allow(clippy::too_many_arguments)]
pub fn train_reference(
    spec: &GenTestSpec,
    variant: Variant,
    arch: Architecture,
    reduced: &[StrokeCycle],
    scale: f64,
    rig: &Rig,
    config: &HarnessConfig,
    seed: u64,
) -> Result<(SurrogateModel, f64)> {
    let label = match config.reference {
        ReferenceKind::Universe => spec.universe_label(),
        ReferenceKind::AllData => "all".to_string(),
    };
    let pool: Vec<&StrokeCycle> = reduced
        .iter()
        .filter(|c| {
            config.reference == ReferenceKind::AllData
                || spec.in_universe(&c.shape, c.setting.flap_frequency)
        })
        .collect();
    if pool.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no data for the reference model",
            spec.name
        )));
    }
    let (train_idx, val_idx) = split_indices(pool.len(), seed, &format!("reference/{label}"));
    let train: Vec<&StrokeCycle> = train_idx.iter().map(|&i| pool[i]).collect();
    let val: Vec<&StrokeCycle> = val_idx.iter().map(|&i| pool[i]).collect();
    let mut net = config.net(arch).clone();
    net.set_seed(model_seed(
        seed,
        variant,
        arch,
        &format!("reference/{label}"),
    ));
    let model = fit_model(
        variant,
        &net,
        &train,
        &val,
        rig,
        config.pca_mode,
        config.pca_components,
    )?;
    let val_mse = if val.is_empty() {
        f64::NAN
    } else {
        mean(
            &evaluate_cycles(&model, rig, &val, scale)?
                .iter()
                .map(|e| e.mse)
                .collect::<Vec<_>>(),
        )
    };
    Ok((model, val_mse))
}

fn no_excluded(
    spec: &GenTestSpec,
    variant: Variant,
    arch: Architecture,
    seed: u64,
    config: &HarnessConfig,
    scale: f64,
) -> EvalReport {
    EvalReport {
        spec: spec.name.clone(),
        variant,
        architecture: arch,
        seed,
        weighting: config.weighting,
        reference_kind: config.reference,
        thrust_scale: scale,
        n_train_cycles: 0,
        n_val_cycles: 0,
        model_val_mse: None,
        settings: Vec::new(),
        excluded_mse: None,
        reference_mse: None,
        best: None,
        worst: None,
        note: Some("no excluded settings".into()),
    }
}

fn excluded_keys(spec: &GenTestSpec, dataset: &Dataset) -> Vec<SettingKey> {
    dataset
        .settings()
        .into_iter()
        .filter(|k| spec.excludes_key(k))
        .collect()
}

/// Trains on the non-excluded part of `spec`'s universe and evaluates it and
/// `reference` on every cycle of the excluded settings.
#[allow(clippy::too_many_arguments)]
pub fn run_gen_test_with_reference(
    spec: &GenTestSpec,
    variant: Variant,
    arch: Architecture,
    dataset: &Dataset,
    reduced: &[StrokeCycle],
    scale: f64,
    rig: &Rig,
    config: &HarnessConfig,
    seed: u64,
    reference: &SurrogateModel,
) -> Result<EvalReport> {
    let excluded = excluded_keys(spec, dataset);
    if excluded.is_empty() {
        return Ok(no_excluded(spec, variant, arch, seed, config, scale));
    }
    let pool: Vec<&StrokeCycle> = reduced
        .iter()
        .filter(|c| {
            spec.in_universe(&c.shape, c.setting.flap_frequency)
                && !spec.is_excluded(
                    &c.shape,
                    c.setting.flap_frequency,
                    c.setting.pitch_amplitude,
                )
        })
        .collect();
    if pool.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: the exclusions remove all training data",
            spec.name
        )));
    }
    let (train_idx, val_idx) = split_indices(pool.len(), seed, &format!("test/{}", spec.name));
    let train: Vec<&StrokeCycle> = train_idx.iter().map(|&i| pool[i]).collect();
    let val: Vec<&StrokeCycle> = val_idx.iter().map(|&i| pool[i]).collect();
    let mut net = config.net(arch).clone();
    net.set_seed(model_seed(
        seed,
        variant,
        arch,
        &format!("test/{}", spec.name),
    ));
    let model = fit_model(
        variant,
        &net,
        &train,
        &val,
        rig,
        config.pca_mode,
        config.pca_components,
    )?;

    let by_setting = dataset.by_setting();
    let mut settings = Vec::new();
    let mut best: Option<(f64, CycleProfile)> = None;
    let mut worst: Option<(f64, CycleProfile)> = None;
    for key in &excluded {
        let cycles = &by_setting[key];
        let evals = evaluate_cycles(&model, rig, cycles, scale)?;
        let refs = evaluate_cycles(reference, rig, cycles, scale)?;
        for (e, r) in evals.iter().zip(&refs) {
            let profile = || CycleProfile {
                id: e.id.clone(),
                mse: e.mse,
                reference_model_mse: r.mse,
                t: e.t.clone(),
                measured: e.measured.clone(),
                predicted: e.predicted.clone(),
                reference_predicted: r.predicted.clone(),
            };
            if best.as_ref().is_none_or(|b| e.mse < b.0) {
                best = Some((e.mse, profile()));
            }
            if worst.as_ref().is_none_or(|w| e.mse > w.0) {
                worst = Some((e.mse, profile()));
            }
        }
        settings.push(SettingEval {
            key: key.clone(),
            n_cycles: evals.len(),
            mse: mean(&evals.iter().map(|e| e.mse).collect::<Vec<_>>()),
            reference_mse: mean(&refs.iter().map(|e| e.mse).collect::<Vec<_>>()),
        });
    }
    let excluded_mse = overall(
        &settings
            .iter()
            .map(|s| (s.n_cycles, s.mse))
            .collect::<Vec<_>>(),
        config.weighting,
    );
    let reference_mse = overall(
        &settings
            .iter()
            .map(|s| (s.n_cycles, s.reference_mse))
            .collect::<Vec<_>>(),
        config.weighting,
    );
    Ok(EvalReport {
        spec: spec.name.clone(),
        variant,
        architecture: arch,
        seed,
        weighting: config.weighting,
        reference_kind: config.reference,
        thrust_scale: scale,
        n_train_cycles: train.len(),
        n_val_cycles: val.len(),
        model_val_mse: model.history.final_val(),
        settings,
        excluded_mse,
        reference_mse,
        best: best.map(|b| b.1),
        worst: worst.map(|w| w.1),
        note: None,
    })
}

/// One generalizability test end to end: reduced-data selection, the
/// full-data reference, the test model and the report.
pub fn run_gen_test(
    spec: &GenTestSpec,
    variant: Variant,
    arch: Architecture,
    dataset: &Dataset,
    rig: &Rig,
    config: &HarnessConfig,
    seed: u64,
) -> Result<EvalReport> {
    config.validate()?;
    let reduced = select_reduced(dataset, seed)?;
    let scale = reduced_scale(rig, &reduced)?;
    if excluded_keys(spec, dataset).is_empty() {
        return Ok(no_excluded(spec, variant, arch, seed, config, scale));
    }
    let (reference, _) = train_reference(spec, variant, arch, &reduced, scale, rig, config, seed)?;
    run_gen_test_with_reference(
        spec, variant, arch, dataset, &reduced, scale, rig, config, seed, &reference,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub variant: Variant,
    pub architecture: Architecture,
    pub test: String,
    pub excluded_mse: Option<f64>,
    pub reference_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub variant: Variant,
    pub architecture: Architecture,
    pub label: String,
    pub tests: Vec<String>,
    pub mse: f64,
    pub reference_mse: f64,
}

/// Validation MSE of a full-data reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub variant: Variant,
    pub architecture: Architecture,
    pub universe: String,
    pub val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub seed: u64,
    pub thrust_scale: f64,
    pub references: Vec<ReferenceSummary>,
    pub rows: Vec<ComparisonRow>,
    pub averages: Vec<AverageRow>,
    pub reports: Vec<EvalReport>,
}

impl ComparisonTable {
    pub fn average(&self, variant: Variant, arch: Architecture, label: &str) -> Option<f64> {
        self.averages
            .iter()
            .find(|a| a.variant == variant && a.architecture == arch && a.label == label)
            .map(|a| a.mse)
    }
}

pub const KINEMATIC_AVERAGE: &str = "Gen Test 1-4 Avg";
pub const GEOMETRY_AVERAGE: &str = "Gen Test 5-6 Avg";

fn average_rows(variant: Variant, arch: Architecture, reports: &[EvalReport]) -> Vec<AverageRow> {
    let groups: [(&str, &[&str]); 2] = [
        (KINEMATIC_AVERAGE, &["GT1", "GT2", "GT3", "GT4"]),
        (GEOMETRY_AVERAGE, &["GT5", "GT6"]),
    ];
    groups
        .iter()
        .filter_map(|(label, names)| {
            let members: Vec<&EvalReport> = names
                .iter()
                .filter_map(|n| reports.iter().find(|r| r.spec == *n))
                .collect();
            if members.len() != names.len() || members.iter().any(|r| r.excluded_mse.is_none()) {
                return None;
            }
            Some(AverageRow {
                variant,
                architecture: arch,
                label: label.to_string(),
                tests: names.iter().map(|s| s.to_string()).collect(),
                mse: mean(
                    &members
                        .iter()
                        .map(|r| r.excluded_mse.unwrap_or(f64::NAN))
                        .collect::<Vec<_>>(),
                ),
                reference_mse: mean(
                    &members
                        .iter()
                        .map(|r| r.reference_mse.unwrap_or(f64::NAN))
                        .collect::<Vec<_>>(),
                ),
            })
        })
        .collect()
}

/// Runs every (variant, architecture) pair over `specs`. References are
/// trained once per universe and shared by the tests that use it. Pairs run
/// in parallel; every model draws from its own named seed, so the table does
/// not depend on scheduling.
pub fn compare_variants(
    dataset: &Dataset,
    rig: &Rig,
    specs: &[GenTestSpec],
    variants: &[Variant],
    architectures: &[Architecture],
    config: &HarnessConfig,
    seed: u64,
) -> Result<ComparisonTable> {
    config.validate()?;
    let reduced = select_reduced(dataset, seed)?;
    let scale = reduced_scale(rig, &reduced)?;
    let jobs: Vec<(Variant, Architecture)> = variants
        .iter()
        .flat_map(|&v| architectures.iter().map(move |&a| (v, a)))
        .collect();
    let results: Vec<(Vec<ReferenceSummary>, Vec<EvalReport>)> = jobs
        .par_iter()
        .map(|&(variant, arch)| {
            let mut refs: BTreeMap<String, (SurrogateModel, f64)> = BTreeMap::new();
            let mut reports = Vec::new();
            for spec in specs {
                if excluded_keys(spec, dataset).is_empty() {
                    reports.push(no_excluded(spec, variant, arch, seed, config, scale));
                    continue;
                }
                let label = match config.reference {
                    ReferenceKind::Universe => spec.universe_label(),
                    ReferenceKind::AllData => "all".to_string(),
                };
                if !refs.contains_key(&label) {
                    let r =
                        train_reference(spec, variant, arch, &reduced, scale, rig, config, seed)?;
                    refs.insert(label.clone(), r);
                }
                let reference = &refs[&label].0;
                log::info!("{variant} {} {}", arch.label(), spec.name);
                reports.push(run_gen_test_with_reference(
                    spec, variant, arch, dataset, &reduced, scale, rig, config, seed, reference,
                )?);
            }
            let summaries = refs
                .into_iter()
                .map(|(universe, (_, val_mse))| ReferenceSummary {
                    variant,
                    architecture: arch,
                    universe,
                    val_mse,
                })
                .collect();
            Ok((summaries, reports))
        })
        .collect::<Result<_>>()?;

    let mut table = ComparisonTable {
        seed,
        thrust_scale: scale,
        references: Vec::new(),
        rows: Vec::new(),
        averages: Vec::new(),
        reports: Vec::new(),
    };
    for ((variant, arch), (refs, reports)) in jobs.into_iter().zip(results) {
        table.references.extend(refs);
        table.rows.extend(reports.iter().map(|r| ComparisonRow {
            variant,
            architecture: arch,
            test: r.spec.clone(),
            excluded_mse: r.excluded_mse,
            reference_mse: r.reference_mse,
        }));
        table.averages.extend(average_rows(variant, arch, &reports));
        table.reports.extend(reports);
    }
    Ok(table)
}
