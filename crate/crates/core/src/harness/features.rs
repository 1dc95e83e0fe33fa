use crate::error::{Error, Result};
use crate::geometry::shape_code;
use crate::kinematics::{build_input_record, Architecture, FeatureSchema, GeometryInputs, Variant};
use crate::nn::{self, NetConfig, Sequence, SurrogateModel};
use crate::preprocess::NormStats;
use crate::reduction::{fit_pca, PcaMode, PcaReducer};
use crate::rig::Rig;
use crate::synthdata::StrokeCycle;

/// Rotated skeleton vector of every sample of `cycles`, in order.
pub fn skeleton_rows(rig: &Rig, cycles: &[&StrokeCycle]) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for c in cycles {
        for s in &c.samples {
            rows.push(rig.skeleton_vector(&c.shape, s.state.stroke_angle, s.state.pitch_angle)?);
        }
    }
    Ok(rows)
}

/// Raw (unnormalized) input records for one cycle.
pub fn cycle_records(
    rig: &Rig,
    schema: &FeatureSchema,
    reducer: Option<&PcaReducer>,
    cycle: &StrokeCycle,
) -> Result<Vec<Vec<f64>>> {
    let code = match schema.variant {
        Variant::Baseline => Some(shape_code(&cycle.shape).ok_or_else(|| {
            Error::Schema(format!(
                "BASELINE models only know the builtin shapes, not `{}`",
                cycle.shape
            ))
        })?),
        _ => None,
    };
    cycle
        .samples
        .iter()
        .map(|s| {
            let (skeleton, reduced) = match schema.variant {
                Variant::Baseline => (None, None),
                Variant::Fp | Variant::Rfp => (
                    Some(rig.skeleton_vector(
                        &cycle.shape,
                        s.state.stroke_angle,
                        s.state.pitch_angle,
                    )?),
                    None,
                ),
                Variant::Wfp => {
                    let r = reducer
                        .ok_or_else(|| Error::Schema("WFP records need a reducer".into()))?;
                    let sk = rig.skeleton_vector(
                        &cycle.shape,
                        s.state.stroke_angle,
                        s.state.pitch_angle,
                    )?;
                    (None, Some(r.project(&sk)?))
                }
            };
            build_input_record(
                schema,
                &s.state,
                &cycle.setting,
                GeometryInputs {
                    skeleton: skeleton.as_deref(),
                    reduced: reduced.as_deref(),
                    shape_code: code,
                },
            )
        })
        .collect()
}

/// Thrust coefficients of one cycle divided by `scale`.
pub fn cycle_targets(rig: &Rig, cycle: &StrokeCycle, scale: f64) -> Result<Vec<f64>> {
    Ok(cycle
        .thrust_coefficients(rig)?
        .into_iter()
        .map(|c| c / scale)
        .collect())
}

fn sequences(
    model_norm: &NormStats,
    records: Vec<Vec<Vec<f64>>>,
    rig: &Rig,
    cycles: &[&StrokeCycle],
) -> Result<Vec<Sequence>> {
    records
        .into_iter()
        .zip(cycles)
        .map(|(recs, c)| {
            let inputs = recs.iter().map(|r| model_norm.apply(r)).collect();
            Sequence::new(inputs, cycle_targets(rig, c, model_norm.thrust_scale)?)
        })
        .collect()
}

/// Training inputs with the pipeline fitted to them.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub schema: FeatureSchema,
    pub norm: NormStats,
    pub reducer: Option<PcaReducer>,
    pub train: Vec<Sequence>,
    pub val: Vec<Sequence>,
}

/// Fits the input pipeline on `train` (PCA for WFP, then normalization) and
/// turns both sets into normalized sequences.
pub fn prepare(
    variant: Variant,
    arch: Architecture,
    train: &[&StrokeCycle],
    val: &[&StrokeCycle],
    rig: &Rig,
    pca_mode: PcaMode,
    pca_components: usize,
) -> Result<Prepared> {
    if train.is_empty() {
        return Err(Error::Dataset("no training cycles".into()));
    }
    let coeffs: Vec<f64> = train
        .iter()
        .map(|c| c.thrust_coefficients(rig))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let reducer = match variant {
        Variant::Wfp => {
            let rows = skeleton_rows(rig, train)?;
            Some(fit_pca(&rows, Some(&coeffs), pca_mode, pca_components)?)
        }
        _ => None,
    };
    let schema = FeatureSchema::new(variant, arch, pca_components);
    let records = |cycles: &[&StrokeCycle]| {
        cycles
            .iter()
            .map(|c| cycle_records(rig, &schema, reducer.as_ref(), c))
            .collect::<Result<Vec<_>>>()
    };
    let train_records = records(train)?;
    let val_records = records(val)?;
    let norm = NormStats::fit(train_records.iter().flatten().map(Vec::as_slice), &coeffs)?;
    let train_seqs = sequences(&norm, train_records, rig, train)?;
    let val_seqs = sequences(&norm, val_records, rig, val)?;
    Ok(Prepared {
        schema,
        norm,
        reducer,
        train: train_seqs,
        val: val_seqs,
    })
}

/// Prepares the inputs and trains a network of `config`'s architecture.
/// `config.input_dim` is replaced by the schema length.
pub fn fit_model(
    variant: Variant,
    config: &NetConfig,
    train: &[&StrokeCycle],
    val: &[&StrokeCycle],
    rig: &Rig,
    pca_mode: PcaMode,
    pca_components: usize,
) -> Result<SurrogateModel> {
    let p = prepare(
        variant,
        config.architecture(),
        train,
        val,
        rig,
        pca_mode,
        pca_components,
    )?;
    let mut config = config.clone();
    config.set_input_dim(p.schema.len());
    let trained = nn::train(&config, &p.train, &p.val)?;
    SurrogateModel::new(
        p.schema,
        config,
        trained.network,
        p.norm,
        p.reducer,
        trained.history,
    )
}
