use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::{oracle_thrust, DEFAULT_THRUST_GAIN};
use super::{CycleSample, Dataset, SettingKey, StrokeCycle};
use crate::error::{Error, Result};
use crate::geometry::{builtin_shape, rotate_skeleton, FinShape};
use crate::kinematics::{generate_cycle_from, KinematicSetting};
use crate::preprocess::{self, DevSample, DEFAULT_DEV_BINS};
use crate::rig::{Rig, RigParams};
use crate::seed;

/// `(flap frequency Hz, pitch amplitude deg)` at which shape separation is
/// checked.
pub const SEPARATION_REFERENCE: (f64, f64) = (1.0, 40.0);
/// Required separation, in multiples of the default within-run deviation.
const SEPARATION_FACTOR: f64 = 5.0;

/// A fin in the grid: either a shipped outline by name or an explicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeSpec {
    Builtin(String),
    Outline {
        name: String,
        vertices: Vec<[f64; 2]>,
    },
}

impl ShapeSpec {
    pub fn name(&self) -> &str {
        match self {
            ShapeSpec::Builtin(n) => n,
            ShapeSpec::Outline { name, .. } => name,
        }
    }

    pub fn resolve(&self) -> Result<FinShape> {
        match self {
            ShapeSpec::Builtin(n) => builtin_shape(n)
                .ok_or_else(|| Error::Config(format!("no builtin fin shape named `{n}`"))),
            ShapeSpec::Outline { name, vertices } => FinShape::new(name.clone(), vertices.clone()),
        }
    }
}

/// Removes settings from the grid. Unset fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Exclusion {
    pub shape: Option<String>,
    pub flap_frequency: Option<f64>,
    pub pitch_amplitude: Option<f64>,
}

impl Exclusion {
    pub fn matches(&self, shape: &str, freq: f64, pitch: f64) -> bool {
        self.shape.as_deref().is_none_or(|s| s == shape)
            && self.flap_frequency.is_none_or(|f| f == freq)
            && self.pitch_amplitude.is_none_or(|p| p == pitch)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetGrid {
    pub frequencies: Vec<f64>,
    pub pitch_amplitudes: Vec<f64>,
    /// `(flap frequency, stroke amplitude)` pairs.
    pub stroke_amplitudes: Vec<(f64, f64)>,
    pub shapes: Vec<ShapeSpec>,
    pub runs_per_setting: usize,
    pub cycles_per_run: usize,
    pub n_steps_per_cycle: usize,
    pub exclusions: Vec<Exclusion>,
    pub rig: RigParams,
    pub thrust_gain: f64,
}

impl Default for DatasetGrid {
    /// Two frequencies, five pitch amplitudes, three fins, 16 runs of 5
    /// cycles; pt4 has no 2 Hz runs and the 2 Hz / 25° bio setting is
    /// missing.
    fn default() -> Self {
        DatasetGrid {
            frequencies: vec![1.0, 2.0],
            pitch_amplitudes: vec![0.0, 15.0, 25.0, 40.0, 55.0],
            stroke_amplitudes: vec![(1.0, 60.0), (2.0, 25.0)],
            shapes: ["rect", "bio", "pt4"]
                .map(|s| ShapeSpec::Builtin(s.into()))
                .to_vec(),
            runs_per_setting: 16,
            cycles_per_run: 5,
            n_steps_per_cycle: 24,
            exclusions: vec![
                Exclusion {
                    shape: Some("pt4".into()),
                    flap_frequency: Some(2.0),
                    pitch_amplitude: None,
                },
                Exclusion {
                    shape: Some("bio".into()),
                    flap_frequency: Some(2.0),
                    pitch_amplitude: Some(25.0),
                },
            ],
            rig: RigParams::default(),
            thrust_gain: DEFAULT_THRUST_GAIN,
        }
    }
}

impl DatasetGrid {
    pub fn build_rig(&self) -> Result<Rig> {
        let shapes = self
            .shapes
            .iter()
            .map(ShapeSpec::resolve)
            .collect::<Result<Vec<_>>>()?;
        Rig::new(self.rig, shapes)
    }

    pub fn stroke_amplitude(&self, freq: f64) -> Result<f64> {
        self.stroke_amplitudes
            .iter()
            .find(|(f, _)| *f == freq)
            .map(|&(_, a)| a)
            .ok_or_else(|| Error::Config(format!("no stroke amplitude configured for {freq} Hz")))
    }

    /// Every non-excluded (shape, kinematics) pair, in grid order.
    pub fn settings(&self) -> Result<Vec<(String, KinematicSetting)>> {
        if self.runs_per_setting == 0 || self.cycles_per_run == 0 {
            return Err(Error::Config(
                "runs and cycles per setting must be positive".into(),
            ));
        }
        let mut out = Vec::new();
        for shape in &self.shapes {
            for &freq in &self.frequencies {
                for &pitch in &self.pitch_amplitudes {
                    if self
                        .exclusions
                        .iter()
                        .any(|e| e.matches(shape.name(), freq, pitch))
                    {
                        continue;
                    }
                    let setting = KinematicSetting::new(
                        self.stroke_amplitude(freq)?,
                        pitch,
                        freq,
                        self.n_steps_per_cycle,
                    )?;
                    out.push((shape.name().to_string(), setting));
                }
            }
        }
        Ok(out)
    }
}

/// Targets for injected measurement noise, in normalized thrust units.
///
/// Each run gets an additive offset and each sample white noise. Their ratio
/// follows from the two targets (`bias² + sample² = across²`,
/// `sample = within`); the overall magnitude is then calibrated per setting
/// so that the measured across-run thrust deviation hits `across_run_dev`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub across_run_dev: f64,
    pub within_run_dev: f64,
    /// Start each cycle at a random offset within one sample interval, as
    /// unsynchronized acquisition would.
    pub phase_jitter: bool,
    pub n_bins: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            across_run_dev: 0.2588,
            within_run_dev: 0.103,
            phase_jitter: true,
            n_bins: DEFAULT_DEV_BINS,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        NoiseConfig {
            across_run_dev: 0.0,
            within_run_dev: 0.0,
            phase_jitter: false,
            n_bins: DEFAULT_DEV_BINS,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.across_run_dev == 0.0 && self.within_run_dev == 0.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.across_run_dev >= 0.0 && self.within_run_dev >= 0.0) {
            return Err(Error::Config("noise targets must be non-negative".into()));
        }
        if self.within_run_dev > self.across_run_dev {
            return Err(Error::Config(format!(
                "within-run deviation {} exceeds across-run deviation {}",
                self.within_run_dev, self.across_run_dev
            )));
        }
        if self.n_bins == 0 {
            return Err(Error::Config("n_bins must be positive".into()));
        }
        Ok(())
    }

    fn unit_mix(&self) -> (f64, f64) {
        let bias = (self.across_run_dev.powi(2) - self.within_run_dev.powi(2))
            .max(0.0)
            .sqrt();
        (bias, self.within_run_dev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub setting: SettingKey,
    /// Multiplier applied to the unit noise mix.
    pub noise_scale: f64,
    pub bias_std: f64,
    pub sample_std: f64,
    /// `bias_std² + sample_std²`, normalized thrust units.
    pub injected_variance: f64,
    pub across_run_dev: f64,
    pub within_run_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSeparation {
    pub flap_frequency: f64,
    pub pitch_amplitude: f64,
    /// Noise-free cycle-mean normalized thrust per shape.
    pub cycle_means: Vec<(String, f64)>,
    pub min_separation: f64,
    pub threshold: f64,
}

impl ShapeSeparation {
    pub fn passed(&self) -> bool {
        self.min_separation > self.threshold
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    /// Normalized-thrust divisor of the generated coefficients.
    pub thrust_scale: f64,
    pub calibration: Vec<CalibrationRecord>,
    pub separation: Vec<ShapeSeparation>,
}

impl GeneratedDataset {
    /// Mean injected per-sample noise variance over settings.
    pub fn injected_variance(&self) -> f64 {
        if self.calibration.is_empty() {
            return 0.0;
        }
        preprocess::mean(
            &self
                .calibration
                .iter()
                .map(|c| c.injected_variance)
                .collect::<Vec<_>>(),
        )
    }

    pub fn reference_separation(&self) -> Option<&ShapeSeparation> {
        self.separation
            .iter()
            .find(|s| (s.flap_frequency, s.pitch_amplitude) == SEPARATION_REFERENCE)
    }
}

/// One setting's noise-free cycles plus its unit noise draws.
struct SettingDraw {
    shape: String,
    setting: KinematicSetting,
    dynamic_force: f64,
    /// Per cycle: (run, cycle, states, clean coefficients, unit noise).
    cycles: Vec<CycleDraw>,
}

struct CycleDraw {
    run: usize,
    cycle: usize,
    states: Vec<crate::kinematics::KinematicState>,
    clean: Vec<f64>,
    noise: Vec<f64>,
}

const MAX_SCALE_ITERS: usize = 50;

pub fn generate_dataset(
    grid: &DatasetGrid,
    noise: &NoiseConfig,
    master_seed: u64,
) -> Result<GeneratedDataset> {
    noise.validate()?;
    let rig = grid.build_rig()?;
    let settings = grid.settings()?;
    let (bias_unit, sample_unit) = noise.unit_mix();

    let draws: Vec<SettingDraw> = settings
        .par_iter()
        .map(|(shape, setting)| {
            draw_setting(
                grid,
                &rig,
                noise,
                shape,
                setting,
                master_seed,
                bias_unit,
                sample_unit,
            )
        })
        .collect::<Result<_>>()?;

    let clean_all: Vec<f64> = draws
        .iter()
        .flat_map(|d| d.cycles.iter().flat_map(|c| c.clean.iter().copied()))
        .collect();
    let clean_scale = preprocess::population_std(&clean_all);
    let mut thrust_scale = if clean_scale > 0.0 { clean_scale } else { 1.0 };

    let mut scales = vec![0.0; draws.len()];
    if !noise.is_noiseless() {
        // The normalizing scale depends on the injected noise and vice versa;
        // iterate to the fixed point.
        for _ in 0..MAX_SCALE_ITERS {
            scales = draws
                .par_iter()
                .map(|d| calibrate_setting(d, thrust_scale, noise))
                .collect::<Result<_>>()?;
            let noisy: Vec<f64> = draws
                .iter()
                .zip(&scales)
                .flat_map(|(d, &s)| {
                    d.cycles.iter().flat_map(move |c| {
                        c.clean
                            .iter()
                            .zip(&c.noise)
                            .map(move |(x, e)| x + s * thrust_scale * e)
                    })
                })
                .collect();
            let next = preprocess::population_std(&noisy);
            let converged = (next - thrust_scale).abs() <= 1e-12 * thrust_scale;
            thrust_scale = next;
            if converged {
                break;
            }
        }
    }

    let mut cycles = Vec::new();
    let mut calibration = Vec::new();
    for (d, &s) in draws.iter().zip(&scales) {
        let mut group = Vec::with_capacity(d.cycles.len());
        for c in &d.cycles {
            let samples = c
                .states
                .iter()
                .zip(c.clean.iter().zip(&c.noise))
                .map(|(state, (x, e))| CycleSample {
                    state: *state,
                    thrust: (x + s * thrust_scale * e) * d.dynamic_force,
                })
                .collect();
            group.push(StrokeCycle {
                shape: d.shape.clone(),
                setting: d.setting,
                run: c.run,
                cycle: c.cycle,
                samples,
            });
        }
        if !noise.is_noiseless() {
            let refs: Vec<&StrokeCycle> = group.iter().collect();
            let across = preprocess::thrust_deviation(
                &super::deviation_samples(&refs, &rig, thrust_scale)?,
                noise.n_bins,
            )?;
            let mut within = Vec::new();
            for run in refs.chunk_by(|a, b| a.run == b.run) {
                if run.len() >= 2 {
                    within.push(preprocess::thrust_deviation(
                        &super::deviation_samples(run, &rig, thrust_scale)?,
                        noise.n_bins,
                    )?);
                }
            }
            calibration.push(CalibrationRecord {
                setting: SettingKey::new(&d.shape, &d.setting),
                noise_scale: s,
                bias_std: s * bias_unit,
                sample_std: s * sample_unit,
                injected_variance: s * s * (bias_unit * bias_unit + sample_unit * sample_unit),
                across_run_dev: across,
                within_run_dev: if within.is_empty() {
                    0.0
                } else {
                    preprocess::mean(&within)
                },
            });
        }
        cycles.extend(group);
    }

    let separation = shape_separation(&draws, thrust_scale);
    if let Some(sep) = separation
        .iter()
        .find(|s| (s.flap_frequency, s.pitch_amplitude) == SEPARATION_REFERENCE)
    {
        if !sep.passed() {
            log::warn!(
                "fin shapes are poorly separated at {} Hz / {}°: {:.4} <= {:.4}",
                sep.flap_frequency,
                sep.pitch_amplitude,
                sep.min_separation,
                sep.threshold
            );
        }
    }

    Ok(GeneratedDataset {
        dataset: Dataset::new(cycles),
        thrust_scale,
        calibration,
        separation,
    })
}

#[allow(clippy::too_many_arguments)]
fn draw_setting(
    grid: &DatasetGrid,
    rig: &Rig,
    noise: &NoiseConfig,
    shape: &str,
    setting: &KinematicSetting,
    master_seed: u64,
    bias_unit: f64,
    sample_unit: f64,
) -> Result<SettingDraw> {
    let key = SettingKey::new(shape, setting);
    let mut rng = seed::substream(master_seed, &format!("synth/{key}"));
    let geom = rig.geometry(shape)?;
    let phase = rig.params.pitch_phase_deg;
    let dt = setting.dt();
    let mut cycles = Vec::with_capacity(grid.runs_per_setting * grid.cycles_per_run);
    for run in 0..grid.runs_per_setting {
        let bias: f64 = rng.sample(StandardNormal);
        for cycle in 0..grid.cycles_per_run {
            let t0 = if noise.phase_jitter {
                rng.gen::<f64>() * dt
            } else {
                0.0
            };
            // Each cycle occupies its own period in absolute time.
            let start = (run * grid.cycles_per_run + cycle) as f64 * setting.period() + t0;
            let states = generate_cycle_from(setting, phase, start);
            let times: Vec<f64> = states.iter().map(|s| s.t).collect();
            let frames: Vec<_> = states
                .iter()
                .map(|s| rotate_skeleton(&geom.flat, s.stroke_angle, s.pitch_angle))
                .collect();
            let thrust = oracle_thrust(
                &times,
                &frames,
                &geom.flat,
                setting,
                rig.params.density,
                grid.thrust_gain,
            )?;
            let q = rig.dynamic_force(shape, setting)?;
            let clean: Vec<f64> = thrust.iter().map(|t| t / q).collect();
            let noise: Vec<f64> = (0..states.len())
                .map(|_| {
                    let e: f64 = rng.sample(StandardNormal);
                    bias_unit * bias + sample_unit * e
                })
                .collect();
            cycles.push(CycleDraw {
                run,
                cycle,
                states,
                clean,
                noise,
            });
        }
    }
    Ok(SettingDraw {
        shape: shape.to_string(),
        setting: *setting,
        dynamic_force: rig.dynamic_force(shape, setting)?,
        cycles,
    })
}

fn setting_dev(d: &SettingDraw, thrust_scale: f64, s: f64, n_bins: usize) -> Result<f64> {
    let samples: Vec<Vec<DevSample>> = d
        .cycles
        .iter()
        .map(|c| {
            c.states
                .iter()
                .zip(c.clean.iter().zip(&c.noise))
                .map(|(st, (x, e))| DevSample {
                    stroke_angle: st.stroke_angle,
                    stroke_state: st.stroke_state,
                    thrust: x / thrust_scale + s * e,
                })
                .collect()
        })
        .collect();
    preprocess::thrust_deviation(&samples, n_bins)
}

/// Noise multiplier that brings the setting's across-run deviation to target.
fn calibrate_setting(d: &SettingDraw, thrust_scale: f64, noise: &NoiseConfig) -> Result<f64> {
    if d.cycles.len() < 2 {
        return Ok(1.0);
    }
    let target = noise.across_run_dev;
    let f = |s: f64| setting_dev(d, thrust_scale, s, noise.n_bins).map(|v| v - target);
    if f(0.0)? >= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut grow = 0;
    while f(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Internal(format!(
                "noise calibration for {} did not bracket the target",
                SettingKey::new(&d.shape, &d.setting)
            )));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn shape_separation(draws: &[SettingDraw], thrust_scale: f64) -> Vec<ShapeSeparation> {
    let threshold = SEPARATION_FACTOR * NoiseConfig::default().within_run_dev;
    let mut by_kin: BTreeMap<(u64, u64), Vec<(String, f64)>> = BTreeMap::new();
    for d in draws {
        let all: Vec<f64> = d
            .cycles
            .iter()
            .flat_map(|c| c.clean.iter().copied())
            .collect();
        let m = preprocess::mean(&all) / thrust_scale;
        by_kin
            .entry((
                d.setting.flap_frequency.to_bits(),
                d.setting.pitch_amplitude.to_bits(),
            ))
            .or_default()
            .push((d.shape.clone(), m));
    }
    by_kin
        .into_iter()
        .filter(|(_, v)| v.len() >= 2)
        .map(|((f, p), cycle_means)| {
            let mut min_sep = f64::INFINITY;
            for (i, a) in cycle_means.iter().enumerate() {
                for b in &cycle_means[i + 1..] {
                    min_sep = min_sep.min((a.1 - b.1).abs());
                }
            }
            ShapeSeparation {
                flap_frequency: f64::from_bits(f),
                pitch_amplitude: f64::from_bits(p),
                cycle_means,
                min_separation: min_sep,
                threshold,
            }
        })
        .collect()
}
