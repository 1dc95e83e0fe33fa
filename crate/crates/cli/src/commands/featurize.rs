use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use finsurr::geometry::{builtin_shape, AxisFrame, FinShape, DEFAULT_STRIPS};
use finsurr::kinematics::{generate_cycle, KinematicSetting, DEFAULT_PITCH_PHASE_DEG};
use finsurr::rig::{Rig, RigParams};
use serde::{Deserialize, Serialize};

use super::csv_row;
use crate::context::{config_error, CliResult, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    /// Axes offset as on the test rig.
    #[default]
    Rig,
    /// Axes through the outline's own origin.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettingConfig {
    pub flap_frequency: f64,
    pub stroke_amplitude: f64,
    pub pitch_amplitude: f64,
    pub n_steps_per_cycle: usize,
    pub pitch_phase_deg: f64,
}

impl Default for SettingConfig {
    fn default() -> Self {
        SettingConfig {
            flap_frequency: 1.0,
            stroke_amplitude: 60.0,
            pitch_amplitude: 0.0,
            n_steps_per_cycle: 24,
            pitch_phase_deg: DEFAULT_PITCH_PHASE_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeConfig {
    /// Outline JSON file.
    pub shape: Option<PathBuf>,
    /// Name of a shipped outline, used when no file is given.
    pub builtin: Option<String>,
    pub frame: FrameKind,
    pub n_strips: usize,
    /// When set, one cycle of rotated skeletons is written too.
    pub setting: Option<SettingConfig>,
}

impl Default for FeaturizeConfig {
    fn default() -> Self {
        FeaturizeConfig {
            shape: None,
            builtin: None,
            frame: FrameKind::Rig,
            n_strips: DEFAULT_STRIPS,
            setting: None,
        }
    }
}

/// Segment a fin outline into its flat skeleton and, optionally, rotate it
/// through one stroke cycle.
#[derive(Debug, Clone, Args)]
pub struct FeaturizeArgs {
    /// Outline JSON file: {"name": ..., "vertices": [[x, z], ...]} in cm.
    #[arg(long, conflicts_with = "builtin")]
    pub shape: Option<PathBuf>,
    /// Shipped outline: rect, bio or pt4.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Axis frame the outline is registered in.
    #[arg(long, value_enum)]
    pub frame: Option<FrameKind>,
    /// Number of equal-area strips.
    #[arg(long)]
    pub strips: Option<usize>,
    /// Flap frequency, Hz. Any kinematic flag enables cycle output.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Stroke amplitude, degrees.
    #[arg(long)]
    pub stroke_amp: Option<f64>,
    /// Pitch amplitude, degrees.
    #[arg(long)]
    pub pitch_amp: Option<f64>,
    /// Samples per stroke cycle.
    #[arg(long)]
    pub steps: Option<usize>,
}

impl FeaturizeArgs {
    pub fn apply(self, c: &mut FeaturizeConfig) {
        if let Some(p) = self.shape {
            c.shape = Some(p);
            c.builtin = None;
        }
        if let Some(b) = self.builtin {
            c.builtin = Some(b);
            c.shape = None;
        }
        if let Some(f) = self.frame {
            c.frame = f;
        }
        if let Some(n) = self.strips {
            c.n_strips = n;
        }
        let kinematic = [self.freq, self.stroke_amp, self.pitch_amp]
            .iter()
            .any(Option::is_some)
            || self.steps.is_some();
        if kinematic {
            let s = c.setting.get_or_insert_with(SettingConfig::default);
            if let Some(v) = self.freq {
                s.flap_frequency = v;
            }
            if let Some(v) = self.stroke_amp {
                s.stroke_amplitude = v;
            }
            if let Some(v) = self.pitch_amp {
                s.pitch_amplitude = v;
            }
            if let Some(v) = self.steps {
                s.n_steps_per_cycle = v;
            }
        }
    }
}

pub fn run(config: &FeaturizeConfig, run: &mut Run) -> CliResult<()> {
    let shape = match (&config.shape, &config.builtin) {
        (Some(path), _) => {
            run.input(path)?;
            FinShape::load(path)?
        }
        (None, Some(name)) => builtin_shape(name)
            .ok_or_else(|| config_error(format!("no builtin fin shape named `{name}`")))?,
        (None, None) => return Err(config_error("give --shape or --builtin")),
    };
    let frame = match config.frame {
        FrameKind::Rig => AxisFrame::rig(),
        FrameKind::Origin => AxisFrame::origin(),
    };
    let params = RigParams {
        frame,
        n_strips: config.n_strips,
        pitch_phase_deg: config
            .setting
            .map_or(DEFAULT_PITCH_PHASE_DEG, |s| s.pitch_phase_deg),
        ..RigParams::default()
    };
    let name = shape.name().to_string();
    let rig = Rig::new(params, [shape])?;
    let flat = &rig.geometry(&name)?.flat;

    let mut text = String::from("strip,z_lo,z_hi,area,x,z\n");
    for (i, (com, area)) in flat.coms.iter().zip(&flat.strip_areas).enumerate() {
        let row = csv_row(&[flat.cuts[i], flat.cuts[i + 1], *area, com[0], com[1]]);
        writeln!(text, "{},{row}", i + 1).expect("string write");
    }
    run.write("skeleton.csv", text)?;
    log::info!(
        "{name}: area {:.4} cm², {} strips",
        flat.total_area,
        flat.len()
    );

    if let Some(s) = config.setting {
        let setting = KinematicSetting::new(
            s.stroke_amplitude,
            s.pitch_amplitude,
            s.flap_frequency,
            s.n_steps_per_cycle,
        )?;
        let mut text = String::from("t_s,stroke_angle,pitch_angle,stroke_state");
        for i in 1..=flat.len() {
            write!(text, ",x{i},y{i},z{i}").expect("string write");
        }
        text.push('\n');
        for state in generate_cycle(&setting, s.pitch_phase_deg) {
            let sk = rig.skeleton_vector(&name, state.stroke_angle, state.pitch_angle)?;
            writeln!(
                text,
                "{},{},{}",
                csv_row(&[state.t, state.stroke_angle, state.pitch_angle]),
                state.stroke_state,
                csv_row(&sk)
            )
            .expect("string write");
        }
        run.write("cycle.csv", text)?;
    }
    Ok(())
}
