//! Synthetic stroke/pitch kinematics and per-instant model input records.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lead of pitch over stroke, degrees.
pub const DEFAULT_PITCH_PHASE_DEG: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSetting {
    /// Peak stroke angle, degrees.
    pub stroke_amplitude: f64,
    /// Peak pitch angle, degrees.
    pub pitch_amplitude: f64,
    /// Flap frequency, Hz.
    pub flap_frequency: f64,
    pub n_steps_per_cycle: usize,
}

impl KinematicSetting {
    pub fn new(
        stroke_amplitude: f64,
        pitch_amplitude: f64,
        flap_frequency: f64,
        n_steps_per_cycle: usize,
    ) -> Result<Self> {
        let s = KinematicSetting {
            stroke_amplitude,
            pitch_amplitude,
            flap_frequency,
            n_steps_per_cycle,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.flap_frequency > 0.0 && self.flap_frequency.is_finite()) {
            return Err(Error::InvalidSetting(format!(
                "flap frequency must be positive, got {}",
                self.flap_frequency
            )));
        }
        if self.n_steps_per_cycle < 8 {
            return Err(Error::InvalidSetting(format!(
                "need at least 8 steps per cycle, got {}",
                self.n_steps_per_cycle
            )));
        }
        for (label, a) in [
            ("stroke", self.stroke_amplitude),
            ("pitch", self.pitch_amplitude),
        ] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidSetting(format!(
                    "{label} amplitude must be non-negative, got {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.flap_frequency
    }

    pub fn dt(&self) -> f64 {
        self.period() / self.n_steps_per_cycle as f64
    }

    pub fn stroke_angle(&self, t: f64) -> f64 {
        self.stroke_amplitude * (TAU * self.flap_frequency * t).sin()
    }

    pub fn pitch_angle(&self, t: f64, phase_deg: f64) -> f64 {
        self.pitch_amplitude * (TAU * self.flap_frequency * t + phase_deg.to_radians()).sin()
    }

    /// Stroke angular rate, degrees per second.
    pub fn stroke_rate(&self, t: f64) -> f64 {
        let w = TAU * self.flap_frequency;
        self.stroke_amplitude * w * (w * t).cos()
    }

    /// Pitch angular rate, degrees per second.
    pub fn pitch_rate(&self, t: f64, phase_deg: f64) -> f64 {
        let w = TAU * self.flap_frequency;
        self.pitch_amplitude * w * (w * t + phase_deg.to_radians()).cos()
    }

    pub fn state_at(&self, t: f64, phase_deg: f64) -> KinematicState {
        KinematicState {
            t,
            stroke_angle: self.stroke_angle(t),
            pitch_angle: self.pitch_angle(t, phase_deg),
            // Zero-rate instants count as upstroke.
            stroke_state: u8::from(self.stroke_rate(t) >= 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub t: f64,
    pub stroke_angle: f64,
    pub pitch_angle: f64,
    /// 1 on the upstroke, 0 on the downstroke.
    pub stroke_state: u8,
}

/// One period of sinusoidal kinematics, `n_steps_per_cycle` uniform samples
/// starting at `t = 0`, endpoint excluded.
pub fn generate_cycle(setting: &KinematicSetting, pitch_phase_deg: f64) -> Vec<KinematicState> {
    generate_cycle_from(setting, pitch_phase_deg, 0.0)
}

/// Like [`generate_cycle`] but sampling starts at `t0`.
pub fn generate_cycle_from(
    setting: &KinematicSetting,
    pitch_phase_deg: f64,
    t0: f64,
) -> Vec<KinematicState> {
    let dt = setting.dt();
    (0..setting.n_steps_per_cycle)
        .map(|k| setting.state_at(t0 + k as f64 * dt, pitch_phase_deg))
        .collect()
}

/// Which inputs a surrogate sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    /// Kinematics plus a categorical shape code.
    Baseline,
    /// Kinematics plus the 30 skeleton values.
    Fp,
    /// Flap frequency and stroke state plus the 30 skeleton values.
    Rfp,
    /// Kinematics plus PCA-reduced skeleton features.
    Wfp,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::Fp, Variant::Rfp, Variant::Wfp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Baseline => "BASELINE",
            Variant::Fp => "FP",
            Variant::Rfp => "RFP",
            Variant::Wfp => "WFP",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BASELINE" => Ok(Variant::Baseline),
            "FP" => Ok(Variant::Fp),
            "RFP" => Ok(Variant::Rfp),
            "WFP" => Ok(Variant::Wfp),
            _ => Err(Error::Config(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Dense,
    Recurrent,
}

impl Architecture {
    pub const ALL: [Architecture; 2] = [Architecture::Dense, Architecture::Recurrent];

    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::Dense => "dense",
            Architecture::Recurrent => "recurrent",
        }
    }

    /// Short tag used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Architecture::Dense => "DNN",
            Architecture::Recurrent => "LSTM",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dense" | "dnn" => Ok(Architecture::Dense),
            "recurrent" | "lstm" => Ok(Architecture::Recurrent),
            _ => Err(Error::Config(format!("unknown architecture `{s}`"))),
        }
    }
}

/// Input layout for one (variant, architecture) pair.
///
/// Layouts, in order:
/// - BASELINE: stroke_amp, pitch_amp, flap_freq, stroke_angle, pitch_angle,
///   stroke_state, shape_code
/// - FP: the BASELINE kinematic block, then skeleton `x1 y1 z1 .. x10 y10 z10`
/// - RFP: flap_freq, stroke_state, then the skeleton
/// - WFP: the BASELINE kinematic block, then `pc1 .. pck`
///
/// Recurrent models drop `stroke_state` from BASELINE, FP and WFP; they see
/// whole cycles and can infer stroke direction. RFP keeps it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub variant: Variant,
    pub architecture: Architecture,
    /// Skeleton length for FP/RFP, reduced dimension for WFP.
    pub geometry_dim: usize,
}

pub const SKELETON_DIM: usize = 30;

impl FeatureSchema {
    pub fn new(variant: Variant, architecture: Architecture, reduced_dim: usize) -> Self {
        let geometry_dim = match variant {
            Variant::Baseline => 0,
            Variant::Fp | Variant::Rfp => SKELETON_DIM,
            Variant::Wfp => reduced_dim,
        };
        FeatureSchema {
            variant,
            architecture,
            geometry_dim,
        }
    }

    fn with_stroke_state(&self) -> bool {
        self.architecture == Architecture::Dense || self.variant == Variant::Rfp
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = match self.variant {
            Variant::Rfp => vec!["flap_freq".into()],
            _ => [
                "stroke_amp",
                "pitch_amp",
                "flap_freq",
                "stroke_angle",
                "pitch_angle",
            ]
            .map(String::from)
            .to_vec(),
        };
        if self.with_stroke_state() {
            names.push("stroke_state".into());
        }
        match self.variant {
            Variant::Baseline => names.push("shape_code".into()),
            Variant::Fp | Variant::Rfp => {
                for i in 0..self.geometry_dim / 3 {
                    for axis in ["x", "y", "z"] {
                        names.push(format!("{axis}{}", i + 1));
                    }
                }
            }
            Variant::Wfp => names.extend((1..=self.geometry_dim).map(|i| format!("pc{i}"))),
        }
        names
    }

    pub fn len(&self) -> usize {
        let kin = match self.variant {
            Variant::Rfp => 1,
            _ => 5,
        };
        let shape = match self.variant {
            Variant::Baseline => 1,
            _ => self.geometry_dim,
        };
        kin + usize::from(self.with_stroke_state()) + shape
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Geometry inputs available for one instant; which are required depends on
/// the variant.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeometryInputs<'a> {
    pub skeleton: Option<&'a [f64]>,
    pub reduced: Option<&'a [f64]>,
    pub shape_code: Option<f64>,
}

pub fn build_input_record(
    schema: &FeatureSchema,
    state: &KinematicState,
    setting: &KinematicSetting,
    geometry: GeometryInputs<'_>,
) -> Result<Vec<f64>> {
    let missing = |block: &str| {
        Error::Schema(format!(
            "{} {} record needs the {block} block",
            schema.variant, schema.architecture
        ))
    };
    let mut rec = Vec::with_capacity(schema.len());
    if schema.variant == Variant::Rfp {
        rec.push(setting.flap_frequency);
    } else {
        rec.extend([
            setting.stroke_amplitude,
            setting.pitch_amplitude,
            setting.flap_frequency,
            state.stroke_angle,
            state.pitch_angle,
        ]);
    }
    if schema.with_stroke_state() {
        rec.push(f64::from(state.stroke_state));
    }
    match schema.variant {
        Variant::Baseline => rec.push(geometry.shape_code.ok_or_else(|| missing("shape_code"))?),
        Variant::Fp | Variant::Rfp => {
            let sk = geometry.skeleton.ok_or_else(|| missing("skeleton"))?;
            if sk.len() != schema.geometry_dim {
                return Err(Error::Dimension {
                    expected: schema.geometry_dim,
                    actual: sk.len(),
                });
            }
            rec.extend_from_slice(sk);
        }
        Variant::Wfp => {
            let red = geometry.reduced.ok_or_else(|| missing("reduced"))?;
            if red.len() != schema.geometry_dim {
                return Err(Error::Dimension {
                    expected: schema.geometry_dim,
                    actual: red.len(),
                });
            }
            rec.extend_from_slice(red);
        }
    }
    debug_assert_eq!(rec.len(), schema.len());
    Ok(rec)
}

/// Formats a float with 17 significant digits; parsing it back is exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn record_to_csv(record: &[f64]) -> String {
    record
        .iter()
        .map(|&x| fmt_f64(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_record(line: &str) -> Result<Vec<f64>> {
    line.trim()
        .split(',')
        .enumerate()
        .map(|(i, field)| {
            field.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: "<record>".into(),
                line: 1,
                reason: format!("field {i}: {e}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(stroke: f64, pitch: f64, f: f64, n: usize) -> KinematicSetting {
        KinematicSetting::new(stroke, pitch, f, n).unwrap()
    }

    #[test]
    fn quarter_period_samples() {
        let cyc = generate_cycle(&setting(60.0, 40.0, 1.0, 8), 0.0);
        let ts: Vec<f64> = cyc.iter().map(|s| s.t).collect();
        assert_eq!(ts[2], 0.25);
        for (k, expect) in [(0, 0.0), (2, 60.0), (4, 0.0), (6, -60.0)] {
            assert!((cyc[k].stroke_angle - expect).abs() < 1e-12, "{k}");
            assert!((cyc[k].t - 0.125 * k as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_pitch_amplitude() {
        let cyc = generate_cycle(&setting(60.0, 0.0, 1.0, 100), 0.0);
        assert!(cyc.iter().all(|s| s.pitch_angle == 0.0));
    }

    #[test]
    fn stroke_state_switches_twice() {
        for n in [8, 24, 25, 100] {
            let s = setting(60.0, 40.0, 2.0, n);
            let cyc = generate_cycle(&s, 90.0);
            // Independent route: sign of the periodic forward difference.
            let fd_up: Vec<bool> = (0..n)
                .map(|k| {
                    let next = s.stroke_angle((k + 1) as f64 * s.dt());
                    let prev = s.stroke_angle(k as f64 * s.dt() - s.dt());
                    next - prev >= 0.0
                })
                .collect();
            let switches = (0..n).filter(|&k| fd_up[k] != fd_up[(k + 1) % n]).count();
            assert_eq!(switches, 2);
            let switches = (0..n)
                .filter(|&k| cyc[k].stroke_state != cyc[(k + 1) % n].stroke_state)
                .count();
            assert_eq!(switches, 2, "n = {n}");
        }
    }

    #[test]
    fn periodic() {
        let s = setting(25.0, 55.0, 2.0, 24);
        let cyc = generate_cycle(&s, 90.0);
        let later = s.state_at(s.period(), 90.0);
        assert!((cyc[0].stroke_angle - later.stroke_angle).abs() < 1e-12);
        assert!((cyc[0].pitch_angle - later.pitch_angle).abs() < 1e-12);
    }

    #[test]
    fn invalid_settings() {
        assert!(KinematicSetting::new(60.0, 0.0, 0.0, 10).is_err());
        assert!(KinematicSetting::new(60.0, 0.0, 1.0, 7).is_err());
        assert!(KinematicSetting::new(-1.0, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn schema_lengths() {
        use Architecture::*;
        use Variant::*;
        assert_eq!(FeatureSchema::new(Baseline, Dense, 4).len(), 7);
        assert_eq!(FeatureSchema::new(Baseline, Recurrent, 4).len(), 6);
        assert_eq!(FeatureSchema::new(Fp, Dense, 4).len(), 36);
        assert_eq!(FeatureSchema::new(Fp, Recurrent, 4).len(), 35);
        assert_eq!(FeatureSchema::new(Rfp, Dense, 4).len(), 32);
        assert_eq!(FeatureSchema::new(Rfp, Recurrent, 4).len(), 32);
        assert_eq!(FeatureSchema::new(Wfp, Dense, 4).len(), 10);
        assert_eq!(FeatureSchema::new(Wfp, Recurrent, 4).len(), 9);
        for v in Variant::ALL {
            for a in Architecture::ALL {
                let s = FeatureSchema::new(v, a, 4);
                assert_eq!(s.names().len(), s.len());
            }
        }
    }

    #[test]
    fn build_records() {
        let s = setting(60.0, 40.0, 1.0, 24);
        let st = s.state_at(0.1, 90.0);
        let sk: Vec<f64> = (0..30).map(f64::from).collect();
        let schema = FeatureSchema::new(Variant::Baseline, Architecture::Dense, 4);
        let rec = build_input_record(
            &schema,
            &st,
            &s,
            GeometryInputs {
                shape_code: Some(-1.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            rec,
            vec![60.0, 40.0, 1.0, st.stroke_angle, st.pitch_angle, 1.0, -1.0]
        );

        let rfp = FeatureSchema::new(Variant::Rfp, Architecture::Dense, 4);
        let geo = GeometryInputs {
            skeleton: Some(&sk),
            ..Default::default()
        };
        let rec = build_input_record(&rfp, &st, &s, geo).unwrap();
        assert_eq!(rec.len(), 32);
        assert_eq!(&rec[..2], &[1.0, 1.0]);
        assert_eq!(&rec[2..], &sk[..]);

        let wfp = FeatureSchema::new(Variant::Wfp, Architecture::Dense, 4);
        let err = build_input_record(&wfp, &st, &s, geo).unwrap_err();
        assert!(err.to_string().contains("WFP"), "{err}");
        assert!(err.to_string().contains("reduced"), "{err}");
    }

    #[test]
    fn record_csv_round_trip_is_exact() {
        let rec = vec![0.1, -1.0 / 3.0, 1e-300, f64::MAX, -0.0, 12345.678901234567];
        let back = parse_record(&record_to_csv(&rec)).unwrap();
        for (a, b) in rec.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
