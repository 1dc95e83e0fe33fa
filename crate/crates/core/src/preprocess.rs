//! Thrust coefficients, input normalization and the thrust-deviation noise
//! metric.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon::Point2;
use crate::kinematics::KinematicSetting;

/// Water, kg/m³.
pub const DEFAULT_DENSITY: f64 = 1000.0;
pub const DEFAULT_DEV_BINS: usize = 100;

/// Grid used to average tip speed over one period.
const TIP_SPEED_SAMPLES: usize = 4096;

/// `T / (½ ρ v² A)`.
pub fn thrust_coefficient(thrust: f64, rho: f64, v_ref: f64, area: f64) -> Result<f64> {
    for (label, v) in [("density", rho), ("reference speed", v_ref), ("area", area)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{label} must be positive, got {v}")));
        }
    }
    Ok(thrust / (0.5 * rho * v_ref * v_ref * area))
}

/// Speed (same length unit as `point`, per second) of a flat-fin point under
/// the combined pitch-then-stroke rotation at time `t`.
pub fn point_speed(point: Point2, setting: &KinematicSetting, pitch_phase_deg: f64, t: f64) -> f64 {
    let [x, z] = point;
    let pitch = setting.pitch_angle(t, pitch_phase_deg).to_radians();
    let stroke_rate = setting.stroke_rate(t).to_radians();
    let pitch_rate = setting.pitch_rate(t, pitch_phase_deg).to_radians();
    let (sp, cp) = pitch.sin_cos();
    let r2 = x * x * sp * sp + z * z;
    let v2 = x * x * pitch_rate * pitch_rate + stroke_rate * stroke_rate * r2
        - 2.0 * x * z * cp * pitch_rate * stroke_rate;
    v2.max(0.0).sqrt()
}

/// Mean speed of the fin tip over one cycle, m/s. `tip` is in cm in the axis
/// frame.
pub fn mean_tip_speed(tip: Point2, setting: &KinematicSetting, pitch_phase_deg: f64) -> f64 {
    let period = setting.period();
    let h = period / TIP_SPEED_SAMPLES as f64;
    let sum: f64 = (0..TIP_SPEED_SAMPLES)
        .map(|k| point_speed(tip, setting, pitch_phase_deg, k as f64 * h))
        .sum();
    sum / TIP_SPEED_SAMPLES as f64 / 100.0
}

/// Z-score statistics for model inputs plus the thrust-coefficient divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Features that were constant over the fit set; stored with std 1.
    pub constant: Vec<usize>,
    pub thrust_scale: f64,
}

impl NormStats {
    /// Population statistics over `records`; `thrust_coeffs` sets the thrust
    /// divisor so the normalized training thrust has unit standard deviation.
    pub fn fit<'a, I>(records: I, thrust_coeffs: &[f64]) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = records.into_iter().collect();
        let Some(first) = rows.first() else {
            return Err(Error::Dataset(
                "cannot fit normalization on no records".into(),
            ));
        };
        let dim = first.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: bad.len(),
            });
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for r in &rows {
            for (m, x) in means.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; dim];
        for r in &rows {
            for ((s, x), m) in stds.iter_mut().zip(r.iter()).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        let mut constant = Vec::new();
        for (i, s) in stds.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            if *s <= 1e-12 * means[i].abs().max(1.0) {
                log::warn!("input feature {i} is constant over the fit set; using std 1");
                constant.push(i);
                *s = 1.0;
            }
        }
        let thrust_scale = if thrust_coeffs.is_empty() {
            1.0
        } else {
            let s = population_std(thrust_coeffs);
            if s > 0.0 && s.is_finite() {
                s
            } else {
                log::warn!("thrust coefficients have zero spread; thrust scale set to 1");
                1.0
            }
        };
        Ok(NormStats {
            means,
            stds,
            constant,
            thrust_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, record: &[f64]) -> Vec<f64> {
        record
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn invert(&self, normalized: &[f64]) -> Vec<f64> {
        normalized
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(z, (m, s))| z * s + m)
            .collect()
    }

    pub fn normalize_thrust(&self, coeff: f64) -> f64 {
        coeff / self.thrust_scale
    }

    pub fn denormalize_thrust(&self, normalized: f64) -> f64 {
        normalized * self.thrust_scale
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by `n`). Values are shifted by the
/// first one before averaging, so identical inputs give exactly zero.
pub fn population_std(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else {
        return 0.0;
    };
    let d: Vec<f64> = xs.iter().map(|x| x - x0).collect();
    let m = mean(&d);
    (d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / d.len() as f64).sqrt()
}

/// One sample entering the thrust-deviation metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevSample {
    pub stroke_angle: f64,
    pub stroke_state: u8,
    /// Normalized thrust coefficient.
    pub thrust: f64,
}

/// Mean per-cell population standard deviation of normalized thrust.
///
/// The group's stroke range is split into `n_bins` equal intervals, each
/// split again into upstroke and downstroke, giving `2 * n_bins` cells. Cells
/// with fewer than two samples contribute zero but still count toward the
/// mean.
pub fn thrust_deviation(cycles: &[Vec<DevSample>], n_bins: usize) -> Result<f64> {
    if cycles.len() < 2 {
        return Err(Error::Domain(format!(
            "thrust deviation needs at least 2 cycles, got {}",
            cycles.len()
        )));
    }
    if n_bins == 0 {
        return Err(Error::Domain("n_bins must be at least 1".into()));
    }
    let samples = || cycles.iter().flat_map(|c| c.iter());
    let (s_min, s_max) = samples().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.stroke_angle), hi.max(s.stroke_angle))
    });
    let width = s_max - s_min;
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); 2 * n_bins];
    for s in samples() {
        let bin = if width > 0.0 {
            (((s.stroke_angle - s_min) / width * n_bins as f64) as usize).min(n_bins - 1)
        } else {
            0
        };
        let cell = if s.stroke_state == 1 {
            bin
        } else {
            bin + n_bins
        };
        cells[cell].push(s.thrust);
    }
    let total: f64 = cells
        .iter()
        .filter(|c| c.len() >= 2)
        .map(|c| population_std(c))
        .sum();
    Ok(total / (2 * n_bins) as f64)
}
