use crate::error::{Error, Result};
use crate::geometry::{stroke_axis_distance, FlatSkeleton, SkeletonFrame};
use crate::kinematics::KinematicSetting;

/// Slope `c_T` in the strip force coefficient `c_T sin(2α)`.
pub const DEFAULT_THRUST_GAIN: f64 = 1.0;

/// Relative tolerance on sample spacing.
const SPACING_TOL: f64 = 1e-9;

/// Quasi-steady blade-element thrust (N) for one uniformly sampled cycle.
///
/// For strip `i` with area `A_i` and rotated center of mass at distance `r_i`
/// from the stroke axis, the normal speed is `v_i = |dθ/dt| r_i`, with the
/// stroke rate taken by periodic central differences of the frames' stroke
/// angles. The geometric angle of attack is `α = s (90° - |φ|)` with
/// `s = sign(dθ/dt) sign(φ)`, and the strip thrust is
/// `½ ρ A_i v_i² c_T sin(2α)`. Lengths in the skeleton are cm.
pub fn oracle_thrust(
    times: &[f64],
    frames: &[SkeletonFrame],
    flat: &FlatSkeleton,
    setting: &KinematicSetting,
    rho: f64,
    gain: f64,
) -> Result<Vec<f64>> {
    let n = frames.len();
    if times.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: times.len(),
        });
    }
    if n < 3 {
        return Err(Error::Domain(format!(
            "oracle needs at least 3 samples per cycle, got {n}"
        )));
    }
    let dt = setting.period() / n as f64;
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > SPACING_TOL * setting.period() {
            return Err(Error::Domain(format!(
                "samples {k} and {} are not uniformly spaced over one period",
                k + 1
            )));
        }
    }
    if let Some(f) = frames.iter().find(|f| f.points.len() != flat.len()) {
        return Err(Error::Dimension {
            expected: flat.len(),
            actual: f.points.len(),
        });
    }

    let thrust = (0..n)
        .map(|k| {
            let next = frames[(k + 1) % n].stroke_angle;
            let prev = frames[(k + n - 1) % n].stroke_angle;
            let rate = ((next - prev) / (2.0 * dt)).to_radians();
            let pitch = frames[k].pitch_angle;
            let alpha = rate.signum() * sign(pitch) * (90.0 - pitch.abs());
            let force = gain * (2.0 * alpha).to_radians().sin();
            frames[k]
                .points
                .iter()
                .zip(&flat.strip_areas)
                .map(|(p, area_cm2)| {
                    let v = rate.abs() * stroke_axis_distance(*p) * 1e-2;
                    0.5 * rho * area_cm2 * 1e-4 * v * v * force
                })
                .sum()
        })
        .collect();
    Ok(thrust)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
