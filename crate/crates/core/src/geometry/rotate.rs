//! Kinematic rotation of flat skeletons into 3D.
//!
//! Conventions (fixed, all in the axis frame):
//! - the stroke axis is the `x` axis, the pitch axis is the `z` axis;
//! - pitch is applied first, then stroke (the pitch mechanism rides on the
//!   stroke arm);
//! - positive pitch lifts the leading edge (`x < 0`) toward `+y`;
//! - positive stroke lifts the tip (`z > 0`) toward `+y`.

use serde::{Deserialize, Serialize};

use super::polygon::Point2;
use super::segment::FlatSkeleton;

pub type Point3 = [f64; 3];

/// The rotated skeleton at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub points: Vec<Point3>,
    pub stroke_angle: f64,
    pub pitch_angle: f64,
}

/// Rotation about the pitch axis (`z`), then about the stroke axis (`x`).
pub fn rotate_point(p: Point3, stroke_deg: f64, pitch_deg: f64) -> Point3 {
    let (sp, cp) = pitch_deg.to_radians().sin_cos();
    let (ss, cs) = stroke_deg.to_radians().sin_cos();
    let [x, y, z] = p;
    let x1 = x * cp + y * sp;
    let y1 = -x * sp + y * cp;
    let y2 = y1 * cs + z * ss;
    let z2 = -y1 * ss + z * cs;
    [x1, y2, z2]
}

pub fn embed(p: Point2) -> Point3 {
    [p[0], 0.0, p[1]]
}

pub fn rotate_skeleton(flat: &FlatSkeleton, stroke_deg: f64, pitch_deg: f64) -> SkeletonFrame {
    SkeletonFrame {
        points: flat
            .coms
            .iter()
            .map(|&c| rotate_point(embed(c), stroke_deg, pitch_deg))
            .collect(),
        stroke_angle: stroke_deg,
        pitch_angle: pitch_deg,
    }
}

/// Distance from the stroke axis (`x` axis).
pub fn stroke_axis_distance(p: Point3) -> f64 {
    p[1].hypot(p[2])
}

/// Flattens as `[x1, y1, z1, x2, y2, z2, ...]`, root strip first.
pub fn skeleton_to_vector(frame: &SkeletonFrame) -> Vec<f64> {
    frame
        .points
        .iter()
        .flat_map(|p| p.iter().copied())
        .collect()
}
