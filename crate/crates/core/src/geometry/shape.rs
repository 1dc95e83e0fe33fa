use std::path::Path;

use serde::{Deserialize, Serialize};

use super::polygon::{self, Point2};
use crate::error::{Error, Result};

/// Relative area below which a polygon is considered degenerate.
const MIN_RELATIVE_AREA: f64 = 1e-12;

/// A flat fin outline in the fin plane (`x` chordwise, `z` spanwise), in cm.
///
/// Construction validates the outline and normalizes it to counter-clockwise
/// order. The root is the edge at minimum `z`, the leading edge is at minimum
/// `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinShape {
    name: String,
    vertices: Vec<Point2>,
}

#[derive(Deserialize)]
struct FinShapeFile {
    name: String,
    vertices: Vec<Point2>,
}

impl FinShape {
    pub fn new(name: impl Into<String>, vertices: Vec<Point2>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidShape {
            name: name.clone(),
            reason,
        };
        let mut vertices = vertices;
        // Closing vertex repeated at the end is tolerated.
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(invalid(format!(
                "needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(i) = vertices
            .iter()
            .position(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(invalid(format!("vertex {i} is not finite")));
        }
        let (z_min, z_max) = polygon::z_bounds(&vertices);
        if z_max - z_min <= 0.0 {
            return Err(invalid("spanwise extent is zero".into()));
        }
        let (x_min, x_max) = polygon::x_bounds(&vertices);
        let scale = (z_max - z_min) * (x_max - x_min).max(z_max - z_min);
        let signed = polygon::signed_area(&vertices);
        if signed.abs() <= MIN_RELATIVE_AREA * scale {
            return Err(invalid(format!("area {signed:e} is not positive")));
        }
        if let Some((i, j)) = polygon::first_self_intersection(&vertices) {
            return Err(invalid(format!(
                "polygon is not simple: edges {i} and {j} intersect"
            )));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        Ok(FinShape { name, vertices })
    }

    /// Parses `{ "name": ..., "vertices": [[x, z], ...] }`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FinShapeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<fin outline>".into(),
            line: e.line(),
            reason: e.to_string(),
        })?;
        FinShape::new(file.name, file.vertices)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: FinShapeFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            reason: e.to_string(),
        })?;
        FinShape::new(file.name, file.vertices)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fin shape serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Counter-clockwise vertices in the shape's own coordinates.
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        polygon::area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        polygon::centroid(&self.vertices).expect("validated shape has positive area")
    }

    pub fn span(&self) -> f64 {
        let (lo, hi) = polygon::z_bounds(&self.vertices);
        hi - lo
    }

    /// Outline expressed in the axis frame: root chord at
    /// `z = stroke_axis_offset`, leading edge at `x = -pitch_axis_offset`.
    pub fn registered(&self, frame: &AxisFrame) -> Vec<Point2> {
        let (x_min, _) = polygon::x_bounds(&self.vertices);
        let (z_min, _) = polygon::z_bounds(&self.vertices);
        self.vertices
            .iter()
            .map(|&[x, z]| {
                [
                    x - x_min - frame.pitch_axis_offset,
                    z - z_min + frame.stroke_axis_offset,
                ]
            })
            .collect()
    }

    /// The fin tip in the axis frame: the vertex farthest from the stroke
    /// axis, ties broken toward the trailing edge.
    pub fn tip(&self, frame: &AxisFrame) -> Point2 {
        self.registered(frame)
            .into_iter()
            .max_by(|a, b| {
                a[1].abs()
                    .total_cmp(&b[1].abs())
                    .then(a[0].abs().total_cmp(&b[0].abs()))
            })
            .expect("validated shape has vertices")
    }
}

/// Placement of the stroke and pitch axes relative to the fin.
///
/// The stroke axis runs along `x` and the pitch axis along `z`; they meet at
/// the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisFrame {
    /// Distance from the root chord to the stroke axis, cm.
    pub stroke_axis_offset: f64,
    /// Distance from the leading edge to the pitch axis, cm.
    pub pitch_axis_offset: f64,
}

impl AxisFrame {
    pub fn new(stroke_axis_offset: f64, pitch_axis_offset: f64) -> Result<Self> {
        for (label, v) in [
            ("stroke_axis_offset", stroke_axis_offset),
            ("pitch_axis_offset", pitch_axis_offset),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{label} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(AxisFrame {
            stroke_axis_offset,
            pitch_axis_offset,
        })
    }

    /// Offsets of the reference test rig: 3.175 cm root-to-stroke-axis and
    /// 1.25 cm leading-edge-to-pitch-axis.
    pub fn rig() -> Self {
        AxisFrame {
            stroke_axis_offset: 3.175,
            pitch_axis_offset: 1.25,
        }
    }

    pub fn origin() -> Self {
        AxisFrame {
            stroke_axis_offset: 0.0,
            pitch_axis_offset: 0.0,
        }
    }
}

impl Default for AxisFrame {
    fn default() -> Self {
        AxisFrame::rig()
    }
}
