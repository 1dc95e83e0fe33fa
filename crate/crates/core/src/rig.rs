//! The physical context shared by data generation, featurization and
//! thrust normalization: axis placement, fluid density, pitch phase and the
//! catalog of fin shapes with their precomputed flat skeletons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    builtin_shapes, rotate_skeleton, segment_fin, skeleton_to_vector, AxisFrame, FinShape,
    FlatSkeleton, DEFAULT_STRIPS,
};
use crate::kinematics::{KinematicSetting, DEFAULT_PITCH_PHASE_DEG};
use crate::preprocess::{self, DEFAULT_DENSITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigParams {
    pub frame: AxisFrame,
    /// kg/m³
    pub density: f64,
    pub pitch_phase_deg: f64,
    pub n_strips: usize,
}

impl Default for RigParams {
    fn default() -> Self {
        RigParams {
            frame: AxisFrame::rig(),
            density: DEFAULT_DENSITY,
            pitch_phase_deg: DEFAULT_PITCH_PHASE_DEG,
            n_strips: DEFAULT_STRIPS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShapeGeometry {
    pub shape: FinShape,
    pub flat: FlatSkeleton,
}

#[derive(Debug, Clone)]
pub struct Rig {
    pub params: RigParams,
    shapes: BTreeMap<String, ShapeGeometry>,
}

impl Rig {
    pub fn new(params: RigParams, shapes: impl IntoIterator<Item = FinShape>) -> Result<Self> {
        if !(params.density > 0.0 && params.density.is_finite()) {
            return Err(Error::Domain(format!(
                "density must be positive, got {}",
                params.density
            )));
        }
        let mut map = BTreeMap::new();
        for shape in shapes {
            let flat = segment_fin(&shape, &params.frame, params.n_strips)?;
            map.insert(shape.name().to_string(), ShapeGeometry { shape, flat });
        }
        Ok(Rig {
            params,
            shapes: map,
        })
    }

    /// Default rig parameters with the three shipped fins.
    pub fn builtin() -> Self {
        Rig::new(RigParams::default(), builtin_shapes()).expect("builtin rig is valid")
    }

    pub fn shape_names(&self) -> impl Iterator<Item = &str> {
        self.shapes.keys().map(String::as_str)
    }

    pub fn geometry(&self, name: &str) -> Result<&ShapeGeometry> {
        self.shapes
            .get(name)
            .ok_or_else(|| Error::Dataset(format!("unknown fin shape `{name}`")))
    }

    /// Fin area, m².
    pub fn area_m2(&self, name: &str) -> Result<f64> {
        Ok(self.geometry(name)?.flat.total_area * 1e-4)
    }

    /// Mean tip speed over a cycle, m/s.
    pub fn reference_speed(&self, name: &str, setting: &KinematicSetting) -> Result<f64> {
        let g = self.geometry(name)?;
        Ok(preprocess::mean_tip_speed(
            g.flat.tip,
            setting,
            self.params.pitch_phase_deg,
        ))
    }

    /// `½ ρ v_ref² A`, the divisor turning thrust (N) into a coefficient.
    pub fn dynamic_force(&self, name: &str, setting: &KinematicSetting) -> Result<f64> {
        let v = self.reference_speed(name, setting)?;
        let a = self.area_m2(name)?;
        // Routed through thrust_coefficient for its domain checks.
        let unit = preprocess::thrust_coefficient(1.0, self.params.density, v, a)?;
        Ok(1.0 / unit)
    }

    /// The 30-value skeleton of `name` at the given angles.
    pub fn skeleton_vector(&self, name: &str, stroke_deg: f64, pitch_deg: f64) -> Result<Vec<f64>> {
        let g = self.geometry(name)?;
        Ok(skeleton_to_vector(&rotate_skeleton(
            &g.flat, stroke_deg, pitch_deg,
        )))
    }
}
