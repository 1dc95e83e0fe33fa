use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{History, NetConfig, Network};
use crate::error::{Error, Result};
use crate::kinematics::{Architecture, FeatureSchema, Variant};
use crate::preprocess::NormStats;
use crate::reduction::PcaReducer;

pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained network with everything needed to run it on raw input records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub version: u32,
    pub architecture: Architecture,
    pub variant: Variant,
    pub schema: FeatureSchema,
    pub feature_names: Vec<String>,
    pub config: NetConfig,
    pub network: Network,
    pub norm: NormStats,
    /// Present for WFP models.
    pub reducer: Option<PcaReducer>,
    pub history: History,
}

impl SurrogateModel {
    pub fn new(
        schema: FeatureSchema,
        config: NetConfig,
        network: Network,
        norm: NormStats,
        reducer: Option<PcaReducer>,
        history: History,
    ) -> Result<Self> {
        let model = SurrogateModel {
            version: CHECKPOINT_VERSION,
            architecture: network.architecture(),
            variant: schema.variant,
            feature_names: schema.names(),
            schema,
            config,
            network,
            norm,
            reducer,
            history,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let len = self.schema.len();
        for (what, dim) in [
            ("network input", self.network.input_dim()),
            ("config input", self.config.input_dim()),
            ("normalization", self.norm.dim()),
            ("feature names", self.feature_names.len()),
        ] {
            if dim != len {
                return Err(Error::Schema(format!(
                    "{what} dimension {dim} does not match the {} {} schema length {len}",
                    self.variant, self.architecture
                )));
            }
        }
        if self.architecture != self.schema.architecture
            || self.architecture != self.network.architecture()
            || self.architecture != self.config.architecture()
            || self.variant != self.schema.variant
        {
            return Err(Error::Schema(
                "checkpoint tags disagree with its contents".into(),
            ));
        }
        match (&self.reducer, self.variant) {
            (Some(r), Variant::Wfp) if r.k == self.schema.geometry_dim => Ok(()),
            (Some(r), Variant::Wfp) => Err(Error::Schema(format!(
                "reducer keeps {} components but the schema expects {}",
                r.k, self.schema.geometry_dim
            ))),
            (None, Variant::Wfp) => Err(Error::Schema("WFP checkpoint has no reducer".into())),
            _ => Ok(()),
        }
    }

    /// Normalized thrust for one cycle of raw (unnormalized) input records.
    pub fn predict(&self, records: &[Vec<f64>]) -> Result<Vec<f64>> {
        let normalized: Vec<Vec<f64>> = records
            .iter()
            .map(|r| {
                if r.len() == self.norm.dim() {
                    Ok(self.norm.apply(r))
                } else {
                    Err(Error::Dimension {
                        expected: self.norm.dim(),
                        actual: r.len(),
                    })
                }
            })
            .collect::<Result<_>>()?;
        self.network.predict(&normalized)
    }

    /// Thrust coefficients for one cycle of raw input records.
    pub fn predict_coefficients(&self, records: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self
            .predict(records)?
            .into_iter()
            .map(|y| self.norm.denormalize_thrust(y))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("<model>", e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: SurrogateModel =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        model.validate()?;
        Ok(model)
    }
}
