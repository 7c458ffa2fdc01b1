//! Trained-model files: pretty-printed JSON with a fixed set of keys.
//!
//! Numbers are written in shortest round-trip form, so reading a written
//! file reproduces every parameter bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{MixtureModel, DIM};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeNormalization {
    /// Number of frames `T`; frame `f` sits at time `(f − 1)/(T − 1)`.
    pub frame_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub dimension: usize,
    pub component_count: usize,
    pub priors: Vec<f64>,
    pub means: Vec<[f64; DIM]>,
    pub covariances: Vec<[[f64; DIM]; DIM]>,
    pub time_normalization: TimeNormalization,
    #[serde(default)]
    pub frame_provenance: BTreeMap<String, String>,
}

impl ModelFile {
    pub fn from_model(
        model: &MixtureModel,
        frame_count: usize,
        frame_provenance: BTreeMap<String, String>,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            dimension: DIM,
            component_count: model.component_count(),
            priors: model.priors().to_vec(),
            means: model.means().iter().map(|m| (*m).into()).collect(),
            covariances: model
                .covariances()
                .iter()
                .map(|c| {
                    let mut rows = [[0.0; DIM]; DIM];
                    for (r, row) in rows.iter_mut().enumerate() {
                        for (col, v) in row.iter_mut().enumerate() {
                            *v = c[(r, col)];
                        }
                    }
                    rows
                })
                .collect(),
            time_normalization: TimeNormalization { frame_count },
            frame_provenance,
        }
    }

    /// Checks header fields and rebuilds the (validated) mixture.
    pub fn to_model(&self) -> Result<MixtureModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: i64::from(self.format_version),
                expected: FORMAT_VERSION,
            });
        }
        if self.dimension != DIM {
            return Err(Error::Validation(format!(
                "dimension is {}, expected {DIM}",
                self.dimension
            )));
        }
        if self.priors.len() != self.component_count {
            return Err(Error::Validation(format!(
                "component_count is {} but {} priors are listed",
                self.component_count,
                self.priors.len()
            )));
        }
        let means = self.means.iter().map(|m| Vector4::from(*m)).collect();
        let covs = self
            .covariances
            .iter()
            .map(|rows| Matrix4::from_fn(|r, c| rows[r][c]))
            .collect();
        MixtureModel::new(self.priors.clone(), means, covs)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_model().map(|_| ())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(format!("cannot serialize model: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("model file is not valid JSON: {e}")))?;
        match value.get("format_version").map(|v| v.as_i64()) {
            Some(Some(v)) if v == i64::from(FORMAT_VERSION) => {}
            Some(Some(v)) => {
                return Err(Error::VersionMismatch {
                    found: v,
                    expected: FORMAT_VERSION,
                })
            }
            _ => return Err(Error::Format("missing integer format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(value)
            .map_err(|e| Error::Format(format!("bad model file: {e}")))?;
        file.validate()?;
        Ok(file)
    }
}

pub fn write_model(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_json()?)?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(format!("model file {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    ModelFile::from_json(&text)
}
