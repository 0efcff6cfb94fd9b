use std::path::Path;

use gadvoice_core::experiment::{Pipeline, Tuning};
use gadvoice_core::learners::TrainedModel;
use serde::{Deserialize, Serialize};

use crate::formats::write_string;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model with enough context to reuse it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub pipeline: Pipeline,
    /// Feature registry the model was trained on (hand-crafted features only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<Tuning>,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(pipeline: Pipeline, model: TrainedModel, tuning: Option<Tuning>) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            pipeline,
            registry_version: (pipeline == Pipeline::HandCrafted)
                .then(|| gadvoice_core::features::REGISTRY_VERSION.to_string()),
            tuning,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("models serialize");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_string(path.as_ref(), &self.to_json())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::MalformedLine {
            path: path.into(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::MalformedLine {
                path: path.into(),
                line: 1,
                msg: format!("model format version {} is not supported", m.format_version),
            });
        }
        Ok(m)
    }
}
