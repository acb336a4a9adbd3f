//! JSON model document: fitted parameters plus fit metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::{FreqParams, SevParams};
use crate::em::{EmTrace, StopReason};
use crate::error::{Error, Result};
use crate::likelihood::FullParams;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub iterations: usize,
    pub final_loglik: f64,
    pub tol: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub damped_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FitMeta {
    pub fn from_trace<P>(trace: &EmTrace<P>, tol: f64) -> Self {
        Self {
            iterations: trace.iterations,
            final_loglik: trace.final_loglik(),
            tol,
            converged: trace.converged,
            stop_reason: trace.stop_reason,
            damped_steps: trace.damped_steps,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Option<FreqParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sev: Option<SevParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_fit: Option<FitMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sev_fit: Option<FitMeta>,
}

impl Default for ModelFile {
    fn default() -> Self {
        Self {
            version: MODEL_FORMAT_VERSION,
            freq: None,
            sev: None,
            freq_fit: None,
            sev_fit: None,
        }
    }
}

impl ModelFile {
    pub fn from_params(params: &FullParams) -> Self {
        Self {
            freq: Some(params.freq),
            sev: Some(params.sev),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported format version {} (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        if let Some(f) = &model.freq {
            f.validate()?;
        }
        if let Some(s) = &model.sev {
            s.validate()?;
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_json(&text).map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn require_freq(&self) -> Result<FreqParams> {
        self.freq
            .ok_or_else(|| Error::ModelFile("model has no frequency parameters".into()))
    }

    pub fn require_sev(&self) -> Result<SevParams> {
        self.sev
            .ok_or_else(|| Error::ModelFile("model has no severity parameters".into()))
    }

    pub fn full_params(&self) -> Result<FullParams> {
        FullParams::new(self.require_freq()?, self.require_sev()?)
    }
}
